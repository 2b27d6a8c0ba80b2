#include "odflow/leaderlayout.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "odflow/error.hpp"

namespace odflow::leaderlayout {

namespace {

Orientation orientation_for(double site_y, double port_y) {
  return port_y >= site_y ? Orientation::kUp : Orientation::kDown;
}

Leader make_leader(const Site& s, double port_x, double port_y, double k) {
  Leader l;
  l.id = s.id;
  l.site = s.point;
  l.orientation = orientation_for(s.point.y, port_y);
  l.bend = {s.point.x + std::abs(port_y - s.point.y) / k, port_y};
  l.port = {port_x, port_y};
  return l;
}

// Lexicographic potential of one leader: (|Y - y|, -Y * beta).
struct Potential {
  double travel = 0.0;
  double spread = 0.0;
};

Potential potential(const Leader& l, double k) {
  return {std::abs(l.port.y - l.site.y), -l.port.y * l.intercept(k)};
}

bool improves(const Potential& before, const Potential& after) {
  const double tol1 = 1e-12 * std::max(1.0, std::abs(before.travel));
  if (after.travel < before.travel - tol1) return true;
  if (after.travel > before.travel + tol1) return false;
  const double tol2 = 1e-12 * std::max(1.0, std::abs(before.spread));
  return after.spread < before.spread - tol2;
}

std::vector<Segment> leader_segments_except(const LeaderPlan& plan, std::size_t skip, const Rect& near,
                                            double d) {
  std::vector<Segment> out;
  for (std::size_t i = 0; i < plan.leaders.size(); ++i) {
    if (i == skip) continue;
    for (const Segment& s : {plan.leaders[i].diagonal(), plan.leaders[i].horizontal()}) {
      const Rect box{std::min(s.a.x, s.b.x), std::min(s.a.y, s.b.y), std::max(s.a.x, s.b.x),
                     std::max(s.a.y, s.b.y)};
      if (box.right < near.left - d || box.left > near.right + d || box.top < near.bottom - d ||
          box.bottom > near.top + d) {
        continue;
      }
      out.push_back(s);
    }
  }
  return out;
}

}  // namespace

double Leader::intercept(double k) const {
  return orientation == Orientation::kUp ? site.y - k * site.x : site.y + k * site.x;
}

std::size_t LeaderPlan::index_of(const std::string& id) const {
  for (std::size_t i = 0; i < ordering.size(); ++i) {
    if (ordering[i] == id) return i;
  }
  throw Error(ErrorCode::kUnknownRegion, "region not in ordering: " + id, id);
}

bool leaders_intersect(const Leader& a, const Leader& b) {
  for (const Segment& s : {a.diagonal(), a.horizontal()}) {
    for (const Segment& t : {b.diagonal(), b.horizontal()}) {
      if (planar::segments_intersect(s, t)) return true;
    }
  }
  return false;
}

std::vector<std::string> compute_ordering(std::span<const Site> sites, const PortLine& edge, double k) {
  if (!(k > 0.0)) throw Error(ErrorCode::kInvalidArgument, "diagonal slope must be positive");
  const std::size_t n = sites.size();
  std::vector<Site> sorted(sites.begin(), sites.end());
  std::sort(sorted.begin(), sorted.end(), [](const Site& a, const Site& b) {
    if (a.point.y != b.point.y) return a.point.y > b.point.y;
    if (a.point.x != b.point.x) return a.point.x < b.point.x;
    return a.id < b.id;
  });
  for (std::size_t i = 1; i < n; ++i) {
    if (sorted[i].id == sorted[i - 1].id) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate site id " + sorted[i].id, sorted[i].id);
    }
  }

  // slot -> site
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  auto leader_at = [&](std::size_t slot, std::size_t site) {
    return make_leader(sorted[site], edge.x, edge.port_y(slot, n), k);
  };
  std::vector<Leader> leaders;
  leaders.reserve(n);
  for (std::size_t i = 0; i < n; ++i) leaders.push_back(leader_at(i, perm[i]));

  const std::size_t max_passes = 4 * n + 8;
  for (std::size_t pass = 0; pass < max_passes; ++pass) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!leaders_intersect(leaders[i], leaders[j])) continue;
        const Leader si = leader_at(i, perm[j]);
        const Leader sj = leader_at(j, perm[i]);
        const Potential pi = potential(leaders[i], k), pj = potential(leaders[j], k);
        const Potential qi = potential(si, k), qj = potential(sj, k);
        if (improves({pi.travel + pj.travel, pi.spread + pj.spread},
                     {qi.travel + qj.travel, qi.spread + qj.spread})) {
          std::swap(perm[i], perm[j]);
          leaders[i] = si;
          leaders[j] = sj;
          changed = true;
        }
      }
    }
    if (!changed) break;
  }

  std::vector<std::string> ordering;
  ordering.reserve(n);
  for (std::size_t p : perm) ordering.push_back(sorted[p].id);
  return ordering;
}

LeaderPlan route_leaders(std::span<const Site> sites, std::span<const std::string> ordering,
                         const PortLine& edge, const RouteOptions& options) {
  if (!(options.k > 0.0)) throw Error(ErrorCode::kInvalidArgument, "diagonal slope must be positive");
  const std::size_t n = ordering.size();
  std::map<std::string, const Site*> by_id;
  for (const Site& s : sites) by_id[s.id] = &s;
  if (by_id.size() != sites.size() || n != sites.size()) {
    throw Error(ErrorCode::kInvalidArgument, "ordering must be a permutation of the site ids");
  }
  if (n > 0 && edge.top - edge.bottom < static_cast<double>(n) * options.min_pitch) {
    throw Error(ErrorCode::kInfeasibleGeometry, "matrix edge too short for " + std::to_string(n) + " ports");
  }

  LeaderPlan plan;
  plan.edge = edge;
  plan.k = options.k;
  plan.ordering.assign(ordering.begin(), ordering.end());
  for (std::size_t i = 0; i < n; ++i) {
    auto it = by_id.find(ordering[i]);
    if (it == by_id.end()) {
      throw Error(ErrorCode::kUnknownRegion, "ordering names unknown site " + ordering[i], ordering[i]);
    }
    Leader l = make_leader(*it->second, edge.x, edge.port_y(i, n), options.k);
    if (l.bend.x > edge.x + 1e-12 * std::max(1.0, std::abs(edge.x))) {
      throw Error(ErrorCode::kInfeasibleGeometry, "leader diagonal passes the port line", l.id);
    }
    l.bend.x = std::min(l.bend.x, edge.x);
    if (!plan.bands.empty() && plan.bands.back().orientation == l.orientation) {
      plan.bands.back().last = i;
    } else {
      plan.bands.push_back(Band{i, i, l.orientation});
    }
    l.band = plan.bands.size() - 1;
    plan.leaders.push_back(std::move(l));
  }

  for (std::size_t b = 0; b + 1 < plan.bands.size(); ++b) {
    double upper_min = std::numeric_limits<double>::infinity();
    double lower_max = -std::numeric_limits<double>::infinity();
    for (std::size_t i = plan.bands[b].first; i <= plan.bands[b].last; ++i) {
      upper_min = std::min({upper_min, plan.leaders[i].site.y, plan.leaders[i].port.y});
    }
    for (std::size_t i = plan.bands[b + 1].first; i <= plan.bands[b + 1].last; ++i) {
      lower_max = std::max({lower_max, plan.leaders[i].site.y, plan.leaders[i].port.y});
    }
    const double gap = upper_min - lower_max;
    plan.band_lines.push_back(
        BandLine{b, 0.5 * (upper_min + lower_max), std::max(0.0, std::min(options.d_lc, 0.5 * gap))});
  }
  return plan;
}

FreeRect grow_free_rect(std::span<const Ring> region, Vec2 site, const LeaderPlan& plan,
                        std::size_t leader_index, double d_b, int iterations) {
  FreeRect out;
  out.rect = Rect{site.x, site.y, site.x, site.y};
  if (region.empty() || !planar::point_in_rings(site, region)) {
    out.collapsed = true;
    return out;
  }
  const Rect bbox = planar::bounding_box(region);
  const std::vector<Segment> others = leader_segments_except(plan, leader_index, bbox, d_b);

  auto clear_of_leaders = [&](const Rect& r) {
    for (const Segment& s : others) {
      if (planar::rect_segment_distance(r, s) < d_b) return false;
    }
    return true;
  };
  if (d_b > 0.0 && !clear_of_leaders(out.rect)) {
    out.collapsed = true;
    return out;
  }

  auto grow = [&](auto&& admissible) {
    const double ex = bbox.width();
    const double ey = bbox.height();
    double hw = 0.0;
    double hh = 0.0;
    auto rect_of = [&](double w, double h) { return Rect{site.x - w, site.y - h, site.x + w, site.y + h}; };
    double step_x = ex / 2.0;
    double step_y = ey / 2.0;
    for (int it = 0; it < iterations; ++it) {
      if (admissible(rect_of(hw + step_x, hh))) hw += step_x;
      if (admissible(rect_of(hw, hh + step_y))) hh += step_y;
      step_x /= 2.0;
      step_y /= 2.0;
    }
    return rect_of(hw, hh);
  };

  auto inside = [&](const Rect& r) { return planar::rect_in_rings(r, region); };
  out.rect = grow(inside);
  if (d_b > 0.0 && !clear_of_leaders(out.rect)) {
    out.pruned = true;
    out.rect = grow([&](const Rect& r) { return inside(r) && clear_of_leaders(r); });
  }
  return out;
}

}  // namespace odflow::leaderlayout
