#include <algorithm>
#include <cmath>
#include <numeric>

#include "common.hpp"
#include "odflow/error.hpp"
#include "odflow/layouts.hpp"

namespace odflow::layouts {

namespace {

using leaderlayout::Leader;
using leaderlayout::Orientation;
using leaderlayout::PortLine;
using leaderlayout::Site;

// Each map fills a unit-high band (origin map on [0, 1], destination map on
// [-1, 0]) with a small inset so the two maps do not touch. Both maps share
// one geometry up to a vertical shift of -1, which is what lets a single
// ordering serve as rows and columns.
constexpr double kMapHeight = 0.92;
constexpr double kMapInset = 0.04;
constexpr double kPortGap = 0.05;  // between the leftmost bend and the port line

const char* kRegionStroke = "#969696";
const char* kActiveFill = "#f0f0f0";
const char* kInactiveFill = "#fbfbfb";
const char* kTotalFill = "#636363";
const char* kFrameStroke = "#737373";

struct SideResult {
  LeaderPlan plan;
  std::vector<FreeRect> rects;
  QpStats stats;
};

Vec2 to_map(Vec2 v, double dy) { return {v.x * kMapHeight, v.y * kMapHeight + kMapInset + dy}; }

std::vector<LabelStyle> label_styles(const FlowDataset& d, const std::vector<std::string>& ordering, bool out,
                                     const MapTrixParams& params) {
  std::vector<std::size_t> by_total(ordering.size());
  std::iota(by_total.begin(), by_total.end(), 0);
  auto total = [&](std::size_t i) { return out ? d.total_out(ordering[i]) : d.total_in(ordering[i]); };
  std::sort(by_total.begin(), by_total.end(), [&](std::size_t a, std::size_t b) {
    const double ta = total(a), tb = total(b);
    return ta != tb ? ta > tb : ordering[a] < ordering[b];
  });
  std::vector<LabelStyle> styles(ordering.size());
  const double n = static_cast<double>(ordering.size());
  for (std::size_t rank = 0; rank < by_total.size(); ++rank) {
    const double t = n > 1 ? 1.0 - static_cast<double>(rank) / (n - 1) : 1.0;
    LabelStyle& s = styles[by_total[rank]];
    s.id = ordering[by_total[rank]];
    s.rank = static_cast<int>(rank);
    s.font_size = params.label_min_px + t * (params.label_max_px - params.label_min_px);
    s.fill = mix(parse_hex("#999999"), parse_hex("#000000"), t).hex();
  }
  return styles;
}

// Rank weight in [0, 1]: 1 for the largest total.
double rank_weight(const LabelStyle& s, std::size_t n) {
  return n > 1 ? 1.0 - static_cast<double>(s.rank) / static_cast<double>(n - 1) : 1.0;
}

nlohmann::json px(const MapTrixLayout& l, Vec2 p) {
  const Vec2 q = l.to_px(p);
  return {scene::canonical(q.x), scene::canonical(q.y)};
}

nlohmann::json plan_json(const MapTrixLayout& l, const LeaderPlan& plan, const std::vector<FreeRect>& rects,
                         const QpStats& qp) {
  nlohmann::json leaders = nlohmann::json::array();
  for (std::size_t i = 0; i < plan.leaders.size(); ++i) {
    const Leader& ld = plan.leaders[i];
    nlohmann::json j = {{"id", ld.id},
                        {"site", px(l, ld.site)},
                        {"bend", px(l, ld.bend)},
                        {"port", px(l, ld.port)},
                        {"orientation", ld.orientation == Orientation::kUp ? "up" : "down"},
                        {"band", ld.band}};
    if (i < rects.size()) {
      const FreeRect& r = rects[i];
      const Vec2 a = l.to_px({r.rect.left, r.rect.top});
      const Vec2 b = l.to_px({r.rect.right, r.rect.bottom});
      j["freeRect"] = {{"box", {scene::canonical(a.x), scene::canonical(a.y), scene::canonical(b.x),
                                scene::canonical(b.y)}},
                       {"pruned", r.pruned},
                       {"collapsed", r.collapsed}};
    }
    leaders.push_back(j);
  }
  nlohmann::json bands = nlohmann::json::array();
  for (const auto& b : plan.bands) {
    bands.push_back({{"first", b.first},
                     {"last", b.last},
                     {"orientation", b.orientation == Orientation::kUp ? "up" : "down"}});
  }
  return {{"leaders", leaders},
          {"bands", bands},
          {"qp",
           {{"initialObjective", scene::canonical(qp.initial_objective)},
            {"objective", scene::canonical(qp.objective)},
            {"iterations", qp.iterations},
            {"converged", qp.converged}}}};
}

}  // namespace

std::size_t MapTrixLayout::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < ordering.size(); ++i) {
    if (ordering[i] == id) return i;
  }
  throw Error(ErrorCode::kUnknownSelection, "region is not part of the matrix", std::string(id));
}

Vec2 MapTrixLayout::cell_center(std::size_t o, std::size_t d) const {
  const double n = static_cast<double>(size());
  return {port_x + 1.0 + (static_cast<double>(d) - static_cast<double>(o)) / n,
          1.0 - static_cast<double>(o + d + 1) / n};
}

std::vector<Vec2> MapTrixLayout::cell_polygon(std::size_t o, std::size_t d) const {
  const Vec2 c = cell_center(o, d);
  const double h = 1.0 / static_cast<double>(size());
  return {{c.x - h, c.y}, {c.x, c.y + h}, {c.x + h, c.y}, {c.x, c.y - h}};
}

std::vector<Vec2> MapTrixLayout::row_stripe(std::size_t o) const {
  const double n = static_cast<double>(size());
  const double a = static_cast<double>(o) / n, b = static_cast<double>(o + 1) / n;
  const double P = port_x;
  return {{P + 1 - a, 1 - a}, {P + 2 - a, -a}, {P + 2 - b, -b}, {P + 1 - b, 1 - b}};
}

std::vector<Vec2> MapTrixLayout::column_stripe(std::size_t d) const {
  const double n = static_cast<double>(size());
  const double a = static_cast<double>(d) / n, b = static_cast<double>(d + 1) / n;
  const double P = port_x;
  return {{P + a, -a}, {P + 1 + a, 1 - a}, {P + 1 + b, 1 - b}, {P + b, -b}};
}

const Scene& MapTrixLayout::scene(std::string_view id) const { return detail::find_scene(scenes, id); }

nlohmann::json MapTrixLayout::json() const {
  nlohmann::json labels = {{"origin", nlohmann::json::array()}, {"dest", nlohmann::json::array()}};
  for (const auto* side : {&origin_labels, &dest_labels}) {
    auto& arr = labels[side == &origin_labels ? "origin" : "dest"];
    for (const LabelStyle& s : *side) {
      arr.push_back({{"id", s.id}, {"rank", s.rank}, {"fontSize", scene::canonical(s.font_size)}, {"fill", s.fill}});
    }
  }
  return {{"schemaVersion", scene::kSchemaVersion},
          {"kind", "maptrix"},
          {"canvas", {{"width", scene::canonical(canvas.width)}, {"height", scene::canonical(canvas.height)}}},
          {"ordering", ordering},
          {"transform",
           {{"scale", scene::canonical(scale)},
            {"translate", {scene::canonical(translate.x), scene::canonical(translate.y)}},
            {"portX", scene::canonical(port_x)}}},
          {"colourScale", detail::colour_json(colour)},
          {"labelStyle", labels},
          {"leaders",
           {{"origin", plan_json(*this, origin_leaders, origin_rects, origin_qp)},
            {"dest", plan_json(*this, dest_leaders, dest_rects, dest_qp)}}},
          {"scenes", detail::scenes_json(scenes)}};
}

std::string MapTrixLayout::to_json() const { return json().dump(); }

MapTrixLayout layout_maptrix(const FlowDataset& d, Canvas canvas, const MapTrixParams& params) {
  if (!(params.k > 0.0) || !(params.w >= 0.0) || !(params.leader_stroke_px > 0.0) ||
      !(params.min_port_pitch_px >= 0.0) || !(params.margin_px >= 0.0) || !(canvas.width > 0.0) ||
      !(canvas.height > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid MapTrix parameters");
  }
  const std::vector<std::string> active = d.active_region_ids();
  if (active.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "MapTrix needs at least two active regions",
                std::to_string(active.size()));
  }

  MapTrixLayout out;
  out.canvas = canvas;
  const MapProjection proj = project_regions(d);
  out.map_width = proj.aspect * kMapHeight;
  out.port_x = out.map_width + 1.0 / params.k + kPortGap;
  const double extent_x = out.port_x + 2.0;
  out.scale = std::min((canvas.width - 2 * params.margin_px) / extent_x, (canvas.height - 2 * params.margin_px) / 2.0);
  if (!(out.scale > 0.0)) throw Error(ErrorCode::kInfeasibleGeometry, "canvas too small for the margins");
  out.translate = {(canvas.width - extent_x * out.scale) / 2.0, canvas.height / 2.0};

  const double d_b = params.clearance_px.value_or(3.0 * params.leader_stroke_px) / out.scale;
  const leaderlayout::RouteOptions route{params.k, params.min_port_pitch_px / out.scale, d_b};

  auto sites_for = [&](double dy) {
    std::vector<Site> sites;
    for (const auto& id : active) sites.push_back({id, to_map(proj.region(id).anchor, dy)});
    return sites;
  };
  const PortLine origin_edge{out.port_x, 1.0, 0.0};
  const PortLine dest_edge{out.port_x, 0.0, -1.0};
  const std::vector<Site> origin_sites = sites_for(0.0);
  out.ordering = leaderlayout::compute_ordering(origin_sites, origin_edge, params.k);

  auto run_side = [&](const std::vector<Site>& sites, const PortLine& edge, double dy) {
    SideResult r;
    r.plan = leaderlayout::route_leaders(sites, out.ordering, edge, route);
    for (std::size_t i = 0; i < r.plan.leaders.size(); ++i) {
      const ProjectedRegion& pr = proj.region(r.plan.leaders[i].id);
      std::vector<Ring> rings = pr.polygons[pr.largest];
      for (auto& ring : rings) {
        for (auto& v : ring) v = to_map(v, dy);
      }
      r.rects.push_back(leaderlayout::grow_free_rect(rings, r.plan.leaders[i].site, r.plan, i, d_b));
    }
    if (params.refine) {
      const qprefine::QpProblem qp = qprefine::build_qp(r.plan, r.rects, {params.w, params.target_separation});
      const qprefine::QpSolution sol = qprefine::solve_qp(qp);
      r.stats = {sol.initial_objective, sol.objective, sol.iterations, sol.converged};
      r.plan = qprefine::apply_refinement(r.plan, sol.sites, d_b);
    }
    return r;
  };
  SideResult origin = run_side(origin_sites, origin_edge, 0.0);
  SideResult dest = run_side(sites_for(-1.0), dest_edge, -1.0);
  out.origin_leaders = std::move(origin.plan);
  out.origin_rects = std::move(origin.rects);
  out.origin_qp = origin.stats;
  out.dest_leaders = std::move(dest.plan);
  out.dest_rects = std::move(dest.rects);
  out.dest_qp = dest.stats;

  out.colour = ColourScale(d.min_magnitude(), d.max_magnitude());
  out.origin_labels = label_styles(d, out.ordering, true, params);
  out.dest_labels = label_styles(d, out.ordering, false, params);
  const std::size_t n = out.ordering.size();

  auto px = [&](Vec2 v) { return out.to_px(v); };

  // Maps.
  auto map_scene = [&](bool origin_side) {
    const double dy = origin_side ? 0.0 : -1.0;
    const std::string side = origin_side ? "origin" : "dest";
    Scene s;
    s.id = origin_side ? "origin-map" : "dest-map";
    for (const ProjectedRegion& pr : proj.regions) {
      std::vector<std::vector<Vec2>> rings;
      for (const auto& poly : pr.polygons) {
        for (const auto& ring : poly) {
          std::vector<Vec2> pts;
          pts.reserve(ring.size());
          for (const Vec2& v : ring) pts.push_back(px(to_map(v, dy)));
          rings.push_back(std::move(pts));
        }
      }
      Primitive p = scene::polygon("region:" + side + ":" + pr.id, "region", std::move(rings),
                                   d.is_active(pr.id) ? kActiveFill : kInactiveFill, kRegionStroke, 0.6);
      p.region = pr.id;
      s.items.push_back(std::move(p));
    }
    const LeaderPlan& plan = origin_side ? out.origin_leaders : out.dest_leaders;
    const auto& styles = origin_side ? out.origin_labels : out.dest_labels;
    double max_total = 0.0;
    for (const auto& id : out.ordering) max_total = std::max(max_total, origin_side ? d.total_out(id) : d.total_in(id));
    for (std::size_t i = 0; i < n; ++i) {
      const std::string& id = out.ordering[i];
      const double total = origin_side ? d.total_out(id) : d.total_in(id);
      if (total <= 0.0 || max_total <= 0.0) continue;
      Primitive c = scene::circle("circle:" + side + ":" + id, "total", px(plan.leaders[i].site),
                                  params.max_circle_px * std::sqrt(total / max_total), kTotalFill);
      c.opacity = 0.45;
      c.region = id;
      c.value = total;
      s.items.push_back(std::move(c));
    }
    for (std::size_t i = 0; i < n; ++i) {
      const std::string& id = out.ordering[i];
      Primitive l = scene::label("label:" + side + ":" + id, "region-label", px(plan.leaders[i].site) + Vec2{-4.0, 3.5},
                                 d.region(id).abbr, styles[i].font_size, styles[i].fill, "end");
      l.region = id;
      s.items.push_back(std::move(l));
    }
    if (origin_side) {
      s.items.push_back(scene::label("title:origin", "title", px({0.0, 1.0}) + Vec2{0.0, 2.0}, "Origins", 12.0,
                                     "#252525"));
    } else {
      const Vec2 at = px({0.0, -1.0}) + Vec2{14.0, 12.0};
      s.items.push_back(scene::label("title:dest", "title", at, "Destinations", 12.0, "#252525"));
      // Destination marker: a downward pin left of the title.
      s.items.push_back(scene::polygon("icon:dest", "icon",
                                       {{at + Vec2{-12.0, -10.0}, at + Vec2{-4.0, -10.0}, at + Vec2{-8.0, 0.0}}},
                                       "#252525", "none", 0.0));
    }
    return s;
  };
  out.scenes.push_back(map_scene(true));
  out.scenes.push_back(map_scene(false));

  // Matrix.
  Scene matrix;
  matrix.id = "matrix";
  const double P = out.port_x;
  matrix.items.push_back(scene::polygon("matrix-frame", "frame",
                                        {{px({P, 0.0}), px({P + 1, 1.0}), px({P + 2, 0.0}), px({P + 1, -1.0})}},
                                        "#ffffff", kFrameStroke, 0.8));
  std::vector<std::pair<std::pair<std::size_t, std::size_t>, const oddata::Flow*>> cells;
  for (const auto& f : d.flows()) cells.push_back({{out.index_of(f.origin), out.index_of(f.dest)}, &f});
  std::sort(cells.begin(), cells.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [pos, f] : cells) {
    std::vector<Vec2> poly;
    for (const Vec2& v : out.cell_polygon(pos.first, pos.second)) poly.push_back(px(v));
    matrix.items.push_back(
        detail::cell("cell:" + f->origin + ":" + f->dest, std::move(poly), out.colour, f->magnitude, f->origin, f->dest));
  }
  const double nn = static_cast<double>(n);
  for (std::size_t r = 5; r < n; r += 5) {
    const double t = static_cast<double>(r) / nn;
    const std::string idx = std::to_string(r);
    matrix.items.push_back(
        scene::polyline("sep:row:" + idx, "separator", {px({P + 1 - t, 1 - t}), px({P + 2 - t, -t})}, kFrameStroke, 0.8));
    matrix.items.push_back(
        scene::polyline("sep:col:" + idx, "separator", {px({P + t, -t}), px({P + 1 + t, 1 - t})}, kFrameStroke, 0.8));
  }
  out.scenes.push_back(std::move(matrix));

  // Leaders, extended horizontally from the port to the matrix edge.
  Scene leaders;
  leaders.id = "leaders";
  for (int side = 0; side < 2; ++side) {
    const LeaderPlan& plan = side == 0 ? out.origin_leaders : out.dest_leaders;
    const auto& styles = side == 0 ? out.origin_labels : out.dest_labels;
    const std::string name = side == 0 ? "origin" : "dest";
    for (std::size_t i = 0; i < n; ++i) {
      const Leader& ld = plan.leaders[i];
      const double y = ld.port.y;
      const Vec2 edge = side == 0 ? Vec2{P + y, y} : Vec2{P - y, y};
      Primitive p = scene::polyline("leader:" + name + ":" + ld.id, "leader", {px(ld.site), px(ld.bend), px(edge)},
                                    styles[i].fill, params.leader_stroke_px * (0.5 + 0.5 * rank_weight(styles[i], n)));
      p.kind = scene::Kind::kLeader;
      p.region = ld.id;
      leaders.items.push_back(std::move(p));
    }
  }
  out.scenes.push_back(std::move(leaders));

  Scene legend;
  legend.id = "legend";
  const double bar = std::min(160.0, 0.6 * out.scale);
  detail::colour_key(legend.items, out.colour, px({P + 2.0, 1.0}) + Vec2{-bar, 14.0}, bar, 10.0);
  out.scenes.push_back(std::move(legend));
  return out;
}

FlowDataset apply_request(const FlowDataset& d, const RelayoutRequest& request) {
  FlowDataset out = request.groups.empty() ? d : oddata::aggregate_regions(d, request.groups);
  if (request.filter) out = oddata::filter_by_magnitude(out, request.filter->first, request.filter->second);
  return out;
}

MapTrixLayout relayout(const FlowDataset& d, const RelayoutRequest& request, Canvas canvas,
                       const MapTrixParams& params) {
  return layout_maptrix(apply_request(d, request), canvas, params);
}

}  // namespace odflow::layouts
