#pragma once

// Random leader instances and a brute-force optimum for the refinement QP.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "odflow/qprefine.hpp"
#include "oracles.hpp"

namespace qp_oracle {

using namespace odflow::leaderlayout;
using namespace odflow::qprefine;

inline Ring square(double cx, double cy, double h) {
  return {{cx - h, cy - h}, {cx + h, cy - h}, {cx + h, cy + h}, {cx - h, cy + h}, {cx - h, cy - h}};
}

struct Instance {
  std::vector<Site> sites;
  std::vector<std::vector<Ring>> regions;
  LeaderPlan plan;
  std::vector<FreeRect> rects;
};

inline Instance random_instance(std::mt19937_64& rng, int n, double d_b = 0.005) {
  std::uniform_real_distribution<double> u(0.05, 0.95);
  std::uniform_real_distribution<double> size(0.01, 0.08);
  Instance in;
  for (int i = 0; i < n; ++i) {
    in.sites.push_back({"s" + std::to_string(i), {u(rng), u(rng)}});
    in.regions.push_back({square(in.sites.back().point.x, in.sites.back().point.y, size(rng))});
  }
  const PortLine edge{2.2, 1.0, 0.0};
  const auto ordering = compute_ordering(in.sites, edge, 1.0);
  in.plan = route_leaders(in.sites, ordering, edge, {1.0, 0.0, d_b});
  for (std::size_t i = 0; i < in.plan.leaders.size(); ++i) {
    const std::string& id = in.plan.leaders[i].id;
    const std::size_t src = std::stoul(id.substr(1));
    in.rects.push_back(grow_free_rect(in.regions[src], in.plan.leaders[i].site, in.plan, i, d_b));
  }
  return in;
}

inline std::vector<std::vector<oracle::P>> polylines(const LeaderPlan& plan) {
  std::vector<std::vector<oracle::P>> out;
  for (const Leader& l : plan.leaders) {
    out.push_back({{l.site.x, l.site.y}, {l.bend.x, l.bend.y}, {l.port.x, l.port.y}});
  }
  return out;
}

// Goal recomputed from its definition: sum |s - c|^2 + w sum (d_j - D)^2.
inline double goal_oracle(const QpProblem& p, const std::vector<Vec2>& s) {
  double f = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    f += std::pow(s[i].x - p.initial[i].x, 2) + std::pow(s[i].y - p.initial[i].y, 2);
  }
  for (const SeparationPair& sp : p.pairs) {
    if (!sp.penalized) continue;
    const oracle::P a{s[sp.upper].x, s[sp.upper].y};
    const oracle::P b{s[sp.lower].x, s[sp.lower].y};
    // Separation as point-to-line distance, sign from the side of the line.
    const oracle::P a2{a.x + 1.0, a.y + sp.signed_k};
    const double dist = oracle::point_line_distance(b, a, a2);
    const double side = oracle::orient(a, a2, b) <= 0 ? 1.0 : -1.0;
    f += p.w * std::pow(side * dist - p.D, 2);
  }
  return f;
}

// Coarse-to-fine grid search over the box of the free variables.
inline double grid_search(const QpProblem& p) {
  const int nv = static_cast<int>(p.variables());
  Eigen::VectorXd lo = p.lower, hi = p.upper;
  Eigen::VectorXd best_z = p.start();
  double best = goal_oracle(p, p.sites_at(best_z));
  const int steps = 12;
  for (int level = 0; level < 12; ++level) {
    std::vector<int> idx(nv, 0);
    while (true) {
      Eigen::VectorXd z(nv);
      for (int v = 0; v < nv; ++v) z[v] = lo[v] + (hi[v] - lo[v]) * idx[v] / steps;
      if (p.max_violation(z) <= 1e-12) {
        const double f = goal_oracle(p, p.sites_at(z));
        if (f < best) {
          best = f;
          best_z = z;
        }
      }
      int v = 0;
      while (v < nv && ++idx[v] > steps) idx[v++] = 0;
      if (v == nv) break;
    }
    for (int v = 0; v < nv; ++v) {
      const double half = (hi[v] - lo[v]) / 4.0;
      lo[v] = std::max(p.lower[v], best_z[v] - half);
      hi[v] = std::min(p.upper[v], best_z[v] + half);
    }
  }
  return best;
}

}  // namespace qp_oracle
