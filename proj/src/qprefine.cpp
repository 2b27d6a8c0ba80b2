#include "odflow/qprefine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"
#include "odflow/error.hpp"

namespace odflow::qprefine {

namespace {

using leaderlayout::Leader;
using leaderlayout::Orientation;

// Linear form over the QP variables plus a constant from fixed sites.
struct Affine {
  std::vector<std::pair<int, double>> terms;
  double offset = 0.0;
};

Affine separation_form(const QpProblem& p, std::size_t a, std::size_t b, double sk) {
  const double s = std::sqrt(1.0 + sk * sk);
  Affine f;
  auto add = [&](int var, double fixed_value, double coef) {
    if (var >= 0) {
      f.terms.emplace_back(var, coef);
    } else {
      f.offset += coef * fixed_value;
    }
  };
  add(p.var_x[a], p.initial[a].x, -sk / s);
  add(p.var_y[a], p.initial[a].y, 1.0 / s);
  add(p.var_x[b], p.initial[b].x, sk / s);
  add(p.var_y[b], p.initial[b].y, -1.0 / s);
  return f;
}

void raise_lower(QpProblem& p, int var, double value) {
  if (var >= 0) p.lower[var] = std::max(p.lower[var], value);
}

void drop_upper(QpProblem& p, int var, double value) {
  if (var >= 0) p.upper[var] = std::min(p.upper[var], value);
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

double separation(Vec2 a, Vec2 b, double k) {
  return (k * b.x - b.y - k * a.x + a.y) / std::sqrt(k * k + 1.0);
}

Eigen::VectorXd QpProblem::start() const {
  Eigen::VectorXd z(static_cast<Eigen::Index>(variables()));
  for (std::size_t i = 0; i < sites; ++i) {
    if (var_x[i] >= 0) z[var_x[i]] = initial[i].x;
    if (var_y[i] >= 0) z[var_y[i]] = initial[i].y;
  }
  return z;
}

double QpProblem::objective(const Eigen::VectorXd& z) const { return 0.5 * z.dot(H * z) + g.dot(z) + c; }

std::vector<Vec2> QpProblem::sites_at(const Eigen::VectorXd& z) const {
  std::vector<Vec2> out = initial;
  for (std::size_t i = 0; i < sites; ++i) {
    if (var_x[i] >= 0) out[i].x = z[var_x[i]];
    if (var_y[i] >= 0) out[i].y = z[var_y[i]];
  }
  return out;
}

double QpProblem::max_violation(const Eigen::VectorXd& z) const {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    worst = std::max({worst, lower[i] - z[i], z[i] - upper[i]});
  }
  for (const LinearConstraint& con : constraints) {
    double v = 0.0;
    for (const auto& [var, coef] : con.terms) v += coef * z[var];
    worst = std::max(worst, con.lower - v);
  }
  return worst;
}

std::string QpProblem::to_json() const {
  nlohmann::json j;
  j["k"] = k;
  j["w"] = w;
  j["D"] = D;
  j["epsilon"] = epsilon;
  j["constant"] = c;
  nlohmann::json vars = nlohmann::json::array();
  for (std::size_t i = 0; i < sites; ++i) {
    for (int axis = 0; axis < 2; ++axis) {
      const int v = axis == 0 ? var_x[i] : var_y[i];
      if (v < 0) continue;
      vars.push_back({{"index", v},
                      {"site", i},
                      {"axis", axis == 0 ? "x" : "y"},
                      {"initial", axis == 0 ? initial[i].x : initial[i].y},
                      {"lower", lower[v]},
                      {"upper", upper[v]}});
    }
  }
  std::sort(vars.begin(), vars.end(),
            [](const nlohmann::json& a, const nlohmann::json& b) { return a["index"] < b["index"]; });
  j["variables"] = vars;
  nlohmann::json hessian = nlohmann::json::array();
  for (Eigen::Index r = 0; r < H.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index col = 0; col < H.cols(); ++col) row.push_back(H(r, col));
    hessian.push_back(row);
  }
  j["H"] = hessian;
  j["g"] = std::vector<double>(g.data(), g.data() + g.size());
  nlohmann::json cons = nlohmann::json::array();
  for (const LinearConstraint& con : constraints) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& [var, coef] : con.terms) terms.push_back({var, coef});
    cons.push_back({{"kind", con.kind}, {"terms", terms}, {"lower", con.lower}});
  }
  j["constraints"] = cons;
  nlohmann::json pairs_json = nlohmann::json::array();
  for (const SeparationPair& sp : pairs) {
    pairs_json.push_back({{"upper", sp.upper},
                          {"lower", sp.lower},
                          {"signedK", sp.signed_k},
                          {"initial", sp.initial},
                          {"penalized", sp.penalized}});
  }
  j["pairs"] = pairs_json;
  return j.dump(1);
}

QpProblem build_qp(const LeaderPlan& plan, std::span<const FreeRect> rects, const QpParams& params) {
  const std::size_t n = plan.leaders.size();
  if (rects.size() != n) throw Error(ErrorCode::kInvalidArgument, "one free rectangle per leader required");
  if (!(params.w >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "w must be non-negative");

  QpProblem p;
  p.sites = n;
  p.k = plan.k;
  p.w = params.w;
  p.epsilon = params.epsilon;
  p.var_x.assign(n, -1);
  p.var_y.assign(n, -1);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    p.initial.push_back(plan.leaders[i].site);
    if (!rects[i].collapsed) {
      p.var_x[i] = next++;
      p.var_y[i] = next++;
    }
  }
  p.lower = Eigen::VectorXd::Constant(next, -std::numeric_limits<double>::infinity());
  p.upper = Eigen::VectorXd::Constant(next, std::numeric_limits<double>::infinity());

  // Boxes: free rectangle, orientation side, band slab.
  for (std::size_t i = 0; i < n; ++i) {
    const Leader& l = plan.leaders[i];
    if (p.var_x[i] < 0) continue;
    const int vx = p.var_x[i];
    const int vy = p.var_y[i];
    p.lower[vx] = rects[i].rect.left;
    p.upper[vx] = rects[i].rect.right;
    p.lower[vy] = rects[i].rect.bottom;
    p.upper[vy] = rects[i].rect.top;
    if (l.orientation == Orientation::kUp) {
      drop_upper(p, vy, l.port.y);
    } else {
      raise_lower(p, vy, l.port.y);
    }
    if (l.band > 0) {
      const auto& line = plan.band_lines[l.band - 1];
      drop_upper(p, vy, line.y - line.clearance);
    }
    if (l.band + 1 < plan.bands.size()) {
      const auto& line = plan.band_lines[l.band];
      raise_lower(p, vy, line.y + line.clearance);
    }
  }

  // Ordering within bands.
  for (const auto& band : plan.bands) {
    const bool up = band.orientation == Orientation::kUp;
    const double sk = up ? plan.k : -plan.k;
    std::vector<bool> vertical_link;  // link (i, i+1) relies on vertical disjointness
    for (std::size_t i = band.first; i < band.last; ++i) {
      SeparationPair sp{i, i + 1, sk, separation(p.initial[i], p.initial[i + 1], sk), true};
      if (sp.initial > 0.0) {
        p.pairs.push_back(sp);
        vertical_link.push_back(false);
      } else {
        sp.penalized = false;
        p.pairs.push_back(sp);
        vertical_link.push_back(true);
      }
    }
    auto add_order = [&](std::size_t a, std::size_t b, bool adjacent) {
      const Leader& la = plan.leaders[a];
      const Leader& lb = plan.leaders[b];
      const double d0 = separation(p.initial[a], p.initial[b], sk);
      // Vertical disjointness: up bands need site(a) above port(b), down
      // bands need site(b) below port(a).
      const double vertical_gap = up ? la.site.y - lb.port.y : la.port.y - lb.site.y;
      const bool use_separation = adjacent ? d0 > 0.0 : !(vertical_gap > 0.0) && d0 > 0.0;
      if (use_separation) {
        const Affine f = separation_form(p, a, b, sk);
        if (f.terms.empty()) return;
        p.constraints.push_back({f.terms, std::min(p.epsilon, d0) - f.offset, "separation"});
      } else if (up) {
        raise_lower(p, p.var_y[a], lb.port.y + std::min(p.epsilon, vertical_gap));
      } else {
        drop_upper(p, p.var_y[b], la.port.y - std::min(p.epsilon, vertical_gap));
      }
    };
    for (std::size_t i = band.first; i < band.last; ++i) add_order(i, i + 1, true);
    for (std::size_t a = band.first; a <= band.last; ++a) {
      bool chain_has_vertical = false;
      for (std::size_t b = a + 1; b <= band.last; ++b) {
        chain_has_vertical = chain_has_vertical || vertical_link[b - 1 - band.first];
        if (b > a + 1 && chain_has_vertical) add_order(a, b, false);
      }
    }
  }

  // Diagonals must end before the port line.
  for (std::size_t i = 0; i < n; ++i) {
    if (p.var_x[i] < 0) continue;
    const Leader& l = plan.leaders[i];
    const int vx = p.var_x[i];
    const int vy = p.var_y[i];
    const double sy = l.orientation == Orientation::kUp ? 1.0 : -1.0;
    // x + sy * (Y - y) / k <= P
    const double worst_y = sy > 0 ? p.lower[vy] : p.upper[vy];
    if (p.upper[vx] + sy * (l.port.y - worst_y) / plan.k > plan.edge.x) {
      p.constraints.push_back({{{vx, -1.0}, {vy, sy / plan.k}}, sy * l.port.y / plan.k - plan.edge.x, "bend"});
    }
  }

  // Never exclude the start point because of rounding.
  for (std::size_t i = 0; i < n; ++i) {
    if (p.var_x[i] < 0) continue;
    for (const auto& [v, c0] : {std::pair{p.var_x[i], p.initial[i].x}, std::pair{p.var_y[i], p.initial[i].y}}) {
      p.lower[v] = std::min(p.lower[v], c0);
      p.upper[v] = std::max(p.upper[v], c0);
    }
  }

  double max_d = 0.0;
  for (const SeparationPair& sp : p.pairs) {
    if (sp.penalized) max_d = std::max(max_d, sp.initial);
  }
  p.D = params.target_separation.value_or(max_d);

  // PCentre: sum |z - c|^2.
  const Eigen::VectorXd c0 = p.start();
  p.H = 2.0 * Eigen::MatrixXd::Identity(next, next);
  p.g = -2.0 * c0;
  p.c = c0.squaredNorm();
  // PSep: w * sum (a.z + e - D)^2.
  for (const SeparationPair& sp : p.pairs) {
    if (!sp.penalized || p.w == 0.0) continue;
    const Affine f = separation_form(p, sp.upper, sp.lower, sp.signed_k);
    const double r = f.offset - p.D;
    for (const auto& [vi, ai] : f.terms) {
      for (const auto& [vj, aj] : f.terms) p.H(vi, vj) += 2.0 * p.w * ai * aj;
      p.g[vi] += 2.0 * p.w * r * ai;
    }
    p.c += p.w * r * r;
  }
  return p;
}

DenseQpResult solve_dense_qp(const Eigen::MatrixXd& H, const Eigen::VectorXd& g, const Eigen::MatrixXd& A,
                             const Eigen::VectorXd& b, const Eigen::VectorXd& lower,
                             const Eigen::VectorXd& upper, const Eigen::VectorXd& z0,
                             const SolverOptions& options) {
  const Eigen::Index n = z0.size();
  const Eigen::Index m = A.rows();
  DenseQpResult result;
  result.z = z0;
  Eigen::VectorXd& z = result.z;
  if (n == 0) {
    result.converged = true;
    return result;
  }

  std::vector<int> bound_state(n, 0);  // -1 lower, +1 upper, 0 free
  std::vector<bool> in_working(m, false);
  std::vector<Eigen::Index> working;   // active general constraints

  const double scale = 1.0 + z0.lpNorm<Eigen::Infinity>();
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    result.iterations = iter + 1;
    const Eigen::VectorXd grad = H * z + g;
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (bound_state[i] == 0) free.push_back(i);
    }
    const Eigen::Index nf = static_cast<Eigen::Index>(free.size());
    const Eigen::Index ne = static_cast<Eigen::Index>(working.size());

    Eigen::MatrixXd Hff(nf, nf);
    Eigen::VectorXd gf(nf);
    Eigen::MatrixXd Aef(ne, nf);
    for (Eigen::Index r = 0; r < nf; ++r) {
      gf[r] = grad[free[r]];
      for (Eigen::Index c = 0; c < nf; ++c) Hff(r, c) = H(free[r], free[c]);
      for (Eigen::Index e = 0; e < ne; ++e) Aef(e, r) = A(working[e], free[r]);
    }

    Eigen::VectorXd pf = Eigen::VectorXd::Zero(nf);
    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(ne);
    if (nf > 0) {
      const Eigen::LLT<Eigen::MatrixXd> llt(Hff);
      const Eigen::VectorXd hg = llt.solve(gf);
      if (ne == 0) {
        pf = -hg;
      } else {
        const Eigen::MatrixXd Y = llt.solve(Aef.transpose());
        const Eigen::MatrixXd S = Aef * Y;
        lambda = S.completeOrthogonalDecomposition().solve(Aef * hg);
        pf = Y * lambda - hg;
      }
    }
    // With every variable pinned the bounds alone carry the multipliers, so
    // lambda = 0 is a valid choice.

    Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
    for (Eigen::Index r = 0; r < nf; ++r) p[free[r]] = pf[r];

    if (p.lpNorm<Eigen::Infinity>() <= 1e-13 * scale) {
      // Stationary on the working set: check multiplier signs.
      const double tol = 1e-10 * std::max(1.0, grad.lpNorm<Eigen::Infinity>());
      Eigen::VectorXd residual = grad;
      for (Eigen::Index e = 0; e < ne; ++e) residual -= lambda[e] * A.row(working[e]).transpose();
      double most_negative = -tol;
      Eigen::Index drop_general = -1;
      Eigen::Index drop_bound = -1;
      for (Eigen::Index e = 0; e < ne; ++e) {
        if (lambda[e] < most_negative) {
          most_negative = lambda[e];
          drop_general = e;
        }
      }
      for (Eigen::Index i = 0; i < n; ++i) {
        if (bound_state[i] == 0) continue;
        const double mu = bound_state[i] < 0 ? residual[i] : -residual[i];
        if (mu < most_negative) {
          most_negative = mu;
          drop_bound = i;
          drop_general = -1;
        }
      }
      if (drop_bound >= 0) {
        bound_state[drop_bound] = 0;
      } else if (drop_general >= 0) {
        in_working[working[drop_general]] = false;
        working.erase(working.begin() + drop_general);
      } else {
        result.converged = true;
        return result;
      }
      continue;
    }

    // Ratio test.
    double alpha = 1.0;
    Eigen::Index block_bound = -1;
    int block_side = 0;
    Eigen::Index block_general = -1;
    const double tiny = 1e-15 * scale;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (bound_state[i] != 0) continue;
      if (p[i] < -tiny && std::isfinite(lower[i])) {
        const double t = std::max(0.0, (lower[i] - z[i]) / p[i]);
        if (t < alpha) {
          alpha = t;
          block_bound = i;
          block_side = -1;
          block_general = -1;
        }
      } else if (p[i] > tiny && std::isfinite(upper[i])) {
        const double t = std::max(0.0, (upper[i] - z[i]) / p[i]);
        if (t < alpha) {
          alpha = t;
          block_bound = i;
          block_side = 1;
          block_general = -1;
        }
      }
    }
    for (Eigen::Index j = 0; j < m; ++j) {
      if (in_working[j]) continue;
      const double ap = A.row(j).dot(p);
      if (ap < -tiny * A.row(j).lpNorm<Eigen::Infinity>()) {
        const double t = std::max(0.0, (b[j] - A.row(j).dot(z)) / ap);
        if (t < alpha) {
          alpha = t;
          block_general = j;
          block_bound = -1;
        }
      }
    }
    z += alpha * p;
    if (block_bound >= 0) {
      bound_state[block_bound] = block_side;
      z[block_bound] = block_side < 0 ? lower[block_bound] : upper[block_bound];
    } else if (block_general >= 0) {
      in_working[block_general] = true;
      working.push_back(block_general);
    }
  }
  return result;
}

QpSolution solve_qp(const QpProblem& p, const SolverOptions& options) {
  const Eigen::Index n = static_cast<Eigen::Index>(p.variables());
  const Eigen::VectorXd z0 = p.start();
  QpSolution sol;
  sol.initial_objective = p.objective(z0);
  sol.converged = true;
  Eigen::VectorXd z = z0;

  // Independent components: variables coupled through H or a constraint.
  UnionFind uf(static_cast<int>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (p.H(i, j) != 0.0) uf.unite(static_cast<int>(i), static_cast<int>(j));
    }
  }
  for (const LinearConstraint& con : p.constraints) {
    for (std::size_t t = 1; t < con.terms.size(); ++t) uf.unite(con.terms[0].first, con.terms[t].first);
  }
  std::vector<std::vector<int>> components;
  std::vector<int> component_of(n, -1);
  for (int i = 0; i < static_cast<int>(n); ++i) {
    const int root = uf.find(i);
    if (component_of[root] < 0) {
      component_of[root] = static_cast<int>(components.size());
      components.emplace_back();
    }
    components[component_of[root]].push_back(i);
  }

  for (const std::vector<int>& vars : components) {
    const Eigen::Index cn = static_cast<Eigen::Index>(vars.size());
    std::vector<int> local(n, -1);
    for (Eigen::Index i = 0; i < cn; ++i) local[vars[i]] = static_cast<int>(i);
    Eigen::MatrixXd Hc(cn, cn);
    Eigen::VectorXd gc(cn), lc(cn), uc(cn), zc(cn);
    for (Eigen::Index i = 0; i < cn; ++i) {
      for (Eigen::Index j = 0; j < cn; ++j) Hc(i, j) = p.H(vars[i], vars[j]);
      gc[i] = p.g[vars[i]];
      lc[i] = p.lower[vars[i]];
      uc[i] = p.upper[vars[i]];
      zc[i] = z0[vars[i]];
    }
    std::vector<const LinearConstraint*> rows;
    for (const LinearConstraint& con : p.constraints) {
      if (!con.terms.empty() && local[con.terms[0].first] >= 0) rows.push_back(&con);
    }
    Eigen::MatrixXd Ac = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), cn);
    Eigen::VectorXd bc(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (const auto& [var, coef] : rows[r]->terms) Ac(static_cast<Eigen::Index>(r), local[var]) += coef;
      bc[static_cast<Eigen::Index>(r)] = rows[r]->lower;
    }
    const DenseQpResult part = solve_dense_qp(Hc, gc, Ac, bc, lc, uc, zc, options);
    sol.iterations += part.iterations;
    sol.converged = sol.converged && part.converged;
    for (Eigen::Index i = 0; i < cn; ++i) z[vars[i]] = part.z[i];
  }

  // Clip rounding drift back into the boxes.
  for (Eigen::Index i = 0; i < n; ++i) z[i] = std::clamp(z[i], p.lower[i], p.upper[i]);
  if (p.max_violation(z) > options.feasibility_tolerance) {
    z = z0;
    sol.converged = false;
  } else if (!(p.objective(z) <= sol.initial_objective)) {
    z = z0;  // no descent beyond rounding noise
  }
  sol.objective = p.objective(z);
  sol.sites = p.sites_at(z);
  for (const SeparationPair& sp : p.pairs) {
    sol.separations.push_back(separation(sol.sites[sp.upper], sol.sites[sp.lower], sp.signed_k));
  }
  return sol;
}

LeaderPlan apply_refinement(const LeaderPlan& plan, std::span<const Vec2> sites, double d_lc) {
  if (sites.size() != plan.leaders.size()) {
    throw Error(ErrorCode::kInvalidArgument, "one refined site per leader required");
  }
  std::vector<leaderlayout::Site> moved;
  for (std::size_t i = 0; i < sites.size(); ++i) moved.push_back({plan.leaders[i].id, sites[i]});
  return leaderlayout::route_leaders(moved, plan.ordering, plan.edge, {plan.k, 0.0, d_lc});
}

}  // namespace odflow::qprefine
