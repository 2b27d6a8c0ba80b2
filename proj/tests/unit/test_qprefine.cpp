#include <cmath>
#include <random>

#include "doctest.h"
#include "odflow/error.hpp"
#include "odflow/qprefine.hpp"
#include "oracles.hpp"
#include "qp_oracles.hpp"

using namespace odflow;
using namespace odflow::leaderlayout;
using namespace odflow::qprefine;

using namespace qp_oracle;


TEST_CASE("separation") {
  CHECK(separation({0.3, 0.4}, {0.3, 0.4}, 1.0) == 0.0);
  CHECK(separation({0, 0}, {1, -1}, 1.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  const Vec2 a{0.2, 0.7}, b{0.9, -0.1};
  for (double k : {1.0, 0.5, -2.0}) {
    const double t = 0.37;
    CHECK(separation({a.x + t, a.y + t * k}, {b.x + t, b.y + t * k}, k) ==
          doctest::Approx(separation(a, b, k)).epsilon(1e-13));
  }

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::uniform_real_distribution<double> slope(0.1, 4.0);
  for (int i = 0; i < 1000; ++i) {
    const Vec2 p{u(rng), u(rng)}, q{u(rng), u(rng)};
    const double k = slope(rng) * (i % 2 ? 1.0 : -1.0);
    const double oracle_d = oracle::point_line_distance({q.x, q.y}, {p.x, p.y}, {p.x + 1.0, p.y + k});
    CHECK(std::abs(std::abs(separation(p, q, k)) - oracle_d) < 1e-9);
  }
}

TEST_CASE("dense solver basics") {
  // Projection of t = (2, -3) onto the box [0,1]^2.
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(2, 2);
  Eigen::VectorXd g(2);
  g << -2.0, 3.0;
  const Eigen::MatrixXd A(0, 2);
  const Eigen::VectorXd b(0);
  Eigen::VectorXd lo(2), hi(2), z0(2);
  lo << 0, 0;
  hi << 1, 1;
  z0 << 0.5, 0.5;
  auto r = solve_dense_qp(H, g, A, b, lo, hi, z0);
  CHECK(r.converged);
  CHECK(r.z[0] == doctest::Approx(1.0));
  CHECK(r.z[1] == doctest::Approx(0.0));

  // Projection of the origin onto x + y >= 1 is (0.5, 0.5).
  Eigen::MatrixXd A1(1, 2);
  A1 << 1, 1;
  Eigen::VectorXd b1(1);
  b1 << 1;
  Eigen::VectorXd inf = Eigen::VectorXd::Constant(2, std::numeric_limits<double>::infinity());
  z0 << 2.0, 0.0;
  r = solve_dense_qp(H, Eigen::VectorXd::Zero(2), A1, b1, -inf, inf, z0);
  CHECK(r.converged);
  CHECK(r.z[0] == doctest::Approx(0.5));
  CHECK(r.z[1] == doctest::Approx(0.5));

  // The same constraint with x <= 0.3 for target (0.25, 0): the unbounded
  // projection (0.625, 0.375) is cut off, so both end up active.
  Eigen::VectorXd g2(2);
  g2 << -0.25, 0.0;
  Eigen::VectorXd hi2(2);
  hi2 << 0.3, 10;
  z0 << 0.3, 0.9;
  r = solve_dense_qp(H, g2, A1, b1, -inf, hi2, z0);
  CHECK(r.converged);
  CHECK(r.z[0] == doctest::Approx(0.3));
  CHECK(r.z[1] == doctest::Approx(0.7));

  // Starting on the bound that is not active at the optimum.
  Eigen::VectorXd hi3(2);
  hi3 << 1.0, 1.0;
  z0 << 1.0, 1.0;
  r = solve_dense_qp(H, g2, A1, b1, -inf, hi3, z0);
  CHECK(r.converged);
  CHECK(r.z[0] == doctest::Approx(0.625));
  CHECK(r.z[1] == doctest::Approx(0.375));
}

TEST_CASE("trivial QPs") {
  std::mt19937_64 rng(10);
  Instance one = random_instance(rng, 1);
  const QpProblem p1 = build_qp(one.plan, one.rects, {});
  CHECK(p1.pairs.empty());
  const QpSolution s1 = solve_qp(p1);
  CHECK(s1.objective == doctest::Approx(0.0));
  CHECK(s1.sites[0].x == one.plan.leaders[0].site.x);
  CHECK(s1.sites[0].y == one.plan.leaders[0].site.y);

  Instance many = random_instance(rng, 16);
  QpParams zero_w;
  zero_w.w = 0.0;
  const QpSolution s0 = solve_qp(build_qp(many.plan, many.rects, zero_w));
  CHECK(s0.objective == doctest::Approx(0.0).epsilon(1e-12));
  for (std::size_t i = 0; i < s0.sites.size(); ++i) {
    CHECK(s0.sites[i].x == doctest::Approx(many.plan.leaders[i].site.x).epsilon(1e-12));
    CHECK(s0.sites[i].y == doctest::Approx(many.plan.leaders[i].site.y).epsilon(1e-12));
  }
}

TEST_CASE("squeezed parallel leaders spread out") {
  // Two up leaders whose diagonals are 0.1 * D apart, each with slack.
  LeaderPlan plan;
  plan.k = 1.0;
  plan.edge = PortLine{3.0, 1.0, 0.0};
  const std::vector<Site> sites{{"a", {0.50, 0.30}}, {"b", {0.52, 0.24}}};
  plan = route_leaders(sites, std::vector<std::string>{"a", "b"}, plan.edge, {1.0, 0.0, 0.0});
  REQUIRE(plan.bands.size() == 1);
  const double d_init = separation(sites[0].point, sites[1].point, 1.0);
  std::vector<FreeRect> rects;
  for (const Site& s : sites) rects.push_back({Rect{s.point.x - 0.1, s.point.y - 0.1, s.point.x + 0.1, s.point.y + 0.1}});
  QpParams params;
  params.w = 50.0;
  params.target_separation = 10.0 * d_init;
  const QpProblem p = build_qp(plan, rects, params);
  CHECK(p.variables() == 4);
  const QpSolution s = solve_qp(p);
  CHECK(s.converged);
  CHECK(s.objective < s.initial_objective);
  REQUIRE(s.separations.size() == 1);
  CHECK(s.separations[0] > d_init);
  const double grid = grid_search(p);
  CHECK(s.objective <= grid + 1e-9);
  CHECK(grid - s.objective < 1e-2);
  CHECK(std::abs(goal_oracle(p, s.sites) - s.objective) < 1e-9);
}

TEST_CASE("binding ordering constraint keeps leaders apart") {
  // The rectangles force the two diagonals towards each other; the ordering
  // constraint must hold them at d >= eps.
  const std::vector<Site> sites{{"a", {0.50, 0.10}}, {"b", {0.60, 0.15}}};
  const PortLine edge{3.0, 1.0, 0.0};
  const LeaderPlan plan = route_leaders(sites, std::vector<std::string>{"a", "b"}, edge, {1.0, 0.0, 0.0});
  REQUIRE(plan.bands.size() == 1);
  std::vector<FreeRect> rects{{Rect{0.5, 0.05, 0.7, 0.12}}, {Rect{0.45, 0.1, 0.6, 0.2}}};
  QpParams params;
  params.epsilon = 1e-3;
  // A negative separation target pulls the diagonals onto each other.
  params.w = 100.0;
  params.target_separation = -1.0;
  const QpProblem p = build_qp(plan, rects, params);
  const QpSolution s = solve_qp(p);
  REQUIRE(s.separations.size() == 1);
  CHECK(s.separations[0] >= params.epsilon - 1e-9);
  CHECK(s.separations[0] < 0.01);
  const LeaderPlan refined = apply_refinement(plan, s.sites);
  CHECK(oracle::count_crossings(polylines(refined)) == 0);
}

TEST_CASE("solver matches grid search on small instances") {
  std::mt19937_64 rng(2024);
  int checked = 0;
  for (int trial = 0; trial < 60 && checked < 25; ++trial) {
    Instance in = random_instance(rng, 6, 0.0);
    // Keep two neighbouring leaders free, pin the rest: <= 4 variables.
    if (in.plan.leaders.size() < 2) continue;
    std::size_t first = 0;
    bool found = false;
    for (std::size_t i = 0; i + 1 < in.plan.leaders.size(); ++i) {
      if (in.plan.leaders[i].band == in.plan.leaders[i + 1].band) {
        first = i;
        found = true;
        break;
      }
    }
    if (!found) continue;
    for (std::size_t i = 0; i < in.rects.size(); ++i) {
      if (i != first && i != first + 1) {
        in.rects[i].collapsed = true;
        in.rects[i].rect = Rect{in.plan.leaders[i].site.x, in.plan.leaders[i].site.y, in.plan.leaders[i].site.x,
                                in.plan.leaders[i].site.y};
      }
    }
    QpParams params;
    params.w = 5.0;
    params.target_separation = 0.2;
    const QpProblem p = build_qp(in.plan, in.rects, params);
    if (p.variables() != 4) continue;
    const QpSolution s = solve_qp(p);
    CHECK(s.converged);
    CHECK(s.objective <= s.initial_objective);
    const double grid = grid_search(p);
    CHECK(s.objective <= grid + 1e-9);
    CHECK(grid - s.objective < 1e-2);
    ++checked;
  }
  CHECK(checked >= 20);
}

TEST_CASE("random refinements stay feasible and crossing-free") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 4 + static_cast<int>(rng() % 48);
    const Instance in = random_instance(rng, n);
    const QpProblem p = build_qp(in.plan, in.rects, {});
    const QpSolution s = solve_qp(p);
    CHECK(s.converged);
    CHECK(s.objective <= s.initial_objective);
    Eigen::VectorXd z(p.variables());
    for (std::size_t i = 0; i < p.sites; ++i) {
      if (p.var_x[i] >= 0) z[p.var_x[i]] = s.sites[i].x;
      if (p.var_y[i] >= 0) z[p.var_y[i]] = s.sites[i].y;
    }
    CHECK(p.max_violation(z) <= 1e-8);
    for (std::size_t j = 0; j < p.pairs.size(); ++j) {
      const auto& sp = p.pairs[j];
      CHECK(std::abs(s.separations[j] - separation(s.sites[sp.upper], s.sites[sp.lower], sp.signed_k)) < 1e-12);
    }
    const LeaderPlan refined = apply_refinement(in.plan, s.sites);
    CHECK(oracle::count_crossings(polylines(refined)) == 0);
    CHECK(refined.ordering == in.plan.ordering);
  }
}

TEST_CASE("QP dump is deterministic") {
  std::mt19937_64 rng(4);
  const Instance in = random_instance(rng, 5);
  const QpProblem p = build_qp(in.plan, in.rects, {});
  const std::string dump = p.to_json();
  CHECK(dump.find("\"H\"") != std::string::npos);
  CHECK(dump.find("\"constraints\"") != std::string::npos);
  CHECK(dump == build_qp(in.plan, in.rects, {}).to_json());
}
