#pragma once

// Quadratic-program refinement of connection sites.
//
// Goal: PCentre + w * PSep, where PCentre sums squared site displacements
// and PSep sums (d_j - D)^2 over adjacent, similarly oriented leaders. The
// separation d_j between the support lines of two parallel diagonals is
//
//   d_j = (k x_{j+1} - y_{j+1} - k x_j + y_j) / sqrt(k^2 + 1)
//
// with k taken as +k in up bands and -k in down bands. d_j is linear in the
// site coordinates, so it is substituted rather than kept as a variable.
//
// Hard constraints keep the refined leaders crossing-free:
//   * x within the free rectangle; y within the free rectangle, on the
//     port side of the site's orientation, and inside the band's slab
//     between its band lines (less their clearance);
//   * d_j >= eps for adjacent pairs in a band (or the vertical disjointness
//     bound for pairs that were separated vertically to begin with).

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "odflow/leaderlayout.hpp"

namespace odflow::qprefine {

using leaderlayout::FreeRect;
using leaderlayout::LeaderPlan;
using planar::Vec2;

// Signed perpendicular distance between the slope-k lines through a and b.
double separation(Vec2 a, Vec2 b, double k);

struct QpParams {
  double w = 1.0;
  std::optional<double> target_separation;  // D; defaults to the max initial d_j
  double epsilon = 1e-6;                    // lower bound on d_j
};

// a . z >= lower
struct LinearConstraint {
  std::vector<std::pair<int, double>> terms;
  double lower = 0.0;
  std::string kind;  // "separation", "vertical", "bend"
};

// Adjacent same-band pair carrying a PSep term: d = a . z + offset.
struct SeparationPair {
  std::size_t upper = 0;  // leader index
  std::size_t lower = 0;
  double signed_k = 1.0;
  double initial = 0.0;
  bool penalized = true;
};

struct QpProblem {
  std::size_t sites = 0;
  std::vector<int> var_x;  // variable index per site, -1 when fixed
  std::vector<int> var_y;
  std::vector<Vec2> initial;  // c_i, also the feasible start
  Eigen::VectorXd lower;      // per-variable bounds
  Eigen::VectorXd upper;
  std::vector<LinearConstraint> constraints;
  std::vector<SeparationPair> pairs;
  double k = 1.0;
  double w = 1.0;
  double D = 0.0;
  double epsilon = 0.0;

  // objective(z) = 0.5 z'Hz + g'z + c
  Eigen::MatrixXd H;
  Eigen::VectorXd g;
  double c = 0.0;

  std::size_t variables() const { return static_cast<std::size_t>(lower.size()); }
  Eigen::VectorXd start() const;
  double objective(const Eigen::VectorXd& z) const;
  std::vector<Vec2> sites_at(const Eigen::VectorXd& z) const;
  double max_violation(const Eigen::VectorXd& z) const;

  // Debug dump of goal matrices, bounds and constraints.
  std::string to_json() const;
};

QpProblem build_qp(const LeaderPlan& plan, std::span<const FreeRect> rects, const QpParams& params);

struct SolverOptions {
  int max_iterations = 2000;
  double feasibility_tolerance = 1e-9;
};

struct QpSolution {
  std::vector<Vec2> sites;
  std::vector<double> separations;  // one per SeparationPair
  double objective = 0.0;
  double initial_objective = 0.0;
  int iterations = 0;
  bool converged = false;  // false: iteration cap hit, best feasible iterate
};

QpSolution solve_qp(const QpProblem& p, const SolverOptions& options = {});

// Dense convex QP: min 0.5 z'Hz + g'z  s.t.  lower <= z <= upper, A z >= b,
// by a primal active-set method from the feasible point z0. H must be
// positive definite.
struct DenseQpResult {
  Eigen::VectorXd z;
  int iterations = 0;
  bool converged = false;
};

DenseQpResult solve_dense_qp(const Eigen::MatrixXd& H, const Eigen::VectorXd& g, const Eigen::MatrixXd& A,
                             const Eigen::VectorXd& b, const Eigen::VectorXd& lower,
                             const Eigen::VectorXd& upper, const Eigen::VectorXd& z0,
                             const SolverOptions& options = {});

// Re-routes the plan's leaders from the refined sites, keeping the ordering.
LeaderPlan apply_refinement(const LeaderPlan& plan, std::span<const Vec2> sites, double d_lc = 0.0);

}  // namespace odflow::qprefine
