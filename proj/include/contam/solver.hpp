#pragma once

#include <optional>
#include <span>
#include <vector>

#include "contam/distributions.hpp"

namespace contam {

inline constexpr double kDefaultSolverTolerance = 1e-10;
inline constexpr int kDefaultMaxIterations = 10000;

struct SolverOptions {
  double tolerance = kDefaultSolverTolerance;  // on per-iteration objective decrease
  int max_iterations = kDefaultMaxIterations;
};

// The set of distributions reachable by discarding an alpha fraction of the
// empirical mass: P in the simplex with P_i <= upper_i = Phat_i / (1 - alpha).
struct FeasibleBox {
  std::vector<double> upper;
  double alpha = 0.0;

  static FeasibleBox from_empirical(const Distribution& empirical, double alpha);
};

// Lagrange multipliers of the box constraints (lambda) and of the simplex
// equality (nu) for the singleton problem, or for the final inner problem of
// the alternating solvers.
struct DualCertificate {
  std::vector<double> lambda;
  double nu = 0.0;
};

struct SolveResult {
  double objective = 0.0;
  Distribution p_star;
  Distribution q_star;
  std::optional<std::vector<double>> mixture_weights;
  std::optional<DualCertificate> duals;
  int iterations = 0;
  bool converged = true;
  // Objective after each alternating iteration; empty for the exact solvers.
  std::vector<double> trace;
};

// Exact minimizer of D(P||Q) over the box-constrained simplex:
// P_i = min(upper_i, c * Q_i), level c chosen so the mass sums to one.
struct WaterFill {
  std::vector<double> p;
  std::vector<bool> active;  // box constraint binding
  double level = 0.0;
  bool feasible = true;
};

WaterFill water_fill(std::span<const double> upper, std::span<const double> q);

SolveResult solve(const EmpiricalCounts& counts, const ModelSet& model, double alpha,
                  const SolverOptions& options = {});

SolveResult solve_singleton(const EmpiricalCounts& counts, const Distribution& q0, double alpha);

// Closed-form optimum valid for alpha in
// [1 - Phat_l - (Phat_k/Q_k)(1 - Q_l), kappa(Phat||Q)], where l is the unique
// argmin of Phat_i/Q_i and k the runner-up. Absent outside that interval or
// when the minimum ratio is tied.
std::optional<SolveResult> closed_form_singleton(const EmpiricalCounts& counts,
                                                 const Distribution& q0, double alpha);

struct ClosedFormInterval {
  double lower;
  double upper;
};
std::optional<ClosedFormInterval> closed_form_interval(const Distribution& empirical,
                                                       const Distribution& q0);

SolveResult solve_mixture(const EmpiricalCounts& counts, std::span<const Distribution> components,
                          double alpha, const SolverOptions& options = {});

SolveResult solve_klball(const EmpiricalCounts& counts, const Distribution& center, double radius,
                         double alpha, const SolverOptions& options = {});

// argmin of D(P||Q) over the ball D(center||Q) <= radius.
std::vector<double> project_to_klball(std::span<const double> p, const Distribution& center,
                                      double radius);

}  // namespace contam
