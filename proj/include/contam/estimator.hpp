#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "contam/distributions.hpp"
#include "contam/solver.hpp"

namespace contam {

// 2^-28, the default line-search accuracy on alpha.
inline constexpr double kDefaultBisectTolerance = 1.0 / 268435456.0;

// Goodness-of-fit threshold (1/p) log(1/eps) + (2n/p) log(p + 1) at an
// effective (possibly fractional) sample size p.
double gof_threshold(double p_eff, std::size_t n, double epsilon);

// Threshold after discarding an alpha fraction of p samples.
double discard_threshold(double alpha, std::uint64_t p, std::size_t n, double epsilon);

struct Verdict {
  bool contaminated = false;
  double margin = 0.0;  // objective - threshold
  double objective = 0.0;
  double threshold = 0.0;
};

Verdict is_contaminated(const EmpiricalCounts& counts, const ModelSet& model, double epsilon,
                        const SolverOptions& options = {});

struct EstimateOptions {
  double bisect_tol = kDefaultBisectTolerance;
  SolverOptions solver;
};

struct EstimateResult {
  double alpha_lower = 0.0;
  double kappa = 0.0;
  std::uint64_t c_lower = 0;
  double threshold_at_alpha = 0.0;
  double objective_at_alpha = 0.0;
  bool contaminated = false;
  double bisection_width = 0.0;
  int solves = 0;
  bool solver_converged = true;  // every solve along the search converged
};

EstimateResult estimate_alpha_lower(const EmpiricalCounts& counts, const ModelSet& model,
                                    double epsilon, const EstimateOptions& options = {});

std::uint64_t contaminated_count_lower(const EstimateResult& result, std::uint64_t p);

// Tests counts_p against the KL ball of models around the empirical
// distribution of counts_q.
EstimateResult two_sample_test(const EmpiricalCounts& counts_p, const EmpiricalCounts& counts_q,
                               double epsilon, const EstimateOptions& options = {});

// sqrt((1/p) log(1/eps) + (n/p) log(p + 1)).
double convergence_bound(std::uint64_t p, std::size_t n, double epsilon);

enum class Family { Dip, Spike };

const char* to_string(Family family);
Family parse_family(const std::string& name);

// (1 - pi) U_n + pi F with F uniform over the first n-1 categories (dip) or a
// point mass on category 0 (spike).
Distribution contamination_family(Family family, std::size_t n, double pi);

// Largest-remainder rounding of p * dist to integer counts summing to p.
// Remainder ties go to the lower index.
EmpiricalCounts round_to_counts(const Distribution& dist, std::uint64_t p);

struct SweepConfig {
  std::vector<std::uint64_t> p_grid;
  std::vector<double> pi_grid;
  Family family = Family::Spike;
  std::size_t n = 11;
  double epsilon = 0.05;
  double bisect_tol = kDefaultBisectTolerance;
  unsigned threads = 0;  // 0 = hardware concurrency
};

struct SweepRow {
  std::uint64_t p = 0;
  double pi = 0.0;
  Family family = Family::Spike;
  double alpha_lower = 0.0;
  double kappa = 0.0;
  double ratio = 0.0;
  double threshold = 0.0;
  double objective = 0.0;
  double wall_time_ms = 0.0;
};

// Rows ordered by (pi index, p index) regardless of evaluation order.
std::vector<SweepRow> sweep(const SweepConfig& config);

}  // namespace contam
