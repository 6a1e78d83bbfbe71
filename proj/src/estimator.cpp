#include "contam/estimator.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace contam {

namespace {

void check_epsilon(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0,1)");
}

}  // namespace

double gof_threshold(double p_eff, std::size_t n, double epsilon) {
  check_epsilon(epsilon);
  if (!(p_eff > 0.0) || !std::isfinite(p_eff)) throw std::invalid_argument("effective sample size must be positive");
  return std::log(1.0 / epsilon) / p_eff + 2.0 * static_cast<double>(n) / p_eff * std::log(p_eff + 1.0);
}

double discard_threshold(double alpha, std::uint64_t p, std::size_t n, double epsilon) {
  return gof_threshold(static_cast<double>(p) * (1.0 - alpha), n, epsilon);
}

Verdict is_contaminated(const EmpiricalCounts& counts, const ModelSet& model, double epsilon,
                        const SolverOptions& options) {
  check_epsilon(epsilon);
  if (counts.total() == 0) throw std::invalid_argument("empty dataset");
  const SolveResult r = solve(counts, model, 0.0, options);
  const double threshold = gof_threshold(static_cast<double>(counts.total()), counts.size(), epsilon);
  return Verdict{.contaminated = r.objective >= threshold,
                 .margin = r.objective - threshold,
                 .objective = r.objective,
                 .threshold = threshold};
}

EstimateResult estimate_alpha_lower(const EmpiricalCounts& counts, const ModelSet& model,
                                    double epsilon, const EstimateOptions& options) {
  check_epsilon(epsilon);
  if (!(options.bisect_tol > 0.0)) throw std::invalid_argument("bisection tolerance must be positive");
  if (counts.total() == 0) throw std::invalid_argument("empty dataset");

  const std::uint64_t p = counts.total();
  const std::size_t n = counts.size();
  EstimateResult out;

  auto evaluate = [&](double alpha) {
    SolveResult r = solve(counts, model, alpha, options.solver);
    ++out.solves;
    out.solver_converged = out.solver_converged && r.converged;
    return r;
  };

  SolveResult best = evaluate(0.0);
  double best_threshold = discard_threshold(0.0, p, n, epsilon);
  out.contaminated = best.objective >= best_threshold;

  // D*_alpha is non-increasing and the threshold strictly increasing in alpha,
  // so the predicate holds on an interval [0, alpha_L]. At alpha = 1 the
  // remainder is empty and never contaminated.
  double lo = 0.0;
  double hi = out.contaminated ? 1.0 : 0.0;
  while (hi - lo > options.bisect_tol) {
    const double mid = 0.5 * (lo + hi);
    SolveResult r = evaluate(mid);
    const double threshold = discard_threshold(mid, p, n, epsilon);
    if (r.objective >= threshold) {
      lo = mid;
      best = std::move(r);
      best_threshold = threshold;
    } else {
      hi = mid;
    }
  }

  out.alpha_lower = lo;
  out.bisection_width = hi - lo;
  out.threshold_at_alpha = best_threshold;
  out.objective_at_alpha = best.objective;
  out.kappa = separation_distance(empirical(counts), best.q_star);
  out.c_lower = contaminated_count_lower(out, p);
  return out;
}

std::uint64_t contaminated_count_lower(const EstimateResult& result, std::uint64_t p) {
  return static_cast<std::uint64_t>(std::floor(static_cast<double>(p) * result.alpha_lower));
}

EstimateResult two_sample_test(const EmpiricalCounts& counts_p, const EmpiricalCounts& counts_q,
                               double epsilon, const EstimateOptions& options) {
  if (counts_p.size() != counts_q.size()) throw std::invalid_argument("dimension mismatch");
  const double radius = klball_radius(counts_q, epsilon);
  const ModelSet ball = ModelSet::kl_ball(empirical(counts_q), radius);
  return estimate_alpha_lower(counts_p, ball, epsilon, options);
}

double convergence_bound(std::uint64_t p, std::size_t n, double epsilon) {
  check_epsilon(epsilon);
  if (p == 0) throw std::invalid_argument("p must be positive");
  const auto pd = static_cast<double>(p);
  return std::sqrt(std::log(1.0 / epsilon) / pd + static_cast<double>(n) / pd * std::log(pd + 1.0));
}

const char* to_string(Family family) {
  return family == Family::Dip ? "dip" : "spike";
}

Family parse_family(const std::string& name) {
  if (name == "dip") return Family::Dip;
  if (name == "spike") return Family::Spike;
  throw std::invalid_argument("unknown family '" + name + "' (expected dip or spike)");
}

Distribution contamination_family(Family family, std::size_t n, double pi) {
  if (n < 2) throw std::invalid_argument("family needs n >= 2");
  if (!(pi >= 0.0 && pi <= 1.0)) throw std::invalid_argument("mixture proportion must lie in [0,1]");
  const double base = (1.0 - pi) / static_cast<double>(n);
  std::vector<double> probs(n, base);
  if (family == Family::Spike) {
    probs[0] += pi;
  } else {
    for (std::size_t i = 0; i + 1 < n; ++i) probs[i] += pi / static_cast<double>(n - 1);
  }
  return Distribution(std::move(probs));
}

EmpiricalCounts round_to_counts(const Distribution& dist, std::uint64_t p) {
  const std::size_t n = dist.size();
  std::vector<std::uint64_t> counts(n);
  std::vector<double> remainder(n);
  std::uint64_t assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double exact = dist[i] * static_cast<double>(p);
    const double whole = std::floor(exact);
    counts[i] = static_cast<std::uint64_t>(whole);
    remainder[i] = exact - whole;
    assigned += counts[i];
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  // Sum of floors never exceeds p; the deficit is below n.
  for (std::size_t j = 0; assigned < p; j = (j + 1) % n) {
    ++counts[order[j]];
    ++assigned;
  }
  return EmpiricalCounts(std::move(counts), dist.labels());
}

std::vector<SweepRow> sweep(const SweepConfig& config) {
  if (config.p_grid.empty() || config.pi_grid.empty()) throw std::invalid_argument("sweep grids must be non-empty");
  if (config.n < 2) throw std::invalid_argument("sweep needs n >= 2");
  check_epsilon(config.epsilon);
  for (auto p : config.p_grid) {
    if (p == 0) throw std::invalid_argument("sweep sample sizes must be positive");
  }

  const std::size_t rows = config.pi_grid.size() * config.p_grid.size();
  std::vector<SweepRow> out(rows);
  const ModelSet model = ModelSet::singleton(Distribution::uniform(config.n));
  EstimateOptions options;
  options.bisect_tol = config.bisect_tol;

  auto run = [&](std::size_t index) {
    const double pi = config.pi_grid[index / config.p_grid.size()];
    const std::uint64_t p = config.p_grid[index % config.p_grid.size()];
    const auto start = std::chrono::steady_clock::now();
    const EmpiricalCounts counts = round_to_counts(contamination_family(config.family, config.n, pi), p);
    const EstimateResult est = estimate_alpha_lower(counts, model, config.epsilon, options);
    const auto stop = std::chrono::steady_clock::now();
    out[index] = SweepRow{.p = p,
                          .pi = pi,
                          .family = config.family,
                          .alpha_lower = est.alpha_lower,
                          .kappa = est.kappa,
                          .ratio = est.kappa > 0.0 ? est.alpha_lower / est.kappa : 0.0,
                          .threshold = est.threshold_at_alpha,
                          .objective = est.objective_at_alpha,
                          .wall_time_ms = std::chrono::duration<double, std::milli>(stop - start).count()};
  };

  unsigned threads = config.threads != 0 ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, rows));
  if (threads <= 1) {
    for (std::size_t i = 0; i < rows; ++i) run(i);
    return out;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < rows && !failed; i = next++) {
          try {
            run(i);
          } catch (...) {
            if (!failed.exchange(true)) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace contam
