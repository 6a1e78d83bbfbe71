#include "contam/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include <boost/math/tools/roots.hpp>

namespace contam {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("alpha must lie in [0,1), got " + std::to_string(alpha));
  }
}

void check_dimension(std::size_t a, std::size_t b) {
  if (a != b) {
    throw std::invalid_argument("dimension mismatch: " + std::to_string(a) + " vs " +
                                std::to_string(b));
  }
}

// Coordinates without capacity or without model mass sit at P_i = 0, where no
// finite multiplier exists; their lambda is reported as 0.
DualCertificate duals_from(const WaterFill& wf, std::span<const double> upper,
                           std::span<const double> q) {
  DualCertificate d;
  d.lambda.assign(q.size(), 0.0);
  d.nu = -1.0 - std::log(wf.level);
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (wf.active[i] && upper[i] > 0.0 && q[i] > 0.0) {
      d.lambda[i] = std::max(0.0, std::log(wf.level * q[i] / upper[i]));
    }
  }
  return d;
}

// Result for a box that admits no finite-divergence point. Phat itself is
// feasible, and its divergence is infinite.
SolveResult infeasible_result(const Distribution& phat, const Distribution& q) {
  return SolveResult{.objective = kInf, .p_star = phat, .q_star = q};
}

Distribution mixture_of(std::span<const Distribution> components, std::span<const double> weights) {
  std::vector<double> q(components.front().size(), 0.0);
  for (std::size_t j = 0; j < components.size(); ++j) {
    for (std::size_t i = 0; i < q.size(); ++i) q[i] += weights[j] * components[j][i];
  }
  return Distribution(std::move(q));
}

}  // namespace

FeasibleBox FeasibleBox::from_empirical(const Distribution& empirical, double alpha) {
  check_alpha(alpha);
  FeasibleBox box{.upper = std::vector<double>(empirical.size()), .alpha = alpha};
  for (std::size_t i = 0; i < empirical.size(); ++i) box.upper[i] = empirical[i] / (1.0 - alpha);
  return box;
}

WaterFill water_fill(std::span<const double> upper, std::span<const double> q) {
  check_dimension(upper.size(), q.size());
  const std::size_t n = q.size();
  WaterFill wf;
  wf.p.assign(n, 0.0);
  wf.active.assign(n, false);

  std::vector<std::size_t> order;
  order.reserve(n);
  double capacity = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (q[i] > 0.0) {
      order.push_back(i);
      capacity += upper[i];
    }
  }
  if (order.empty() || capacity < 1.0 - kSimplexTolerance) {
    wf.feasible = false;
    return wf;
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return upper[a] * q[b] < upper[b] * q[a];
  });

  // suffix_q[j] = sum of q over order[j..]; avoids cancellation from running subtraction.
  std::vector<double> suffix_q(order.size() + 1, 0.0);
  for (std::size_t j = order.size(); j-- > 0;) suffix_q[j] = suffix_q[j + 1] + q[order[j]];

  double saturated = 0.0;
  std::size_t j = 0;
  double level = 0.0;
  for (; j < order.size(); ++j) {
    const std::size_t i = order[j];
    level = (1.0 - saturated) / suffix_q[j];
    if (level <= upper[i] / q[i]) break;
    saturated += upper[i];
    wf.active[i] = true;
  }
  if (j == order.size()) {
    // Total capacity is exactly one: every constraint binds.
    const std::size_t last = order.back();
    level = upper[last] / q[last];
  }
  wf.level = level;
  for (std::size_t i : order) wf.p[i] = wf.active[i] ? upper[i] : level * q[i];
  return wf;
}

SolveResult solve_singleton(const EmpiricalCounts& counts, const Distribution& q0, double alpha) {
  check_alpha(alpha);
  check_dimension(counts.size(), q0.size());
  const Distribution phat = empirical(counts);
  const FeasibleBox box = FeasibleBox::from_empirical(phat, alpha);
  const WaterFill wf = water_fill(box.upper, q0.probs());
  if (!wf.feasible) return infeasible_result(phat, q0);

  Distribution p_star(wf.p, counts.labels());
  const double objective = kl_divergence(p_star, q0);
  return SolveResult{.objective = objective,
                     .p_star = std::move(p_star),
                     .q_star = q0,
                     .duals = duals_from(wf, box.upper, q0.probs())};
}

std::optional<ClosedFormInterval> closed_form_interval(const Distribution& empirical,
                                                       const Distribution& q0) {
  check_dimension(empirical.size(), q0.size());
  std::size_t best = q0.size();
  double r_best = kInf;
  double r_second = kInf;
  for (std::size_t i = 0; i < q0.size(); ++i) {
    if (q0[i] <= 0.0) {
      if (empirical[i] > 0.0) return std::nullopt;
      continue;
    }
    const double r = empirical[i] / q0[i];
    if (r < r_best) {
      r_second = r_best;
      r_best = r;
      best = i;
    } else if (r < r_second) {
      r_second = r;
    }
  }
  if (best == q0.size() || !(r_best < r_second) || !std::isfinite(r_second)) return std::nullopt;
  return ClosedFormInterval{.lower = 1.0 - empirical[best] - r_second * (1.0 - q0[best]),
                            .upper = 1.0 - r_best};
}

std::optional<SolveResult> closed_form_singleton(const EmpiricalCounts& counts,
                                                 const Distribution& q0, double alpha) {
  check_alpha(alpha);
  check_dimension(counts.size(), q0.size());
  const Distribution phat = empirical(counts);
  const auto interval = closed_form_interval(phat, q0);
  if (!interval || alpha < interval->lower || alpha > interval->upper) return std::nullopt;

  std::size_t ell = 0;
  double r_best = kInf;
  for (std::size_t i = 0; i < q0.size(); ++i) {
    if (q0[i] > 0.0 && phat[i] / q0[i] < r_best) {
      r_best = phat[i] / q0[i];
      ell = i;
    }
  }
  const double q_ell = q0[ell];
  const double p_ell = phat[ell] / (1.0 - alpha);
  const double rest = (1.0 - p_ell) / (1.0 - q_ell);

  std::vector<double> p(q0.size());
  for (std::size_t i = 0; i < q0.size(); ++i) p[i] = (i == ell) ? p_ell : q0[i] * rest;

  DualCertificate duals;
  duals.lambda.assign(q0.size(), 0.0);
  if (p_ell > 0.0) duals.lambda[ell] = std::max(0.0, std::log(q_ell * (1.0 - p_ell) / ((1.0 - q_ell) * p_ell)));
  duals.nu = std::log((1.0 - q_ell) / (1.0 - p_ell)) - 1.0;

  Distribution p_star(std::move(p), counts.labels());
  const double objective = kl_divergence(p_star, q0);
  return SolveResult{.objective = objective, .p_star = std::move(p_star), .q_star = q0, .duals = std::move(duals)};
}

SolveResult solve_mixture(const EmpiricalCounts& counts, std::span<const Distribution> components,
                          double alpha, const SolverOptions& options) {
  check_alpha(alpha);
  if (components.size() < 2) throw std::invalid_argument("mixture needs at least 2 components");
  for (const auto& c : components) check_dimension(counts.size(), c.size());

  const std::size_t k = components.size();
  const std::size_t n = counts.size();
  const Distribution phat = empirical(counts);
  const FeasibleBox box = FeasibleBox::from_empirical(phat, alpha);

  std::vector<double> weights(k, 1.0 / static_cast<double>(k));
  std::vector<double> next(k);
  std::vector<double> trace;
  double previous = kInf;
  bool converged = false;
  int iterations = 0;

  Distribution q = mixture_of(components, weights);
  WaterFill wf = water_fill(box.upper, q.probs());
  if (!wf.feasible) {
    auto r = infeasible_result(phat, q);
    r.mixture_weights = weights;
    return r;
  }

  std::vector<double> best_weights = weights;
  double best = kInf;
  while (iterations < options.max_iterations) {
    ++iterations;
    const double objective = kl_divergence(wf.p, q.probs());
    trace.push_back(objective);
    if (objective < best) {
      best = objective;
      best_weights = weights;
    }
    if (previous - objective < options.tolerance) {
      converged = true;
      break;
    }
    previous = objective;

    // Multiplicative update: pi_j <- sum_i P_i pi_j Q^j_i / Q_i.
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (wf.p[i] <= 0.0 || q[i] <= 0.0) continue;
      const double scale = wf.p[i] / q[i];
      for (std::size_t j = 0; j < k; ++j) next[j] += scale * weights[j] * components[j][i];
    }
    const double total = std::accumulate(next.begin(), next.end(), 0.0);
    for (std::size_t j = 0; j < k; ++j) weights[j] = next[j] / total;

    q = mixture_of(components, weights);
    wf = water_fill(box.upper, q.probs());
    if (!wf.feasible) break;  // weights lost support; fall back to best iterate
  }

  q = mixture_of(components, best_weights);
  wf = water_fill(box.upper, q.probs());
  Distribution p_star(wf.p, counts.labels());
  const double objective = kl_divergence(p_star, q);
  return SolveResult{.objective = objective,
                     .p_star = std::move(p_star),
                     .q_star = q,
                     .mixture_weights = std::move(best_weights),
                     .duals = duals_from(wf, box.upper, q.probs()),
                     .iterations = iterations,
                     .converged = converged,
                     .trace = std::move(trace)};
}

std::vector<double> project_to_klball(std::span<const double> p, const Distribution& center,
                                      double radius) {
  check_dimension(p.size(), center.size());
  if (kl_divergence(center.probs(), p) <= radius) return {p.begin(), p.end()};

  const std::size_t n = p.size();
  std::vector<double> q(n);
  auto point = [&](double t) {
    for (std::size_t i = 0; i < n; ++i) q[i] = (1.0 - t) * p[i] + t * center[i];
  };
  // Along the segment from P to the center the ball divergence decreases
  // monotonically from above the radius to 0.
  auto excess = [&](double t) {
    point(t);
    return kl_divergence(center.probs(), q) - radius;
  };
  auto tol = [](double lo, double hi) { return hi - lo <= 4.0 * std::numeric_limits<double>::epsilon(); };
  const auto bracket = boost::math::tools::bisect(excess, 0.0, 1.0, tol);
  const double t = bracket.second;  // feasible side
  if (!std::isfinite(t)) throw std::runtime_error("KL-ball projection failed: degenerate P");
  point(t);
  return q;
}

SolveResult solve_klball(const EmpiricalCounts& counts, const Distribution& center, double radius,
                         double alpha, const SolverOptions& options) {
  check_alpha(alpha);
  check_dimension(counts.size(), center.size());
  if (!(radius > 0.0)) throw std::invalid_argument("KL-ball radius must be positive");

  const Distribution phat = empirical(counts);
  const FeasibleBox box = FeasibleBox::from_empirical(phat, alpha);

  std::vector<double> p(phat.probs().begin(), phat.probs().end());
  std::vector<double> q;
  WaterFill wf;
  std::vector<double> trace;
  double previous = kInf;
  bool converged = false;
  int iterations = 0;

  while (iterations < options.max_iterations) {
    ++iterations;
    q = project_to_klball(p, center, radius);
    wf = water_fill(box.upper, q);
    if (!wf.feasible) throw std::runtime_error("KL-ball model lost support of the data");
    p = wf.p;
    const double objective = kl_divergence(p, q);
    trace.push_back(objective);
    if (previous - objective < options.tolerance) {
      converged = true;
      break;
    }
    previous = objective;
  }

  Distribution q_star(q, center.labels());
  Distribution p_star(p, counts.labels());
  const double objective = kl_divergence(p_star, q_star);
  return SolveResult{.objective = objective,
                     .p_star = std::move(p_star),
                     .q_star = q_star,
                     .duals = duals_from(wf, box.upper, q_star.probs()),
                     .iterations = iterations,
                     .converged = converged,
                     .trace = std::move(trace)};
}

SolveResult solve(const EmpiricalCounts& counts, const ModelSet& model, double alpha,
                  const SolverOptions& options) {
  if (!(options.tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  check_alpha(alpha);
  check_dimension(counts.size(), model.dimension());
  if (const auto* s = model.get_if<SingletonModel>()) return solve_singleton(counts, s->q0, alpha);
  if (const auto* m = model.get_if<MixtureModel>()) return solve_mixture(counts, m->components, alpha, options);
  const auto& ball = *model.get_if<KlBallModel>();
  return solve_klball(counts, ball.center, ball.radius, alpha, options);
}

}  // namespace contam
