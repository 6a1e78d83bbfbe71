#pragma once

// Test-only generators and brute-force reference computations. Nothing here
// calls into the solver under test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "contam/distributions.hpp"

namespace contam::testing {

using Rng = std::mt19937_64;

inline std::vector<double> random_simplex(Rng& rng, std::size_t n, double floor = 0.0) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> v(n);
  double s = 0.0;
  for (auto& x : v) {
    x = e(rng) + floor;
    s += x;
  }
  for (auto& x : v) x /= s;
  return v;
}

inline Distribution random_distribution(Rng& rng, std::size_t n, double floor = 0.0) {
  return Distribution(random_simplex(rng, n, floor));
}

inline EmpiricalCounts random_counts(Rng& rng, std::size_t n, std::uint64_t p, bool positive = false) {
  std::vector<std::uint64_t> c(n, positive ? 1 : 0);
  const std::uint64_t base = positive ? n : 0;
  const auto probs = random_simplex(rng, n);
  std::discrete_distribution<std::size_t> pick(probs.begin(), probs.end());
  for (std::uint64_t i = base; i < p; ++i) ++c[pick(rng)];
  return EmpiricalCounts(std::move(c));
}

inline EmpiricalCounts sample_counts(Rng& rng, const Distribution& q, std::uint64_t p) {
  std::discrete_distribution<std::size_t> pick(q.probs().begin(), q.probs().end());
  std::vector<std::uint64_t> c(q.size(), 0);
  for (std::uint64_t i = 0; i < p; ++i) ++c[pick(rng)];
  return EmpiricalCounts(std::move(c));
}

// Direct evaluation of sum p log(p/q) for oracles.
inline double kl_ref(const std::vector<double>& p, const std::vector<double>& q) {
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) return std::numeric_limits<double>::infinity();
    d += p[i] * std::log(p[i] / q[i]);
  }
  return d;
}

inline std::pair<double, double> golden_section(const std::function<double(double)>& f, double a, double b,
                                                int iterations = 200) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iterations && b - a > 1e-15; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, f(x)};
}

// Grid minimum of f over [a, b] refined by golden section around the best
// grid cell. f is assumed unimodal (convex) on the interval.
inline std::pair<double, double> grid_then_golden(const std::function<double(double)>& f, double a, double b,
                                                  int cells) {
  double best_x = a;
  double best = f(a);
  for (int i = 1; i <= cells; ++i) {
    const double x = a + (b - a) * i / cells;
    const double v = f(x);
    if (v < best) {
      best = v;
      best_x = x;
    }
  }
  const double h = (b - a) / cells;
  auto refined = golden_section(f, std::max(a, best_x - h), std::min(b, best_x + h));
  return refined.second < best ? refined : std::pair{best_x, best};
}

// Brute-force minimum of D(P||Q) over the 2-simplex slice P_i <= upper_i for
// n = 3 on a lattice of the given resolution, refined coordinate-wise.
inline double brute_force_box_kl3(const std::vector<double>& upper, const std::vector<double>& q, int cells) {
  auto value_at = [&](double p0) {
    // Inner problem in p1 with p2 = 1 - p0 - p1.
    const double lo = std::max(0.0, 1.0 - p0 - upper[2]);
    double hi = std::min(upper[1], 1.0 - p0);
    if (lo > hi + 1e-12) return std::numeric_limits<double>::infinity();
    hi = std::max(lo, hi);
    auto inner = [&](double p1) { return kl_ref({p0, p1, std::max(0.0, 1.0 - p0 - p1)}, q); };
    return grid_then_golden(inner, lo, hi, cells).second;
  };
  const double lo0 = std::max(0.0, 1.0 - upper[1] - upper[2]);
  const double hi0 = std::max(lo0, std::min(upper[0], 1.0));
  return grid_then_golden(value_at, lo0, hi0, cells).second;
}

}  // namespace contam::testing
