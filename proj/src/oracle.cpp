#include "contam/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace contam::oracle {

namespace {

// Log-probabilities closer than this belong to one tie class.
constexpr double kTieTolerance = 1e-11;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b, std::uint64_t cap) {
  return (a >= cap || b >= cap - a) ? cap : a + b;
}

// Number of vectors 0 <= m_i <= bound_i with sum m, saturated at cap.
std::uint64_t count_bounded(std::span<const std::uint64_t> bound, std::uint64_t m, std::uint64_t cap) {
  std::vector<std::uint64_t> ways(m + 1, 0);
  ways[0] = 1;
  for (auto b : bound) {
    std::vector<std::uint64_t> next(m + 1, 0);
    for (std::uint64_t s = 0; s <= m; ++s) {
      if (ways[s] == 0) continue;
      for (std::uint64_t take = 0; take <= b && s + take <= m; ++take) {
        next[s + take] = saturating_add(next[s + take], ways[s], cap);
      }
    }
    ways = std::move(next);
  }
  return ways[m];
}

// Calls visit(v) for every v with 0 <= v_i <= bound_i and sum v = total.
void for_each_bounded(std::span<const std::uint64_t> bound, std::uint64_t total,
                      const std::function<void(const std::vector<std::uint64_t>&)>& visit) {
  const std::size_t n = bound.size();
  std::vector<std::uint64_t> suffix(n + 1, 0);
  for (std::size_t i = n; i-- > 0;) suffix[i] = suffix[i + 1] + bound[i];
  std::vector<std::uint64_t> v(n, 0);
  std::function<void(std::size_t, std::uint64_t)> rec = [&](std::size_t i, std::uint64_t left) {
    if (i + 1 == n) {
      if (left <= bound[i]) {
        v[i] = left;
        visit(v);
      }
      return;
    }
    const std::uint64_t hi = std::min(bound[i], left);
    const std::uint64_t lo = left > suffix[i + 1] ? left - suffix[i + 1] : 0;
    for (std::uint64_t x = lo; x <= hi; ++x) {
      v[i] = x;
      rec(i + 1, left - x);
    }
  };
  if (n == 0 || total > suffix[0]) return;
  rec(0, total);
}

double log_multinomial(std::span<const std::uint64_t> counts) {
  std::uint64_t p = 0;
  for (auto c : counts) p += c;
  if (p <= 64) {
    using boost::multiprecision::cpp_int;
    auto factorial = [](std::uint64_t k) {
      cpp_int f = 1;
      for (std::uint64_t i = 2; i <= k; ++i) f *= i;
      return f;
    };
    cpp_int coefficient = factorial(p);
    for (auto c : counts) coefficient /= factorial(c);
    return std::log(coefficient.convert_to<double>());
  }
  double acc = std::lgamma(static_cast<double>(p) + 1.0);
  for (auto c : counts) acc -= std::lgamma(static_cast<double>(c) + 1.0);
  return acc;
}

void check_dimension(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("dimension mismatch");
}

void check_epsilon(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0,1)");
}

using TailTable = std::map<std::vector<std::uint64_t>, double>;

TailTable tail_table(std::uint64_t p, const Distribution& q0) {
  TailTable table;
  for (auto& entry : enumerate_types(p, q0)) table.emplace(std::move(entry.counts), entry.tail);
  return table;
}

}  // namespace

std::uint64_t count_types(std::uint64_t p, std::size_t n) {
  // C(p + n - 1, n - 1), saturated at the uint64 maximum.
  constexpr auto cap = std::numeric_limits<std::uint64_t>::max();
  if (n == 0) return 0;
  using boost::multiprecision::cpp_int;
  cpp_int c = 1;
  for (std::uint64_t i = 1; i < n; ++i) {
    c = c * (p + i) / i;
    if (c > cap) return cap;
  }
  return c.convert_to<std::uint64_t>();
}

double log_type_probability(std::span<const std::uint64_t> counts, const Distribution& q0) {
  check_dimension(counts.size(), q0.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] == 0) continue;
    if (q0[i] <= 0.0) return kNegInf;
    acc += static_cast<double>(counts[i]) * std::log(q0[i]);
  }
  return acc + log_multinomial(counts);
}

std::vector<TypeEntry> enumerate_types(std::uint64_t p, const Distribution& q0) {
  const std::size_t n = q0.size();
  if (count_types(p, n) > kMaxTypes) {
    throw std::length_error("instance too large: " + std::to_string(count_types(p, n)) +
                            " empirical types exceed the enumeration guard");
  }
  std::vector<TypeEntry> types;
  const std::vector<std::uint64_t> bound(n, p);
  for_each_bounded(bound, p, [&](const std::vector<std::uint64_t>& v) {
    const double lp = log_type_probability(v, q0);
    types.push_back(TypeEntry{.counts = v, .log_probability = lp, .probability = std::exp(lp)});
  });
  std::sort(types.begin(), types.end(), [](const TypeEntry& a, const TypeEntry& b) {
    return a.log_probability < b.log_probability;
  });

  // Tail of a type includes its whole tie class, so walk classes and assign
  // the cumulative mass at each class end.
  double cumulative = 0.0;
  for (std::size_t start = 0; start < types.size();) {
    std::size_t end = start;
    while (end < types.size() &&
           (types[end].log_probability == types[start].log_probability ||
            types[end].log_probability - types[start].log_probability <= kTieTolerance)) {
      cumulative += types[end].probability;
      ++end;
    }
    for (std::size_t i = start; i < end; ++i) types[i].tail = cumulative;
    start = end;
  }
  return types;
}

Typicality exact_typicality(const EmpiricalCounts& counts, const Distribution& q0, double epsilon) {
  check_epsilon(epsilon);
  check_dimension(counts.size(), q0.size());
  const auto types = enumerate_types(counts.total(), q0);
  const std::vector<std::uint64_t> target(counts.counts().begin(), counts.counts().end());
  for (const auto& t : types) {
    if (t.counts == target) return Typicality{.typical = t.tail >= epsilon, .tail_probability = t.tail};
  }
  throw std::logic_error("observed type missing from enumeration");
}

IntegerProgramResult integer_program_exact(const EmpiricalCounts& counts, const Distribution& q0,
                                           std::uint64_t m) {
  check_dimension(counts.size(), q0.size());
  const std::uint64_t p = counts.total();
  if (m > p) throw std::invalid_argument("cannot remove more samples than the dataset holds");
  if (m == p) {
    // Empty remainder: zero divergence by convention.
    return IntegerProgramResult{
        .objective = 0.0,
        .argmin = RemovalVector{.removals = {counts.counts().begin(), counts.counts().end()}, .total_removed = m}};
  }
  if (count_bounded(counts.counts(), m, kMaxRemovalVectors + 1) > kMaxRemovalVectors) {
    throw std::length_error("instance too large: removal vectors exceed the enumeration guard");
  }

  const std::size_t n = counts.size();
  const auto remaining = static_cast<double>(p - m);
  IntegerProgramResult best{.objective = std::numeric_limits<double>::infinity(),
                            .argmin = RemovalVector{.removals = std::vector<std::uint64_t>(n, 0), .total_removed = m}};
  bool found = false;
  std::vector<double> rest(n);
  for_each_bounded(counts.counts(), m, [&](const std::vector<std::uint64_t>& removal) {
    for (std::size_t i = 0; i < n; ++i) rest[i] = static_cast<double>(counts[i] - removal[i]) / remaining;
    const double d = kl_divergence(rest, q0.probs());
    if (!found || d < best.objective) {
      found = true;
      best.objective = d;
      best.argmin.removals = removal;
    }
  });
  return best;
}

std::uint64_t exact_cstar(const EmpiricalCounts& counts, const Distribution& q0, double epsilon) {
  check_epsilon(epsilon);
  check_dimension(counts.size(), q0.size());
  const std::uint64_t p = counts.total();
  if (count_types(p, q0.size()) > kMaxTypes) throw std::length_error("instance too large for exact c*");

  for (std::uint64_t m = 0; m < p; ++m) {
    const std::uint64_t kept = p - m;
    if (count_bounded(counts.counts(), kept, kMaxRemovalVectors + 1) > kMaxRemovalVectors) {
      throw std::length_error("instance too large: removal vectors exceed the enumeration guard");
    }
    const TailTable table = tail_table(kept, q0);
    bool typical = false;
    for_each_bounded(counts.counts(), kept, [&](const std::vector<std::uint64_t>& remainder) {
      if (!typical && table.at(remainder) >= epsilon) typical = true;
    });
    if (typical) return m;
  }
  return p;  // the empty remainder is never contaminated
}

}  // namespace contam::oracle
