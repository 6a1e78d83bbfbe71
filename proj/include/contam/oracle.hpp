#pragma once

#include <cstdint>
#include <vector>

#include "contam/distributions.hpp"

namespace contam::oracle {

inline constexpr std::uint64_t kMaxRemovalVectors = 10'000'000;
inline constexpr std::uint64_t kMaxTypes = 1'000'000;

struct RemovalVector {
  std::vector<std::uint64_t> removals;
  std::uint64_t total_removed = 0;
};

struct IntegerProgramResult {
  double objective = 0.0;
  RemovalVector argmin;
};

// Exhaustive minimum over removal vectors m_i <= counts_i, sum m_i = m, of the
// divergence between the remaining empirical distribution and q0.
IntegerProgramResult integer_program_exact(const EmpiricalCounts& counts, const Distribution& q0,
                                           std::uint64_t m);

// One empirical type of p samples over n categories with its exact
// probability under the model.
struct TypeEntry {
  std::vector<std::uint64_t> counts;
  double log_probability = 0.0;
  double probability = 0.0;
  double tail = 0.0;  // mass of this type's tie class and every less likely type
};

// All types of p samples sorted by ascending probability. Throws when the
// number of types exceeds kMaxTypes.
std::vector<TypeEntry> enumerate_types(std::uint64_t p, const Distribution& q0);

// Exact multinomial log-probability of observing `counts` under q0.
double log_type_probability(std::span<const std::uint64_t> counts, const Distribution& q0);

std::uint64_t count_types(std::uint64_t p, std::size_t n);

struct Typicality {
  bool typical = true;
  double tail_probability = 1.0;
};

Typicality exact_typicality(const EmpiricalCounts& counts, const Distribution& q0, double epsilon);

// Smallest number of removed samples leaving a typical remainder.
std::uint64_t exact_cstar(const EmpiricalCounts& counts, const Distribution& q0, double epsilon);

}  // namespace contam::oracle
