#include "contam/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace contam {

namespace {

void check_labels(std::size_t n, const std::vector<std::string>& labels) {
  if (labels.empty()) return;
  if (labels.size() != n) {
    throw std::invalid_argument("label count " + std::to_string(labels.size()) +
                                " does not match dimension " + std::to_string(n));
  }
  std::unordered_set<std::string> seen;
  for (const auto& label : labels) {
    if (!seen.insert(label).second) throw std::invalid_argument("duplicate category '" + label + "'");
  }
}

}  // namespace

Distribution::Distribution(std::vector<double> probs, std::vector<std::string> labels)
    : probs_(std::move(probs)), labels_(std::move(labels)) {
  if (probs_.empty()) throw std::invalid_argument("distribution has no categories");
  check_labels(probs_.size(), labels_);
  double sum = 0.0;
  for (double v : probs_) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite probability");
    if (v < 0.0) throw std::invalid_argument("negative probability");
    sum += v;
  }
  if (!(sum > 0.0)) throw std::invalid_argument("distribution has zero total mass");
  for (double& v : probs_) v /= sum;
}

Distribution Distribution::uniform(std::size_t n) {
  return Distribution(std::vector<double>(n, 1.0));
}

Distribution Distribution::point_mass(std::size_t n, std::size_t at) {
  if (at >= n) throw std::invalid_argument("point mass index out of range");
  std::vector<double> probs(n, 0.0);
  probs[at] = 1.0;
  return Distribution(std::move(probs));
}

EmpiricalCounts::EmpiricalCounts(std::vector<std::uint64_t> counts, std::vector<std::string> labels)
    : counts_(std::move(counts)), labels_(std::move(labels)) {
  if (counts_.empty()) throw std::invalid_argument("counts have no categories");
  check_labels(counts_.size(), labels_);
  for (auto c : counts_) {
    if (c > std::numeric_limits<std::uint64_t>::max() - total_) {
      throw std::overflow_error("count total overflows");
    }
    total_ += c;
  }
}

EmpiricalCounts EmpiricalCounts::scaled(std::uint64_t factor) const {
  std::vector<std::uint64_t> out(counts_);
  for (auto& c : out) c *= factor;
  return EmpiricalCounts(std::move(out), labels_);
}

ModelSet ModelSet::singleton(Distribution q0) { return ModelSet(SingletonModel{std::move(q0)}); }

ModelSet ModelSet::mixture(std::vector<Distribution> components) {
  if (components.size() < 2) throw std::invalid_argument("mixture needs at least 2 components");
  const std::size_t n = components.front().size();
  for (const auto& c : components) {
    if (c.size() != n) throw std::invalid_argument("mixture components differ in dimension");
  }
  return ModelSet(MixtureModel{std::move(components)});
}

ModelSet ModelSet::kl_ball(Distribution center, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("KL-ball radius must be positive");
  return ModelSet(KlBallModel{std::move(center), radius});
}

ModelKind ModelSet::kind() const {
  return static_cast<ModelKind>(model_.index());
}

std::size_t ModelSet::dimension() const {
  return std::visit(
      [](const auto& m) -> std::size_t {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, SingletonModel>) return m.q0.size();
        else if constexpr (std::is_same_v<T, MixtureModel>) return m.components.front().size();
        else return m.center.size();
      },
      model_);
}

const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Singleton: return "singleton";
    case ModelKind::Mixture: return "mixture";
    case ModelKind::KlBall: return "klball";
  }
  return "unknown";
}

Distribution empirical(const EmpiricalCounts& counts) {
  if (counts.total() == 0) throw std::invalid_argument("empty dataset");
  std::vector<double> probs(counts.size());
  const auto total = static_cast<double>(counts.total());
  for (std::size_t i = 0; i < counts.size(); ++i) probs[i] = static_cast<double>(counts[i]) / total;
  return Distribution(std::move(probs), counts.labels());
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("dimension mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) return std::numeric_limits<double>::infinity();
    d += p[i] * std::log(p[i] / q[i]);
  }
  return std::max(d, 0.0);
}

double kl_divergence(const Distribution& p, const Distribution& q) {
  return kl_divergence(p.probs(), q.probs());
}

double separation_distance(const Distribution& p, const Distribution& q) {
  if (p.size() != q.size()) throw std::invalid_argument("dimension mismatch");
  double kappa = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (q[i] > 0.0) kappa = std::max(kappa, 1.0 - p[i] / q[i]);
  }
  return std::min(kappa, 1.0);
}

double klball_radius(const EmpiricalCounts& model_counts, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0,1)");
  if (model_counts.total() == 0) throw std::invalid_argument("empty dataset");
  const auto p = static_cast<double>(model_counts.total());
  const auto n = static_cast<double>(model_counts.size());
  return std::log(1.0 / epsilon) / p + 2.0 * n / p * std::log(p + 1.0);
}

}  // namespace contam
