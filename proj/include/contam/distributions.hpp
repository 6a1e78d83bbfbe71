#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace contam {

// Absolute tolerance on the simplex sum after normalization.
inline constexpr double kSimplexTolerance = 1e-12;

// Probability mass function over n categories. Normalized on construction;
// negative or non-finite entries are rejected.
class Distribution {
 public:
  explicit Distribution(std::vector<double> probs, std::vector<std::string> labels = {});

  static Distribution uniform(std::size_t n);
  static Distribution point_mass(std::size_t n, std::size_t at);

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const { return probs_; }

  // Empty when the distribution is unlabeled.
  const std::vector<std::string>& labels() const { return labels_; }
  bool has_labels() const { return !labels_.empty(); }

 private:
  std::vector<double> probs_;
  std::vector<std::string> labels_;
};

// Raw category counts of a dataset of p = total() samples.
class EmpiricalCounts {
 public:
  explicit EmpiricalCounts(std::vector<std::uint64_t> counts, std::vector<std::string> labels = {});

  std::size_t size() const { return counts_.size(); }
  std::uint64_t total() const { return total_; }
  std::uint64_t operator[](std::size_t i) const { return counts_[i]; }
  std::span<const std::uint64_t> counts() const { return counts_; }
  const std::vector<std::string>& labels() const { return labels_; }

  EmpiricalCounts scaled(std::uint64_t factor) const;

 private:
  std::vector<std::uint64_t> counts_;
  std::vector<std::string> labels_;
  std::uint64_t total_ = 0;
};

struct SingletonModel {
  Distribution q0;
};

struct MixtureModel {
  std::vector<Distribution> components;
};

struct KlBallModel {
  Distribution center;
  double radius;
};

enum class ModelKind { Singleton, Mixture, KlBall };

// Convex family of model distributions. Construct through the factories,
// which enforce the per-variant invariants.
class ModelSet {
 public:
  using Variant = std::variant<SingletonModel, MixtureModel, KlBallModel>;

  static ModelSet singleton(Distribution q0);
  static ModelSet mixture(std::vector<Distribution> components);
  static ModelSet kl_ball(Distribution center, double radius);

  ModelKind kind() const;
  std::size_t dimension() const;
  const Variant& variant() const { return model_; }

  template <typename T>
  const T* get_if() const {
    return std::get_if<T>(&model_);
  }

 private:
  explicit ModelSet(Variant model) : model_(std::move(model)) {}
  Variant model_;
};

const char* to_string(ModelKind kind);

Distribution empirical(const EmpiricalCounts& counts);

// D(P||Q) in nats; +inf when P puts mass where Q has none.
double kl_divergence(const Distribution& p, const Distribution& q);
double kl_divergence(std::span<const double> p, std::span<const double> q);

// max_i (1 - P_i/Q_i) over the support of Q, clamped below at 0.
double separation_distance(const Distribution& p, const Distribution& q);

// Radius of the KL ball of models for which an empirical model built from
// `model_counts` is plausibly typical at level epsilon.
double klball_radius(const EmpiricalCounts& model_counts, double epsilon);

}  // namespace contam
