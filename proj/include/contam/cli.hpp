#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "contam/distributions.hpp"
#include "contam/estimator.hpp"

namespace contam::cli {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitContaminated = 2;

const char* version();

// ---------------------------------------------------------------------------
// Ingestion

enum class TableFormat { Csv, Json };

// `category,count` rows (an optional header line is skipped) or a JSON object
// mapping category to count. Categories keep first-appearance order.
EmpiricalCounts parse_counts(std::string_view text, TableFormat format);
EmpiricalCounts ingest_counts(const std::filesystem::path& path,
                              std::optional<TableFormat> format = std::nullopt);
std::string write_counts_csv(const EmpiricalCounts& counts);

// Same layouts with non-negative real masses, normalized.
Distribution parse_distribution(std::string_view text, TableFormat format);

TableFormat format_from_extension(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Model specification
//
//   {"kind": "singleton", "distribution": D}
//   {"kind": "mixture",   "components": [D, D, ...]}
//   {"kind": "klball",    "center": D, "radius": r}
//   {"kind": "klball",    "counts": C, "epsilon": e}      (radius derived)
//
// D is an inline {"label": mass, ...} object or a path to a CSV/JSON table;
// C is an inline {"label": count, ...} object or a path to a counts file.
// Relative paths resolve against the spec file's directory.

struct ModelSpec {
  ModelKind kind = ModelKind::Singleton;
  std::vector<Distribution> distributions;  // q0, the components, or the KL-ball center
  std::optional<double> radius;
  std::optional<EmpiricalCounts> model_counts;
  std::optional<double> model_epsilon;
};

ModelSpec parse_model_spec(const Json& spec, const std::filesystem::path& base_dir = {});
ModelSpec load_model_spec(const std::filesystem::path& path);

// Data and model expressed over the union of their categories: data order
// first, then model-only categories. Missing entries are zero.
struct AlignedProblem {
  std::vector<std::string> labels;
  EmpiricalCounts counts;
  ModelSet model;
};

AlignedProblem align(const EmpiricalCounts& data, const ModelSpec& spec, double epsilon);

// Re-expresses labeled counts over the given label order, zero-filling.
EmpiricalCounts align_counts(const EmpiricalCounts& counts, const std::vector<std::string>& labels);
Distribution align_distribution(const Distribution& dist, const std::vector<std::string>& labels);

// FNV-1a 64 over the labels and shortest round-trip probabilities.
std::string model_digest(const ModelSet& model);

// ---------------------------------------------------------------------------
// Reports

struct OracleReport {
  bool typical = true;
  double tail_probability = 1.0;
  std::uint64_t cstar = 0;
  std::optional<std::uint64_t> m;
  std::optional<double> integer_objective;
  std::optional<std::vector<std::uint64_t>> removals;
};

struct RunReport {
  int schema_version = kSchemaVersion;
  std::string artifact_version;
  std::string command;
  double epsilon = 0.05;
  double tolerance = kDefaultBisectTolerance;
  std::string model_kind;
  std::string model_digest;
  std::size_t categories = 0;
  std::uint64_t samples = 0;
  std::optional<Verdict> verdict;
  std::optional<EstimateResult> estimate;
  std::optional<OracleReport> oracle;
  double wall_time_ms = 0.0;
};

Json to_json(const RunReport& report);
RunReport report_from_json(const Json& json);

// One header line of dotted keys and one value line.
std::string flatten_to_csv(const Json& json);

std::string sweep_to_csv(std::span<const SweepRow> rows);
Json sweep_to_json(std::span<const SweepRow> rows);

// Shortest representation that round-trips; "inf", "-inf", "nan" otherwise.
std::string format_double(double value);

// ---------------------------------------------------------------------------
// Entry point: args exclude the program name.

int run_command(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace contam::cli
