#include "contam/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <CLI11.hpp>

#include "contam/oracle.hpp"

#ifndef CONTAM_VERSION
#define CONTAM_VERSION "0.0.0"
#endif

namespace contam::cli {

namespace fs = std::filesystem;

const char* version() { return CONTAM_VERSION; }

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::optional<std::uint64_t> parse_uint(std::string_view s) {
  std::uint64_t v = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || s.empty()) return std::nullopt;
  return v;
}

std::optional<double> parse_real(std::string_view s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || s.empty()) return std::nullopt;
  return v;
}

// Validates one count cell: integer, non-negative.
std::uint64_t to_count(std::string_view cell, const std::string& category) {
  const std::string c = trim(cell);
  if (!c.empty() && c.front() == '-') throw std::invalid_argument("negative count for category '" + category + "'");
  if (auto v = parse_uint(c)) return *v;
  if (auto r = parse_real(c)) {
    if (*r < 0.0) throw std::invalid_argument("negative count for category '" + category + "'");
    throw std::invalid_argument("non-integer count for category '" + category + "'");
  }
  throw std::invalid_argument("unparseable count '" + c + "' for category '" + category + "'");
}

std::uint64_t to_count(const Json& value, const std::string& category) {
  if (value.is_number_unsigned()) return value.get<std::uint64_t>();
  if (value.is_number_integer()) throw std::invalid_argument("negative count for category '" + category + "'");
  if (value.is_number_float()) {
    const double v = value.get<double>();
    if (v < 0.0) throw std::invalid_argument("negative count for category '" + category + "'");
    throw std::invalid_argument("non-integer count for category '" + category + "'");
  }
  throw std::invalid_argument("count for category '" + category + "' is not a number");
}

double to_mass(const Json& value, const std::string& category) {
  if (!value.is_number()) throw std::invalid_argument("mass for category '" + category + "' is not a number");
  const double v = value.get<double>();
  if (v < 0.0) throw std::invalid_argument("negative mass for category '" + category + "'");
  return v;
}

template <typename Value>
struct Table {
  std::vector<std::string> labels;
  std::vector<Value> values;

  void add(std::string label, Value v, std::unordered_set<std::string>& seen) {
    if (label.empty()) throw std::invalid_argument("empty category name");
    if (!seen.insert(label).second) throw std::invalid_argument("duplicate category '" + label + "'");
    labels.push_back(std::move(label));
    values.push_back(v);
  }
};

template <typename Value, typename FromCell, typename FromJson>
Table<Value> parse_table(std::string_view text, TableFormat format, FromCell from_cell, FromJson from_json) {
  Table<Value> table;
  std::unordered_set<std::string> seen;
  if (format == TableFormat::Json) {
    Json doc;
    try {
      doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
      throw std::invalid_argument(std::string("unparseable JSON: ") + e.what());
    }
    if (!doc.is_object()) throw std::invalid_argument("JSON table must be an object of category: value");
    for (const auto& [key, value] : doc.items()) table.add(key, from_json(value, key), seen);
  } else {
    std::istringstream in{std::string(text)};
    std::string line;
    bool first = true;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const std::string row = trim(line);
      if (row.empty() || row.front() == '#') continue;
      const auto comma = row.find(',');
      if (comma == std::string::npos || row.find(',', comma + 1) != std::string::npos) {
        throw std::invalid_argument("line " + std::to_string(line_no) + ": expected 'category,value'");
      }
      const std::string label = trim(std::string_view(row).substr(0, comma));
      const std::string cell = trim(std::string_view(row).substr(comma + 1));
      if (first) {
        first = false;
        // A first row whose value is not numeric is the header.
        if (!parse_real(cell)) continue;
      }
      table.add(label, from_cell(cell, label), seen);
    }
  }
  if (table.labels.empty()) throw std::invalid_argument("table has no categories");
  return table;
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '\r', ' ');
  return s;
}

// Non-finite doubles are encoded as strings so reports stay valid JSON.
Json number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

double read_number(const Json& j) {
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw std::invalid_argument("bad numeric field '" + s + "'");
  }
  return j.get<double>();
}

Distribution distribution_from(const Json& value, const fs::path& base_dir) {
  if (value.is_string()) {
    const fs::path path = base_dir / value.get<std::string>();
    return parse_distribution(read_file(path), format_from_extension(path));
  }
  if (value.is_object()) return parse_distribution(value.dump(), TableFormat::Json);
  throw std::invalid_argument("distribution must be an object or a file path");
}

EmpiricalCounts counts_from(const Json& value, const fs::path& base_dir) {
  if (value.is_string()) return ingest_counts(base_dir / value.get<std::string>());
  if (value.is_object()) return parse_counts(value.dump(), TableFormat::Json);
  throw std::invalid_argument("counts must be an object or a file path");
}

const Json& require(const Json& spec, const char* key) {
  if (!spec.contains(key)) throw std::invalid_argument(std::string("model spec missing '") + key + "'");
  return spec.at(key);
}

void append_unique(std::vector<std::string>& out, std::unordered_set<std::string>& seen,
                   const std::vector<std::string>& labels) {
  for (const auto& l : labels) {
    if (seen.insert(l).second) out.push_back(l);
  }
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

TableFormat format_from_extension(const fs::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".json" ? TableFormat::Json : TableFormat::Csv;
}

EmpiricalCounts parse_counts(std::string_view text, TableFormat format) {
  auto table = parse_table<std::uint64_t>(
      text, format, [](std::string_view cell, const std::string& label) { return to_count(cell, label); },
      [](const Json& v, const std::string& label) { return to_count(v, label); });
  return EmpiricalCounts(std::move(table.values), std::move(table.labels));
}

EmpiricalCounts ingest_counts(const fs::path& path, std::optional<TableFormat> format) {
  return parse_counts(read_file(path), format.value_or(format_from_extension(path)));
}

std::string write_counts_csv(const EmpiricalCounts& counts) {
  std::ostringstream out;
  out << "category,count\n";
  for (std::size_t i = 0; i < counts.size(); ++i) {
    out << (counts.labels().empty() ? std::to_string(i) : counts.labels()[i]) << ',' << counts[i] << '\n';
  }
  return out.str();
}

Distribution parse_distribution(std::string_view text, TableFormat format) {
  auto table = parse_table<double>(
      text, format,
      [](std::string_view cell, const std::string& label) {
        const auto v = parse_real(trim(cell));
        if (!v) throw std::invalid_argument("unparseable mass for category '" + label + "'");
        if (*v < 0.0) throw std::invalid_argument("negative mass for category '" + label + "'");
        return *v;
      },
      [](const Json& v, const std::string& label) { return to_mass(v, label); });
  return Distribution(std::move(table.values), std::move(table.labels));
}

ModelSpec parse_model_spec(const Json& spec, const fs::path& base_dir) {
  if (!spec.is_object()) throw std::invalid_argument("model spec must be a JSON object");
  const std::string kind = require(spec, "kind").get<std::string>();
  ModelSpec out;
  if (kind == "singleton") {
    out.kind = ModelKind::Singleton;
    out.distributions.push_back(distribution_from(require(spec, "distribution"), base_dir));
  } else if (kind == "mixture") {
    out.kind = ModelKind::Mixture;
    const Json& comps = require(spec, "components");
    if (!comps.is_array() || comps.size() < 2) throw std::invalid_argument("mixture needs at least 2 components");
    for (const auto& c : comps) out.distributions.push_back(distribution_from(c, base_dir));
  } else if (kind == "klball") {
    out.kind = ModelKind::KlBall;
    if (spec.contains("radius")) {
      out.distributions.push_back(distribution_from(require(spec, "center"), base_dir));
      out.radius = spec.at("radius").get<double>();
      if (!(*out.radius > 0.0)) throw std::invalid_argument("KL-ball radius must be positive");
    } else {
      out.model_counts = counts_from(require(spec, "counts"), base_dir);
      out.distributions.push_back(empirical(*out.model_counts));
      if (spec.contains("epsilon")) out.model_epsilon = spec.at("epsilon").get<double>();
    }
  } else {
    throw std::invalid_argument("unknown model kind '" + kind + "'");
  }
  for (const auto& d : out.distributions) {
    if (!d.has_labels()) throw std::invalid_argument("model distributions must be labeled");
  }
  return out;
}

ModelSpec load_model_spec(const fs::path& path) {
  Json doc;
  try {
    doc = Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument("unparseable model spec: " + std::string(e.what()));
  }
  return parse_model_spec(doc, path.parent_path());
}

EmpiricalCounts align_counts(const EmpiricalCounts& counts, const std::vector<std::string>& labels) {
  std::unordered_map<std::string, std::uint64_t> by_label;
  for (std::size_t i = 0; i < counts.size(); ++i) by_label.emplace(counts.labels().at(i), counts[i]);
  std::vector<std::uint64_t> out(labels.size(), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (auto it = by_label.find(labels[i]); it != by_label.end()) out[i] = it->second;
  }
  return EmpiricalCounts(std::move(out), labels);
}

Distribution align_distribution(const Distribution& dist, const std::vector<std::string>& labels) {
  std::unordered_map<std::string, double> by_label;
  for (std::size_t i = 0; i < dist.size(); ++i) by_label.emplace(dist.labels().at(i), dist[i]);
  std::vector<double> out(labels.size(), 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (auto it = by_label.find(labels[i]); it != by_label.end()) out[i] = it->second;
  }
  return Distribution(std::move(out), labels);
}

AlignedProblem align(const EmpiricalCounts& data, const ModelSpec& spec, double epsilon) {
  if (data.labels().empty()) throw std::invalid_argument("data counts must be labeled");
  std::vector<std::string> labels;
  std::unordered_set<std::string> seen;
  append_unique(labels, seen, data.labels());
  for (const auto& d : spec.distributions) append_unique(labels, seen, d.labels());

  std::vector<Distribution> dists;
  for (const auto& d : spec.distributions) dists.push_back(align_distribution(d, labels));

  auto make_model = [&]() {
    switch (spec.kind) {
      case ModelKind::Singleton: return ModelSet::singleton(dists.front());
      case ModelKind::Mixture: return ModelSet::mixture(dists);
      case ModelKind::KlBall: break;
    }
    double radius = 0.0;
    if (spec.radius) {
      radius = *spec.radius;
    } else {
      radius = klball_radius(align_counts(*spec.model_counts, labels), spec.model_epsilon.value_or(epsilon));
    }
    return ModelSet::kl_ball(dists.front(), radius);
  };
  ModelSet model = make_model();
  EmpiricalCounts counts = align_counts(data, labels);
  return AlignedProblem{.labels = std::move(labels), .counts = std::move(counts), .model = std::move(model)};
}

std::string model_digest(const ModelSet& model) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    h ^= 0xff;
    h *= 1099511628211ULL;
  };
  auto mix_dist = [&](const Distribution& d) {
    for (std::size_t i = 0; i < d.size(); ++i) {
      mix(d.has_labels() ? d.labels()[i] : std::to_string(i));
      mix(format_double(d[i]));
    }
  };
  mix(to_string(model.kind()));
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, SingletonModel>) {
          mix_dist(m.q0);
        } else if constexpr (std::is_same_v<T, MixtureModel>) {
          for (const auto& c : m.components) mix_dist(c);
        } else {
          mix_dist(m.center);
          mix(format_double(m.radius));
        }
      },
      model.variant());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Json to_json(const RunReport& r) {
  Json j;
  j["schema_version"] = r.schema_version;
  j["artifact_version"] = r.artifact_version;
  j["command"] = r.command;
  j["inputs"] = Json{{"epsilon", number(r.epsilon)},
                     {"tolerance", number(r.tolerance)},
                     {"model_kind", r.model_kind},
                     {"model_digest", r.model_digest},
                     {"categories", r.categories},
                     {"samples", r.samples}};
  if (r.verdict) {
    j["verdict"] = Json{{"contaminated", r.verdict->contaminated},
                        {"margin", number(r.verdict->margin)},
                        {"objective", number(r.verdict->objective)},
                        {"threshold", number(r.verdict->threshold)}};
  }
  if (r.estimate) {
    const auto& e = *r.estimate;
    j["estimate"] = Json{{"alpha_lower", number(e.alpha_lower)},
                         {"kappa", number(e.kappa)},
                         {"c_lower", e.c_lower},
                         {"threshold_at_alpha", number(e.threshold_at_alpha)},
                         {"objective_at_alpha", number(e.objective_at_alpha)},
                         {"contaminated", e.contaminated},
                         {"bisection_width", number(e.bisection_width)},
                         {"solves", e.solves},
                         {"solver_converged", e.solver_converged}};
  }
  if (r.oracle) {
    const auto& o = *r.oracle;
    Json oj{{"typical", o.typical}, {"tail_probability", number(o.tail_probability)}, {"cstar", o.cstar}};
    if (o.m) oj["m"] = *o.m;
    if (o.integer_objective) oj["integer_objective"] = number(*o.integer_objective);
    if (o.removals) oj["removals"] = *o.removals;
    j["oracle"] = std::move(oj);
  }
  j["wall_time_ms"] = number(r.wall_time_ms);
  return j;
}

RunReport report_from_json(const Json& j) {
  RunReport r;
  r.schema_version = j.at("schema_version").get<int>();
  if (r.schema_version != kSchemaVersion) {
    throw std::invalid_argument("unsupported report schema_version " + std::to_string(r.schema_version));
  }
  r.artifact_version = j.at("artifact_version").get<std::string>();
  r.command = j.at("command").get<std::string>();
  const Json& in = j.at("inputs");
  r.epsilon = read_number(in.at("epsilon"));
  r.tolerance = read_number(in.at("tolerance"));
  r.model_kind = in.at("model_kind").get<std::string>();
  r.model_digest = in.at("model_digest").get<std::string>();
  r.categories = in.at("categories").get<std::size_t>();
  r.samples = in.at("samples").get<std::uint64_t>();
  if (j.contains("verdict")) {
    const Json& v = j.at("verdict");
    r.verdict = Verdict{.contaminated = v.at("contaminated").get<bool>(),
                        .margin = read_number(v.at("margin")),
                        .objective = read_number(v.at("objective")),
                        .threshold = read_number(v.at("threshold"))};
  }
  if (j.contains("estimate")) {
    const Json& e = j.at("estimate");
    r.estimate = EstimateResult{.alpha_lower = read_number(e.at("alpha_lower")),
                                .kappa = read_number(e.at("kappa")),
                                .c_lower = e.at("c_lower").get<std::uint64_t>(),
                                .threshold_at_alpha = read_number(e.at("threshold_at_alpha")),
                                .objective_at_alpha = read_number(e.at("objective_at_alpha")),
                                .contaminated = e.at("contaminated").get<bool>(),
                                .bisection_width = read_number(e.at("bisection_width")),
                                .solves = e.at("solves").get<int>(),
                                .solver_converged = e.at("solver_converged").get<bool>()};
  }
  if (j.contains("oracle")) {
    const Json& o = j.at("oracle");
    OracleReport rep{.typical = o.at("typical").get<bool>(),
                     .tail_probability = read_number(o.at("tail_probability")),
                     .cstar = o.at("cstar").get<std::uint64_t>()};
    if (o.contains("m")) rep.m = o.at("m").get<std::uint64_t>();
    if (o.contains("integer_objective")) rep.integer_objective = read_number(o.at("integer_objective"));
    if (o.contains("removals")) rep.removals = o.at("removals").get<std::vector<std::uint64_t>>();
    r.oracle = std::move(rep);
  }
  r.wall_time_ms = read_number(j.at("wall_time_ms"));
  return r;
}

std::string flatten_to_csv(const Json& json) {
  std::vector<std::pair<std::string, std::string>> cells;
  std::function<void(const std::string&, const Json&)> walk = [&](const std::string& prefix, const Json& node) {
    if (node.is_object()) {
      for (const auto& [k, v] : node.items()) walk(prefix.empty() ? k : prefix + "." + k, v);
    } else if (node.is_array()) {
      std::string joined;
      for (const auto& v : node) joined += (joined.empty() ? "" : ";") + (v.is_string() ? v.get<std::string>() : v.dump());
      cells.emplace_back(prefix, joined);
    } else if (node.is_string()) {
      cells.emplace_back(prefix, node.get<std::string>());
    } else if (node.is_number_float()) {
      cells.emplace_back(prefix, format_double(node.get<double>()));
    } else {
      cells.emplace_back(prefix, node.dump());
    }
  };
  walk("", json);
  std::string header;
  std::string values;
  for (const auto& [k, v] : cells) {
    header += (header.empty() ? "" : ",") + k;
    values += (values.empty() ? "" : ",") + v;
  }
  return header + "\n" + values + "\n";
}

std::string sweep_to_csv(std::span<const SweepRow> rows) {
  std::ostringstream out;
  out << "p,pi,family,alpha_lower,kappa,ratio,threshold,objective,wall_time_ms\n";
  for (const auto& r : rows) {
    out << r.p << ',' << format_double(r.pi) << ',' << to_string(r.family) << ',' << format_double(r.alpha_lower)
        << ',' << format_double(r.kappa) << ',' << format_double(r.ratio) << ',' << format_double(r.threshold)
        << ',' << format_double(r.objective) << ',' << format_double(r.wall_time_ms) << '\n';
  }
  return out.str();
}

Json sweep_to_json(std::span<const SweepRow> rows) {
  Json arr = Json::array();
  for (const auto& r : rows) {
    arr.push_back(Json{{"p", r.p},
                       {"pi", number(r.pi)},
                       {"family", to_string(r.family)},
                       {"alpha_lower", number(r.alpha_lower)},
                       {"kappa", number(r.kappa)},
                       {"ratio", number(r.ratio)},
                       {"threshold", number(r.threshold)},
                       {"objective", number(r.objective)},
                       {"wall_time_ms", number(r.wall_time_ms)}});
  }
  return Json{{"schema_version", kSchemaVersion}, {"artifact_version", version()}, {"rows", std::move(arr)}};
}

namespace {

struct CommonFlags {
  std::string model;
  std::string data;
  std::string reference;
  double epsilon = 0.05;
  double tol = kDefaultBisectTolerance;
  std::string format = "json";
  std::string out;
};

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write '" + path + "'");
  file << text;
}

std::string render(const RunReport& report, const std::string& format) {
  const Json j = to_json(report);
  return format == "csv" ? flatten_to_csv(j) : j.dump(2) + "\n";
}

RunReport base_report(const std::string& command, const CommonFlags& flags, const AlignedProblem& problem) {
  RunReport r;
  r.artifact_version = version();
  r.command = command;
  r.epsilon = flags.epsilon;
  r.tolerance = flags.tol;
  r.model_kind = to_string(problem.model.kind());
  r.model_digest = model_digest(problem.model);
  r.categories = problem.labels.size();
  r.samples = problem.counts.total();
  return r;
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

void add_common(CLI::App* cmd, CommonFlags& f, bool with_model, bool with_tol) {
  if (with_model) cmd->add_option("--model", f.model, "model spec (JSON)")->required();
  cmd->add_option("--data", f.data, "counts file (category,count CSV or JSON object)")->required();
  cmd->add_option("--epsilon", f.epsilon, "significance level in (0,1)")->capture_default_str();
  if (with_tol) cmd->add_option("--tol", f.tol, "bisection tolerance on alpha")->capture_default_str();
  cmd->add_option("--format", f.format, "report format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  cmd->add_option("--out", f.out, "write the report here instead of standard output");
}

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* what) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = trim(item);
    if constexpr (std::is_same_v<T, double>) {
      auto v = parse_real(t);
      if (!v) throw std::invalid_argument(std::string("bad ") + what + " value '" + t + "'");
      out.push_back(*v);
    } else {
      auto v = parse_uint(t);
      if (!v) {
        // Accept 1e6-style sample sizes when they are exact integers.
        auto r = parse_real(t);
        if (!r || *r < 0 || std::floor(*r) != *r) throw std::invalid_argument(std::string("bad ") + what + " value '" + t + "'");
        v = static_cast<std::uint64_t>(*r);
      }
      out.push_back(*v);
    }
  }
  if (out.empty()) throw std::invalid_argument(std::string("empty ") + what + " list");
  return out;
}

}  // namespace

int run_command(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Certified lower bounds on the contamination level of categorical data", "contam"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(version()));

  CommonFlags test_f, est_f, two_f, orc_f;
  auto* test_cmd = app.add_subcommand("test", "goodness-of-fit contamination test at alpha = 0");
  add_common(test_cmd, test_f, true, false);

  auto* est_cmd = app.add_subcommand("estimate", "lower bound alpha_L on the contaminated fraction");
  add_common(est_cmd, est_f, true, true);

  auto* two_cmd = app.add_subcommand("twosample", "test data against a reference sample");
  add_common(two_cmd, two_f, false, true);
  two_cmd->add_option("--reference", two_f.reference, "reference counts file")->required();

  auto* orc_cmd = app.add_subcommand("oracle", "exact typicality, c* and integer program by enumeration");
  add_common(orc_cmd, orc_f, true, false);
  std::optional<std::uint64_t> orc_m;
  orc_cmd->add_option("--m", orc_m, "also solve the integer program removing m samples");

  std::string sw_family = "spike", sw_p, sw_pi, sw_format = "csv", sw_out;
  std::size_t sw_n = 11;
  double sw_eps = 0.05, sw_tol = kDefaultBisectTolerance;
  unsigned sw_threads = 0;
  auto* sw_cmd = app.add_subcommand("sweep", "alpha_L / kappa over a grid of sample sizes and proportions");
  sw_cmd->add_option("--family", sw_family)->check(CLI::IsMember({"dip", "spike"}))->capture_default_str();
  sw_cmd->add_option("--n", sw_n, "number of categories")->capture_default_str();
  sw_cmd->add_option("--epsilon", sw_eps)->capture_default_str();
  sw_cmd->add_option("--tol", sw_tol)->capture_default_str();
  sw_cmd->add_option("--p", sw_p, "comma-separated sample sizes")->required();
  sw_cmd->add_option("--pi", sw_pi, "comma-separated mixture proportions")->required();
  sw_cmd->add_option("--threads", sw_threads, "worker threads (0 = all cores)");
  sw_cmd->add_option("--format", sw_format)->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  sw_cmd->add_option("--out", sw_out);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << version() << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << one_line(e.what()) << "\n";
    return kExitError;
  }

  try {
    const auto start = std::chrono::steady_clock::now();
    if (test_cmd->parsed()) {
      const auto problem = align(ingest_counts(test_f.data), load_model_spec(test_f.model), test_f.epsilon);
      RunReport report = base_report("test", test_f, problem);
      report.tolerance = kDefaultSolverTolerance;
      report.verdict = is_contaminated(problem.counts, problem.model, test_f.epsilon);
      report.wall_time_ms = elapsed_ms(start);
      emit(render(report, test_f.format), test_f.out, out);
      return report.verdict->contaminated ? kExitContaminated : kExitOk;
    }
    if (est_cmd->parsed()) {
      const auto problem = align(ingest_counts(est_f.data), load_model_spec(est_f.model), est_f.epsilon);
      RunReport report = base_report("estimate", est_f, problem);
      report.estimate = estimate_alpha_lower(problem.counts, problem.model, est_f.epsilon,
                                             EstimateOptions{.bisect_tol = est_f.tol});
      report.wall_time_ms = elapsed_ms(start);
      emit(render(report, est_f.format), est_f.out, out);
      return kExitOk;
    }
    if (two_cmd->parsed()) {
      ModelSpec spec;
      spec.kind = ModelKind::KlBall;
      spec.model_counts = ingest_counts(two_f.reference);
      spec.distributions.push_back(empirical(*spec.model_counts));
      spec.model_epsilon = two_f.epsilon;
      const auto problem = align(ingest_counts(two_f.data), spec, two_f.epsilon);
      RunReport report = base_report("twosample", two_f, problem);
      report.estimate = estimate_alpha_lower(problem.counts, problem.model, two_f.epsilon,
                                             EstimateOptions{.bisect_tol = two_f.tol});
      report.wall_time_ms = elapsed_ms(start);
      emit(render(report, two_f.format), two_f.out, out);
      return kExitOk;
    }
    if (orc_cmd->parsed()) {
      const auto problem = align(ingest_counts(orc_f.data), load_model_spec(orc_f.model), orc_f.epsilon);
      const auto* single = problem.model.get_if<SingletonModel>();
      if (!single) throw std::invalid_argument("oracle supports singleton models only");
      RunReport report = base_report("oracle", orc_f, problem);
      report.tolerance = 0.0;
      const auto typ = oracle::exact_typicality(problem.counts, single->q0, orc_f.epsilon);
      OracleReport rep{.typical = typ.typical,
                       .tail_probability = typ.tail_probability,
                       .cstar = oracle::exact_cstar(problem.counts, single->q0, orc_f.epsilon)};
      if (orc_m) {
        const auto ip = oracle::integer_program_exact(problem.counts, single->q0, *orc_m);
        rep.m = *orc_m;
        rep.integer_objective = ip.objective;
        rep.removals = ip.argmin.removals;
      }
      report.oracle = std::move(rep);
      report.wall_time_ms = elapsed_ms(start);
      emit(render(report, orc_f.format), orc_f.out, out);
      return kExitOk;
    }
    if (sw_cmd->parsed()) {
      SweepConfig config{.p_grid = parse_list<std::uint64_t>(sw_p, "--p"),
                         .pi_grid = parse_list<double>(sw_pi, "--pi"),
                         .family = parse_family(sw_family),
                         .n = sw_n,
                         .epsilon = sw_eps,
                         .bisect_tol = sw_tol,
                         .threads = sw_threads};
      const auto rows = sweep(config);
      emit(sw_format == "csv" ? sweep_to_csv(rows) : sweep_to_json(rows).dump(2) + "\n", sw_out, out);
      return kExitOk;
    }
  } catch (const std::exception& e) {
    err << "error: " << one_line(e.what()) << "\n";
    return kExitError;
  }
  err << "error: no command\n";
  return kExitError;
}

}  // namespace contam::cli
