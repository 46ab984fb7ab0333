#include "warmgp/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "warmgp/common.hpp"

namespace warmgp {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<double> to_vector(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

}  // namespace

ReportFormat report_format_from_string(const std::string& name) {
  if (name == "json") return ReportFormat::Json;
  if (name == "csv") return ReportFormat::Csv;
  throw std::invalid_argument("unknown report format: " + name);
}

nlohmann::json to_json(const OptTrace& trace) {
  nlohmann::json steps = nlohmann::json::array();
  for (const StepRecord& rec : trace.steps) {
    steps.push_back({{"step", rec.step},
                     {"raw_params", to_vector(rec.raw_params)},
                     {"constrained_params", to_vector(rec.constrained_params)},
                     {"gradient", to_vector(rec.gradient)},
                     {"solver_iterations", rec.solver_iterations},
                     {"solver_seconds", rec.solver_seconds},
                     {"cumulative_seconds", rec.cumulative_seconds},
                     {"per_column_relative_residual", to_vector(rec.per_column_relative_residual)},
                     {"warm_start_distance", rec.warm_start_distance}});
  }
  return {{"steps", steps}};
}

nlohmann::json to_json(const ExperimentResult& result) {
  nlohmann::json runs = nlohmann::json::array();
  for (const RunRecord& rec : result.runs) {
    nlohmann::json run = {{"label", rec.label},
                          {"solver", to_string(rec.solver)},
                          {"mode", to_string(rec.mode)},
                          {"split_index", rec.split_index},
                          {"split_seed", rec.split_seed},
                          {"train_seed", rec.train_seed},
                          {"test_rmse", rec.test_rmse},
                          {"test_llh", rec.test_llh},
                          {"total_runtime_seconds", rec.total_runtime_seconds},
                          {"solver_runtime_seconds", rec.solver_runtime_seconds},
                          {"per_step_iterations", rec.per_step_iterations},
                          {"final_constrained", to_vector(rec.final_constrained)}};
    if (!rec.trace.steps.empty()) run["trace"] = to_json(rec.trace);
    runs.push_back(std::move(run));
  }

  nlohmann::json summaries;
  for (const auto& [label, summary] : result.summaries) {
    summaries[label] = {
        {"test_rmse", {{"mean", summary.rmse.mean}, {"standard_error", summary.rmse.standard_error}}},
        {"test_llh", {{"mean", summary.llh.mean}, {"standard_error", summary.llh.standard_error}}},
        {"total_runtime_seconds",
         {{"mean", summary.total_runtime.mean}, {"standard_error", summary.total_runtime.standard_error}}},
        {"solver_runtime_seconds",
         {{"mean", summary.solver_runtime.mean}, {"standard_error", summary.solver_runtime.standard_error}}}};
  }

  return {{"dataset", result.dataset},
          {"splits", result.splits},
          {"train_fraction", result.train_fraction},
          {"runs", runs},
          {"summaries", summaries},
          {"speed_up", result.speed_up}};
}

nlohmann::json to_json(const BoundReport& report) {
  return {{"n", report.n},
          {"s", report.s},
          {"distribution", to_string(report.distribution)},
          {"trials", report.trials},
          {"empirical_mean", report.empirical_mean},
          {"theoretical_value", report.theoretical_value},
          {"standard_error", report.standard_error},
          {"z_score", report.z_score}};
}

nlohmann::json to_json(const GradientErrorTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const GradientErrorRow& row : table.rows) {
    rows.push_back({{"s", row.s},
                    {"trials", row.trials},
                    {"q50", row.q50},
                    {"q90", row.q90},
                    {"max_error", row.max_error},
                    {"mean_estimate", to_vector(row.mean_estimate)},
                    {"standard_error", to_vector(row.standard_error)}});
  }
  return {{"exact_gradient", to_vector(table.exact)}, {"rows", rows}};
}

void write_json_file(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failure on " + path);
}

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(path + ": " + e.what());
  }
  return j;
}

void emit_report(const ExperimentResult& result, const std::string& path, ReportFormat format) {
  if (format == ReportFormat::Json) {
    write_json_file(to_json(result), path);
    return;
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "dataset,label,solver,mode,split_index,split_seed,train_seed,test_rmse,test_llh,"
         "total_runtime_seconds,solver_runtime_seconds,total_iterations\n";
  for (const RunRecord& rec : result.runs) {
    long total_iters = 0;
    for (int it : rec.per_step_iterations) total_iters += it;
    out << result.dataset << ',' << rec.label << ',' << to_string(rec.solver) << ','
        << to_string(rec.mode) << ',' << rec.split_index << ',' << rec.split_seed << ','
        << rec.train_seed << ',' << format_double(rec.test_rmse) << ','
        << format_double(rec.test_llh) << ',' << format_double(rec.total_runtime_seconds) << ','
        << format_double(rec.solver_runtime_seconds) << ',' << total_iters << '\n';
  }
  if (!out) throw IoError("write failure on " + path);
}

CsvTable load_csv_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (first) {
      table.header = std::move(fields);
      first = false;
    } else {
      table.rows.push_back(std::move(fields));
    }
  }
  return table;
}

const std::vector<std::string>& wall_time_keys() {
  static const std::vector<std::string> keys = {
      "solver_seconds",        "cumulative_seconds",      "total_runtime_seconds",
      "solver_runtime_seconds", "speed_up"};
  return keys;
}

nlohmann::json strip_wall_time_fields(nlohmann::json j) {
  if (j.is_object()) {
    for (const std::string& key : wall_time_keys()) j.erase(key);
    for (auto& [key, value] : j.items()) value = strip_wall_time_fields(value);
  } else if (j.is_array()) {
    for (auto& value : j) value = strip_wall_time_fields(value);
  }
  return j;
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  std::map<std::string, std::string> out;
  std::string line;
  int line_number = 0;
  auto trim = [](const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw IoError(path + ": line " + std::to_string(line_number) + " is not 'key = value'");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw IoError(path + ": line " + std::to_string(line_number) + " has an empty key");
    out[key] = value;
  }
  return out;
}

}  // namespace warmgp
