#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "warmgp/common.hpp"
#include "warmgp/bounds.hpp"
#include "warmgp/experiment.hpp"
#include "warmgp/optimizer.hpp"

namespace warmgp {

enum class ReportFormat { Json, Csv };

ReportFormat report_format_from_string(const std::string& name);

nlohmann::json to_json(const OptTrace& trace);
nlohmann::json to_json(const ExperimentResult& result);
nlohmann::json to_json(const BoundReport& report);
nlohmann::json to_json(const GradientErrorTable& table);

/// Writes an experiment result to disk. JSON carries the full nested record
/// including per-step traces; CSV is a flat per-(config, split) table with
/// 17-significant-digit numerics.
void emit_report(const ExperimentResult& result, const std::string& path, ReportFormat format);

void write_json_file(const nlohmann::json& j, const std::string& path);
nlohmann::json load_json_file(const std::string& path);

/// Parses a CSV emitted by emit_report back into (header, numeric-or-string
/// cell) rows; numeric cells round-trip bit-exactly.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
CsvTable load_csv_table(const std::string& path);

/// Keys holding wall-clock measurements (and quantities derived from them);
/// reports are byte-identical across reruns once these are erased.
const std::vector<std::string>& wall_time_keys();

/// Recursively removes wall-time keys; used for determinism comparisons.
nlohmann::json strip_wall_time_fields(nlohmann::json j);

/// Flat `key = value` config file; '#' starts a comment.
std::map<std::string, std::string> parse_config_file(const std::string& path);

}  // namespace warmgp
