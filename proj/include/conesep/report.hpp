#pragma once

#include <json.hpp>

#include <string>

namespace conesep {

/// Structured record of an inequality-verification run. pass/fail is always
/// recomputable from the recorded numbers; wall_time_ms is kept out of the
/// serialized form unless explicitly requested so reports stay bit-for-bit
/// reproducible under a fixed seed.
struct ExperimentReport {
  std::string name;
  nlohmann::json config = nlohmann::json::object();
  nlohmann::json observed = nlohmann::json::object();
  nlohmann::json bounds = nlohmann::json::object();
  nlohmann::json margins = nlohmann::json::object();
  nlohmann::json trials = nlohmann::json::array();
  nlohmann::json aggregate = nlohmann::json::object();
  /// When set, fixes the CSV column order; otherwise columns are sorted keys.
  std::vector<std::string> csv_columns;
  bool pass = true;
  double wall_time_ms = 0.0;

  nlohmann::json to_json(bool with_timing = false) const;
  std::string to_json_string(bool with_timing = false) const;
  /// Per-trial table; columns are the sorted keys of the trial records,
  /// floats at 17 significant digits.
  std::string to_csv() const;
};

std::string format_double_17(double v);

} // namespace conesep
