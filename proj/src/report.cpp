#include "conesep/report.hpp"

#include "conesep/version.hpp"

#include <cstdio>
#include <set>

namespace conesep {

nlohmann::json ExperimentReport::to_json(bool with_timing) const {
  nlohmann::json j;
  j["name"] = name;
  j["library_version"] = kLibraryVersion;
  j["config"] = config;
  j["observed"] = observed;
  j["bounds"] = bounds;
  j["margins"] = margins;
  j["trials"] = trials;
  j["aggregate"] = aggregate;
  j["pass"] = pass;
  if (with_timing) j["wall_time_ms"] = wall_time_ms;
  return j;
}

std::string ExperimentReport::to_json_string(bool with_timing) const {
  return to_json(with_timing).dump(2) + "\n";
}

std::string format_double_17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string ExperimentReport::to_csv() const {
  std::string out;
  if (trials.empty()) return out;
  std::vector<std::string> keys(csv_columns);
  if (keys.empty()) {
    std::set<std::string> sorted;
    for (const auto& t : trials)
      for (auto it = t.begin(); it != t.end(); ++it) sorted.insert(it.key());
    keys.assign(sorted.begin(), sorted.end());
  }
  bool first = true;
  for (const auto& k : keys) {
    if (!first) out += ',';
    out += k;
    first = false;
  }
  out += '\n';
  for (const auto& t : trials) {
    first = true;
    for (const auto& k : keys) {
      if (!first) out += ',';
      first = false;
      if (!t.contains(k)) continue;
      const auto& v = t.at(k);
      if (v.is_number_float()) out += format_double_17(v.get<double>());
      else if (v.is_boolean()) out += v.get<bool>() ? "1" : "0";
      else if (v.is_string()) out += v.get<std::string>();
      else out += v.dump();
    }
    out += '\n';
  }
  return out;
}

} // namespace conesep
