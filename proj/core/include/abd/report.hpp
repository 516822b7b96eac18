// Aggregate tables over score records. Each table has one row per model
// (plus "ALL") and grouping key; rates are percentages, gaps are
// per-world normalized means over the records where they are defined.

#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "abd/scoring.hpp"

namespace abd {

struct Table {
  std::string name;  // file stem
  std::string title;
  std::vector<std::string> columns;
  std::vector<nlohmann::json> rows;  // objects keyed by column; null = undefined

  nlohmann::json to_json() const;
  std::string to_text() const;
  const nlohmann::json* find(const std::vector<std::pair<std::string, std::string>>& key) const;
};

inline constexpr const char* kAllModels = "ALL";

// Throws std::invalid_argument on an empty record set.
std::vector<Table> build_report(const std::vector<ScoreRecord>& records);

// Writes <dir>/<name>.json and <dir>/<name>.txt per table.
void write_report(const std::string& dir, const std::vector<Table>& tables);

// Linear-interpolated percentile (p in [0, 1]) of unsorted values.
double percentile(std::vector<double> v, double p);

}  // namespace abd
