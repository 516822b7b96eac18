// Dataset files: one JSON header line, then one instance record per line.
// Output is canonical (sorted keys, compact), so load + save is byte-identical.

#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "abd/generator.hpp"

namespace abd {

inline constexpr int kDatasetVersion = 1;

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DatasetHeader {
  Regime scenario = Regime::Full;
  std::string params_digest;
  // Generation knobs needed to re-audit the records.
  std::optional<int> world_budget, margin, holdouts, min_worlds;
  bool refine_gold = false;
  std::uint64_t global_seed = 0;
};

struct Dataset {
  DatasetHeader header;
  std::vector<InstanceRecord> instances;
};

DatasetHeader header_for(const BatchParams& b);
// Batch parameters implied by a header, for audits.
BatchParams batch_params(const DatasetHeader& h);
GenParams params_for(const DatasetHeader& h, TheoryId theory);

nlohmann::json world_to_json(const World& w);
World world_from_json(const nlohmann::json& j);
nlohmann::json instance_to_json(const InstanceRecord& inst);
InstanceRecord instance_from_json(const nlohmann::json& j);
nlohmann::json header_to_json(const DatasetHeader& h);
DatasetHeader header_from_json(const nlohmann::json& j);

void write_dataset(std::ostream& out, const Dataset& ds);
void save_dataset(const std::string& path, const Dataset& ds);

struct LoadOptions {
  bool audit = true;  // re-run audit_instance on every record
};
// Throws DatasetError with the line number on malformed input or failed audit.
Dataset read_dataset(std::istream& in, const LoadOptions& opt = {});
Dataset load_dataset(const std::string& path, const LoadOptions& opt = {});

}  // namespace abd
