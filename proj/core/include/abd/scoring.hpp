// Scoring model predictions against instances and classifying failures.

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "abd/generator.hpp"

namespace abd {

struct Prediction {
  std::string instance_id;
  std::string model_id;
  std::string formula;
  std::string description;
};

// Strict one-line parse: exactly one JSON object with string fields
// "formula" and "description" and nothing else.
struct ParsedLine {
  std::optional<Prediction> prediction;  // ids left empty
  std::string error;                     // set when prediction is empty
};
ParsedLine parse_prediction(std::string_view line);

enum class FailureClass { ParseError, AllInvalidTrain, PartialInvalidTrain, Brittle, ParsimonyInflation, Success };
const char* failure_class_name(FailureClass c);
std::optional<FailureClass> failure_class_from_name(std::string_view s);

struct ScoringConfig {
  double inflation_threshold = 2.0;   // delta gap above this is inflation
  double catastrophic_fraction = 0.5; // holdout-valid fraction below this is catastrophic
};

struct ScoreRecord {
  std::string instance_id;
  std::string model_id;
  Regime scenario = Regime::Full;
  TheoryId theory = TheoryId::T1;
  std::string formula;  // as submitted
  bool parse_ok = false;
  std::string error;    // parse or scope problem

  int ast_size = 0;
  int quantifier_depth = 0;
  int gold_ast_size = 0;

  std::vector<bool> per_world_valid;
  int train_valid_count = 0;
  bool train_valid = false;
  std::optional<int> train_cost;
  int train_opt = 0;
  std::optional<double> gap;  // (cost - opt) / worlds
  int gold_cost = 0;
  std::optional<double> gap_gold;    // (cost - gold) / worlds
  std::optional<int> gold_margin;    // cost - gold cost
  bool beats_gold = false;

  bool holdout_available = false;
  int holdout_worlds = 0;
  int holdout_valid_count = 0;
  bool holdout_valid = false;
  std::optional<int> holdout_cost;
  std::optional<double> holdout_gap;
  bool survivor = false;
  std::optional<double> delta_gap;  // survivors only

  FailureClass failure = FailureClass::ParseError;
  bool catastrophic = false;  // Brittle only
};

FailureClass classify_failure(const ScoreRecord& s, const ScoringConfig& cfg = {}, bool* catastrophic = nullptr);

// Scores a formula string (already extracted from the model output).
ScoreRecord score_formula(const std::string& formula, const InstanceRecord& inst, const ScoringConfig& cfg = {});
ScoreRecord score_prediction(const Prediction& p, const InstanceRecord& inst, const ScoringConfig& cfg = {});
// Record for an output line that failed parse_prediction.
ScoreRecord parse_failure_record(const std::string& error, const InstanceRecord& inst);

nlohmann::json score_to_json(const ScoreRecord& s);
ScoreRecord score_from_json(const nlohmann::json& j);

}  // namespace abd
