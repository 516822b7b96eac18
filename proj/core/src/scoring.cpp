#include "abd/scoring.hpp"

#include <array>

namespace abd {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<FailureClass, const char*>, 6> kClassNames{{
    {FailureClass::ParseError, "ParseError"},
    {FailureClass::AllInvalidTrain, "AllInvalidTrain"},
    {FailureClass::PartialInvalidTrain, "PartialInvalidTrain"},
    {FailureClass::Brittle, "Brittle"},
    {FailureClass::ParsimonyInflation, "ParsimonyInflation"},
    {FailureClass::Success, "Success"},
}};

ScoreRecord base_record(const InstanceRecord& inst) {
  ScoreRecord s;
  s.instance_id = inst.id;
  s.scenario = inst.scenario;
  s.theory = inst.theory;
  s.gold_ast_size = formula_metrics(parse_formula(inst.gold)).ast_size;
  s.gold_cost = inst.gold_total();
  for (int o : inst.opt_cost) s.train_opt += o;
  s.per_world_valid.assign(inst.worlds.size(), false);
  s.holdout_available = inst.holdout_available && !inst.holdouts.empty();
  s.holdout_worlds = s.holdout_available ? static_cast<int>(inst.holdouts.size()) : 0;
  return s;
}

void finish(ScoreRecord& s, const ScoringConfig& cfg) {
  bool cat = false;
  s.failure = classify_failure(s, cfg, &cat);
  s.catastrophic = cat;
}

template <class T>
json opt_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <class T>
std::optional<T> opt_get(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace

const char* failure_class_name(FailureClass c) {
  for (const auto& [k, n] : kClassNames)
    if (k == c) return n;
  return "?";
}

std::optional<FailureClass> failure_class_from_name(std::string_view s) {
  for (const auto& [k, n] : kClassNames)
    if (s == n) return k;
  return std::nullopt;
}

ParsedLine parse_prediction(std::string_view line) {
  ParsedLine r;
  if (line.find('\n') != std::string_view::npos) {
    r.error = "output spans several lines";
    return r;
  }
  json j;
  try {
    // parse() rejects trailing content, so two objects on a line fail here.
    j = json::parse(line);
  } catch (const json::exception&) {
    r.error = "not a single JSON object";
    return r;
  }
  if (!j.is_object()) {
    r.error = "not a JSON object";
    return r;
  }
  if (j.size() != 2 || !j.contains("formula") || !j.contains("description")) {
    r.error = "keys must be exactly formula and description";
    return r;
  }
  if (!j["formula"].is_string() || !j["description"].is_string()) {
    r.error = "formula and description must be strings";
    return r;
  }
  r.prediction = Prediction{"", "", j["formula"].get<std::string>(), j["description"].get<std::string>()};
  return r;
}

FailureClass classify_failure(const ScoreRecord& s, const ScoringConfig& cfg, bool* catastrophic) {
  if (catastrophic) *catastrophic = false;
  if (!s.parse_ok) return FailureClass::ParseError;
  if (s.train_valid_count == 0) return FailureClass::AllInvalidTrain;
  if (!s.train_valid) return FailureClass::PartialInvalidTrain;
  if (s.holdout_available && s.holdout_valid_count < s.holdout_worlds) {
    if (catastrophic)
      *catastrophic = double(s.holdout_valid_count) / s.holdout_worlds < cfg.catastrophic_fraction;
    return FailureClass::Brittle;
  }
  if (s.survivor && s.delta_gap && *s.delta_gap > cfg.inflation_threshold) return FailureClass::ParsimonyInflation;
  return FailureClass::Success;
}

ScoreRecord parse_failure_record(const std::string& error, const InstanceRecord& inst) {
  ScoreRecord s = base_record(inst);
  s.error = error;
  finish(s, {});
  return s;
}

ScoreRecord score_formula(const std::string& formula, const InstanceRecord& inst, const ScoringConfig& cfg) {
  ScoreRecord s = base_record(inst);
  s.formula = formula;
  const TheorySpec& th = inst.theory_spec();

  std::optional<Formula> f;
  try {
    f = parse_formula(formula, ParseOptions{.allow_implies = true});
  } catch (const FormulaError& e) {
    s.error = std::string("parse: ") + e.what();
    finish(s, cfg);
    return s;
  }
  s.parse_ok = true;
  const FormulaMetrics m = formula_metrics(*f);
  s.ast_size = m.ast_size;
  s.quantifier_depth = m.quantifier_depth;

  std::optional<Hypothesis> h;
  try {
    h = validate_hypothesis(*f, th.scope);
  } catch (const ScopeError& e) {
    // Out-of-scope formulas are invalid everywhere.
    s.error = std::string("scope: ") + e.what();
    finish(s, cfg);
    return s;
  }

  const int W = static_cast<int>(inst.worlds.size());
  int cost = 0;
  for (int k = 0; k < W; ++k) {
    const WorldResult r = evaluate_world(inst.scenario, th, inst.worlds[k], *h);
    s.per_world_valid[k] = r.valid;
    if (r.valid) {
      ++s.train_valid_count;
      cost += *r.cost;
    }
  }
  s.train_valid = W > 0 && s.train_valid_count == W;
  if (s.train_valid) {
    s.train_cost = cost;
    s.gap = double(cost - s.train_opt) / W;
    s.gold_margin = cost - s.gold_cost;
    s.gap_gold = double(cost - s.gold_cost) / W;
    s.beats_gold = cost < s.gold_cost;
  }

  if (s.holdout_available) {
    int hcost = 0, hopt = 0;
    for (std::size_t k = 0; k < inst.holdouts.size(); ++k) {
      const WorldResult r = evaluate_world(inst.scenario, th, inst.holdouts[k], *h);
      if (r.valid) {
        ++s.holdout_valid_count;
        hcost += *r.cost;
      }
      hopt += inst.holdout_opt_cost[k];
    }
    s.holdout_valid = s.holdout_valid_count == s.holdout_worlds;
    if (s.holdout_valid) {
      s.holdout_cost = hcost;
      s.holdout_gap = double(hcost - hopt) / s.holdout_worlds;
    }
    s.survivor = s.train_valid && s.holdout_valid;
    if (s.survivor) s.delta_gap = *s.holdout_gap - *s.gap;
  }
  finish(s, cfg);
  return s;
}

ScoreRecord score_prediction(const Prediction& p, const InstanceRecord& inst, const ScoringConfig& cfg) {
  ScoreRecord s = score_formula(p.formula, inst, cfg);
  s.model_id = p.model_id;
  return s;
}

json score_to_json(const ScoreRecord& s) {
  return {{"instance_id", s.instance_id},
          {"model_id", s.model_id},
          {"scenario", regime_name(s.scenario)},
          {"theory", builtin_theory(s.theory).short_id},
          {"formula", s.formula},
          {"parse_ok", s.parse_ok},
          {"error", s.error},
          {"ast_size", s.ast_size},
          {"quantifier_depth", s.quantifier_depth},
          {"gold_ast_size", s.gold_ast_size},
          {"per_world_valid", s.per_world_valid},
          {"train_valid_count", s.train_valid_count},
          {"train_valid", s.train_valid},
          {"train_cost", opt_json(s.train_cost)},
          {"train_opt", s.train_opt},
          {"gap", opt_json(s.gap)},
          {"gold_cost", s.gold_cost},
          {"gap_gold", opt_json(s.gap_gold)},
          {"gold_margin", opt_json(s.gold_margin)},
          {"beats_gold", s.beats_gold},
          {"holdout_available", s.holdout_available},
          {"holdout_worlds", s.holdout_worlds},
          {"holdout_valid_count", s.holdout_valid_count},
          {"holdout_valid", s.holdout_valid},
          {"holdout_cost", opt_json(s.holdout_cost)},
          {"holdout_gap", opt_json(s.holdout_gap)},
          {"survivor", s.survivor},
          {"delta_gap", opt_json(s.delta_gap)},
          {"failure_class", failure_class_name(s.failure)},
          {"catastrophic", s.catastrophic}};
}

ScoreRecord score_from_json(const json& j) {
  ScoreRecord s;
  s.instance_id = j.at("instance_id").get<std::string>();
  s.model_id = j.at("model_id").get<std::string>();
  const auto sc = regime_from_name(j.at("scenario").get<std::string>());
  if (!sc) throw std::runtime_error("unknown scenario in score record");
  s.scenario = *sc;
  s.theory = theory_id_from_name(j.at("theory").get<std::string>());
  s.formula = j.at("formula").get<std::string>();
  s.parse_ok = j.at("parse_ok").get<bool>();
  s.error = j.at("error").get<std::string>();
  s.ast_size = j.at("ast_size").get<int>();
  s.quantifier_depth = j.at("quantifier_depth").get<int>();
  s.gold_ast_size = j.at("gold_ast_size").get<int>();
  s.per_world_valid = j.at("per_world_valid").get<std::vector<bool>>();
  s.train_valid_count = j.at("train_valid_count").get<int>();
  s.train_valid = j.at("train_valid").get<bool>();
  s.train_cost = opt_get<int>(j, "train_cost");
  s.train_opt = j.at("train_opt").get<int>();
  s.gap = opt_get<double>(j, "gap");
  s.gold_cost = j.at("gold_cost").get<int>();
  s.gap_gold = opt_get<double>(j, "gap_gold");
  s.gold_margin = opt_get<int>(j, "gold_margin");
  s.beats_gold = j.at("beats_gold").get<bool>();
  s.holdout_available = j.at("holdout_available").get<bool>();
  s.holdout_worlds = j.at("holdout_worlds").get<int>();
  s.holdout_valid_count = j.at("holdout_valid_count").get<int>();
  s.holdout_valid = j.at("holdout_valid").get<bool>();
  s.holdout_cost = opt_get<int>(j, "holdout_cost");
  s.holdout_gap = opt_get<double>(j, "holdout_gap");
  s.survivor = j.at("survivor").get<bool>();
  s.delta_gap = opt_get<double>(j, "delta_gap");
  const auto fc = failure_class_from_name(j.at("failure_class").get<std::string>());
  if (!fc) throw std::runtime_error("unknown failure class in score record");
  s.failure = *fc;
  s.catastrophic = j.at("catastrophic").get<bool>();
  return s;
}

}  // namespace abd
