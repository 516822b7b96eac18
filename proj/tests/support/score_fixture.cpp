#include "score_fixture.hpp"

#include <cmath>
#include <optional>
#include <sstream>

namespace abd::testing {

namespace {

struct Spec {
  const char* id;
  int ast;
  int valid;  // training worlds valid out of 10
  std::optional<double> gap;
  std::optional<int> margin;
  int holdout_valid;  // out of 5; -1 = no holdouts
  std::optional<double> hgap;
};

ScoreRecord make(const Spec& s, bool parse_ok) {
  ScoreRecord r;
  r.instance_id = s.id;
  r.model_id = "m1";
  r.scenario = Regime::Full;
  r.theory = TheoryId::T1;
  r.parse_ok = parse_ok;
  r.gold_ast_size = 10;
  r.gold_cost = 12;
  r.train_opt = 10;
  r.per_world_valid.assign(10, false);
  if (!parse_ok) return r;
  r.ast_size = s.ast;
  for (int k = 0; k < s.valid; ++k) r.per_world_valid[k] = true;
  r.train_valid_count = s.valid;
  r.train_valid = s.valid == 10;
  if (r.train_valid) {
    r.gap = s.gap;
    r.train_cost = r.train_opt + static_cast<int>(std::lround(*s.gap * 10));
    r.gold_margin = s.margin;
    r.gap_gold = *s.margin / 10.0;
    r.beats_gold = *s.margin < 0;
  }
  if (s.holdout_valid >= 0) {
    r.holdout_available = true;
    r.holdout_worlds = 5;
    r.holdout_valid_count = s.holdout_valid;
    r.holdout_valid = s.holdout_valid == 5;
    if (r.holdout_valid) r.holdout_gap = s.hgap;
    r.survivor = r.train_valid && r.holdout_valid;
    if (r.survivor) r.delta_gap = *s.hgap - *s.gap;
  }
  return r;
}

bool close(const nlohmann::json& v, double want) {
  return v.is_number() && std::fabs(v.get<double>() - want) < 1e-9;
}

}  // namespace

// Problems A and B have shorter and longer predictions (gold AST 10);
// problem C only shorter ones, so the paired table skips it.
std::vector<FixtureRecord> scoring_fixture() {
  using FC = FailureClass;
  std::vector<FixtureRecord> v;
  v.push_back({make({"A", 0, 0, {}, {}, -1, {}}, false), FC::ParseError});
  v.push_back({make({"A", 8, 0, {}, {}, 0, {}}, true), FC::AllInvalidTrain});
  v.push_back({make({"A", 12, 4, {}, {}, 3, {}}, true), FC::PartialInvalidTrain});
  v.push_back({make({"A", 6, 10, 0.2, -3, 2, {}}, true), FC::Brittle, true});
  v.push_back({make({"A", 15, 10, 0.5, 2, 4, {}}, true), FC::Brittle, false});
  v.push_back({make({"A", 20, 10, 0.1, 1, 5, 2.7}, true), FC::ParsimonyInflation});
  v.push_back({make({"A", 9, 10, 0.0, 0, 5, 0.3}, true), FC::Success});
  v.push_back({make({"B", 12, 10, 0.4, 2, 5, 0.4}, true), FC::Success});
  v.push_back({make({"B", 7, 10, 0.3, 1, -1, {}}, true), FC::Success});
  v.push_back({make({"B", 10, 10, 0.2, 1, 5, 0.2}, true), FC::Success});
  v.push_back({make({"C", 5, 10, 1.0, 4, 5, 1.5}, true), FC::Success});
  return v;
}

std::vector<ScoreRecord> classified_fixture() {
  std::vector<ScoreRecord> out;
  for (const FixtureRecord& f : scoring_fixture()) {
    ScoreRecord r = f.record;
    bool cat = false;
    r.failure = classify_failure(r, {}, &cat);
    r.catastrophic = cat;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<std::string> check_fixture_report(const std::vector<Table>& tables) {
  std::vector<std::string> bad;
  auto table = [&](const std::string& name) -> const Table* {
    for (const Table& t : tables)
      if (t.name == name) return &t;
    bad.push_back("missing table " + name);
    return nullptr;
  };
  auto expect = [&](const Table* t, const std::vector<std::pair<std::string, std::string>>& key, const std::string& col,
                    std::optional<double> want) {
    if (!t) return;
    std::ostringstream where;
    where << t->name;
    for (const auto& [k, v] : key) where << " " << k << "=" << v;
    where << " " << col;
    const nlohmann::json* row = t->find(key);
    if (!row) {
      bad.push_back(where.str() + ": row missing");
      return;
    }
    const nlohmann::json& v = row->contains(col) ? row->at(col) : nlohmann::json();
    const bool ok = want ? close(v, *want) : v.is_null();
    if (!ok) bad.push_back(where.str() + ": got " + v.dump());
  };

  for (const char* model : {"m1", kAllModels}) {
    const std::string m = model;

    // Seven train-valid records have holdouts; five of them survive.
    // Survivor delta gaps: 2.6, 0.3, 0, 0, 0.5.
    const Table* cond = table("holdout_conditional");
    expect(cond, {{"model", m}, {"scenario", "overall"}}, "t_val", 7);
    expect(cond, {{"model", m}, {"scenario", "overall"}}, "h_given_t", 5);
    expect(cond, {{"model", m}, {"scenario", "overall"}}, "h_pct_given_t", 100.0 * 5 / 7);
    expect(cond, {{"model", m}, {"scenario", "overall"}}, "delta_gap", 0.68);

    // Second pass: survivor holdout gap mean 1.02 minus train gap mean 0.34.
    const Table* hs = table("holdout_summary");
    expect(hs, {{"model", m}, {"scenario", "overall"}}, "survivors", 5);
    expect(hs, {{"model", m}, {"scenario", "overall"}}, "delta_gap", 1.02 - 0.34);
    expect(hs, {{"model", m}, {"scenario", "overall"}}, "n", 9);
    expect(hs, {{"model", m}, {"scenario", "overall"}}, "holdout_valid", 5);
    expect(hs, {{"model", m}, {"scenario", "overall"}}, "h_valid_pct", 500.0 / 9);

    // AST bins: 15 lands in [15,30).
    const Table* bins = table("complexity_bins");
    expect(bins, {{"model", m}, {"bin", "[0,15)"}}, "n", 8);
    expect(bins, {{"model", m}, {"bin", "[0,15)"}}, "valid_pct", 75.0);
    expect(bins, {{"model", m}, {"bin", "[0,15)"}}, "t_val", 5);
    expect(bins, {{"model", m}, {"bin", "[0,15)"}}, "h_given_t", 4);
    expect(bins, {{"model", m}, {"bin", "[0,15)"}}, "h_pct_given_t", 80.0);
    expect(bins, {{"model", m}, {"bin", "[0,15)"}}, "delta_gap", 0.2);
    expect(bins, {{"model", m}, {"bin", "[15,30)"}}, "n", 2);
    expect(bins, {{"model", m}, {"bin", "[15,30)"}}, "valid_pct", 100.0);
    expect(bins, {{"model", m}, {"bin", "[15,30)"}}, "h_pct_given_t", 50.0);
    expect(bins, {{"model", m}, {"bin", "[15,30)"}}, "delta_gap", 2.6);
    expect(bins, {{"model", m}, {"bin", "[30,inf)"}}, "n", 0);
    expect(bins, {{"model", m}, {"bin", "[30,inf)"}}, "valid_pct", std::nullopt);

    // Paired table, macro over problems A and B; equal-AST prediction
    // dropped. Pooled shorter validity would be 75, macro is 83.33.
    const Table* sl = table("shorter_vs_longer");
    expect(sl, {{"model", m}, {"group", "shorter"}}, "problems", 2);
    expect(sl, {{"model", m}, {"group", "shorter"}}, "predictions", 4);
    expect(sl, {{"model", m}, {"group", "shorter"}}, "valid_pct", (200.0 / 3 + 100.0) / 2);
    expect(sl, {{"model", m}, {"group", "shorter"}}, "h_pct_given_t", 50.0);
    expect(sl, {{"model", m}, {"group", "shorter"}}, "gap_mean", 0.2);
    expect(sl, {{"model", m}, {"group", "longer"}}, "predictions", 4);
    expect(sl, {{"model", m}, {"group", "longer"}}, "valid_pct", (200.0 / 3 + 100.0) / 2);
    expect(sl, {{"model", m}, {"group", "longer"}}, "h_pct_given_t", 75.0);
    expect(sl, {{"model", m}, {"group", "longer"}}, "gap_mean", 0.35);

    // Failure classes partition the eleven records.
    const Table* fm = table("failure_modes");
    const std::pair<const char*, int> counts[] = {{"ParseError", 1}, {"AllInvalidTrain", 1}, {"PartialInvalidTrain", 1},
                                                  {"Brittle", 2},    {"ParsimonyInflation", 1}, {"Success", 5},
                                                  {"Brittle(catastrophic)", 1}};
    for (const auto& [cls, n] : counts) expect(fm, {{"model", m}, {"class", cls}}, "count", n);

    // Eight train-valid records; one beats gold by 3.
    const Table* bg = table("beats_gold");
    expect(bg, {{"model", m}, {"scenario", "overall"}}, "train_valid", 8);
    expect(bg, {{"model", m}, {"scenario", "overall"}}, "rate_pct", 12.5);
    expect(bg, {{"model", m}, {"scenario", "overall"}}, "mean_improvement", 3);
    expect(bg, {{"model", m}, {"scenario", "overall"}}, "mean_ast", 6);

    // Train summary: over the eight train-valid records gaps sum to 2.7 and
    // gold margins to 8.
    const Table* ts = table("train_summary");
    expect(ts, {{"model", m}, {"scenario", "overall-micro"}}, "valid_pct", 800.0 / 11);
    expect(ts, {{"model", m}, {"scenario", "overall-micro"}}, "gap_mean", 2.7 / 8);
    expect(ts, {{"model", m}, {"scenario", "full"}}, "gapg_mean", 0.8 / 8);

    // Brittle: holdout-valid fractions 40% and 80%.
    const Table* br = table("brittle_patterns");
    expect(br, {{"model", m}, {"scenario", "overall"}}, "mean_holdout_valid_pct", 60.0);
  }
  return bad;
}

}  // namespace abd::testing
