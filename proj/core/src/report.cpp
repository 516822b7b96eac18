#include "abd/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace abd {

using nlohmann::json;

namespace {

using Records = std::vector<const ScoreRecord*>;
using Pred_ = std::function<bool(const ScoreRecord&)>;

Records filter(const Records& in, const Pred_& keep) {
  Records out;
  for (const ScoreRecord* r : in)
    if (keep(*r)) out.push_back(r);
  return out;
}

json pct(std::size_t num, std::size_t den) {
  if (den == 0) return nullptr;
  return 100.0 * double(num) / double(den);
}

json mean_of(const std::vector<double>& v) {
  if (v.empty()) return nullptr;
  double s = 0;
  for (double x : v) s += x;
  return s / double(v.size());
}

template <class F>
std::vector<double> collect(const Records& rs, F get) {
  std::vector<double> v;
  for (const ScoreRecord* r : rs)
    if (auto x = get(*r)) v.push_back(*x);
  return v;
}

json mean_json(const std::vector<json>& xs) {
  std::vector<double> v;
  for (const json& x : xs)
    if (x.is_number()) v.push_back(x.get<double>());
  return mean_of(v);
}

const char* scen(Regime r) { return regime_name(r); }

std::vector<Regime> scenarios_in(const Records& rs) {
  std::set<Regime> s;
  for (const ScoreRecord* r : rs) s.insert(r->scenario);
  return {s.begin(), s.end()};
}

std::vector<TheoryId> theories_in(const Records& rs) {
  std::set<TheoryId> s;
  for (const ScoreRecord* r : rs) s.insert(r->theory);
  return {s.begin(), s.end()};
}

bool has_holdout(const ScoreRecord& r) { return r.holdout_available; }
bool t_val_h(const ScoreRecord& r) { return r.train_valid && r.holdout_available; }

Table train_summary(const std::map<std::string, Records>& groups) {
  Table t{"train_summary", "Training validity and gaps by scenario (overall: micro = pooled records, macro = mean of scenario rows)",
          {"model", "scenario", "n", "train_valid", "valid_pct", "gap_mean", "gapg_mean"}, {}};
  for (const auto& [model, rs] : groups) {
    std::vector<json> vp, gm, gg;
    for (Regime sc : scenarios_in(rs)) {
      const Records s = filter(rs, [&](const ScoreRecord& r) { return r.scenario == sc; });
      const Records v = filter(s, [](const ScoreRecord& r) { return r.train_valid; });
      json row = {{"model", model},
                  {"scenario", scen(sc)},
                  {"n", s.size()},
                  {"train_valid", v.size()},
                  {"valid_pct", pct(v.size(), s.size())},
                  {"gap_mean", mean_of(collect(v, [](const ScoreRecord& r) { return r.gap; }))},
                  {"gapg_mean", mean_of(collect(v, [](const ScoreRecord& r) { return r.gap_gold; }))}};
      vp.push_back(row["valid_pct"]);
      gm.push_back(row["gap_mean"]);
      gg.push_back(row["gapg_mean"]);
      t.rows.push_back(std::move(row));
    }
    const Records v = filter(rs, [](const ScoreRecord& r) { return r.train_valid; });
    t.rows.push_back({{"model", model},
                      {"scenario", "overall-micro"},
                      {"n", rs.size()},
                      {"train_valid", v.size()},
                      {"valid_pct", pct(v.size(), rs.size())},
                      {"gap_mean", mean_of(collect(v, [](const ScoreRecord& r) { return r.gap; }))},
                      {"gapg_mean", mean_of(collect(v, [](const ScoreRecord& r) { return r.gap_gold; }))}});
    t.rows.push_back({{"model", model},
                      {"scenario", "overall-macro"},
                      {"n", rs.size()},
                      {"train_valid", v.size()},
                      {"valid_pct", mean_json(vp)},
                      {"gap_mean", mean_json(gm)},
                      {"gapg_mean", mean_json(gg)}});
  }
  return t;
}

Table per_theory(const std::map<std::string, Records>& groups) {
  Table t{"per_theory", "Training validity and gaps by theory",
          {"model", "scenario", "theory", "n", "train_valid", "valid_pct", "gap_mean", "gapg_mean"}, {}};
  for (const auto& [model, rs] : groups)
    for (Regime sc : scenarios_in(rs))
      for (TheoryId th : theories_in(rs)) {
        const Records s = filter(rs, [&](const ScoreRecord& r) { return r.scenario == sc && r.theory == th; });
        if (s.empty()) continue;
        const Records v = filter(s, [](const ScoreRecord& r) { return r.train_valid; });
        t.rows.push_back({{"model", model},
                          {"scenario", scen(sc)},
                          {"theory", builtin_theory(th).short_id},
                          {"n", s.size()},
                          {"train_valid", v.size()},
                          {"valid_pct", pct(v.size(), s.size())},
                          {"gap_mean", mean_of(collect(v, [](const ScoreRecord& r) { return r.gap; }))},
                          {"gapg_mean", mean_of(collect(v, [](const ScoreRecord& r) { return r.gap_gold; }))}});
      }
  return t;
}

json holdout_row(const std::string& model, const std::string& scenario, const Records& rs) {
  const Records h = filter(rs, has_holdout);
  const Records tv = filter(h, [](const ScoreRecord& r) { return r.train_valid; });
  const Records hv = filter(h, [](const ScoreRecord& r) { return r.holdout_valid; });
  const Records surv = filter(h, [](const ScoreRecord& r) { return r.survivor; });
  return {{"model", model},
          {"scenario", scenario},
          {"n", h.size()},
          {"train_valid", tv.size()},
          {"t_gap", mean_of(collect(tv, [](const ScoreRecord& r) { return r.gap; }))},
          {"holdout_valid", hv.size()},
          {"h_valid_pct", pct(hv.size(), h.size())},
          {"h_gap", mean_of(collect(hv, [](const ScoreRecord& r) { return r.holdout_gap; }))},
          {"survivors", surv.size()},
          {"delta_gap", mean_of(collect(surv, [](const ScoreRecord& r) { return r.delta_gap; }))}};
}

Table holdout_summary(const std::map<std::string, Records>& groups) {
  Table t{"holdout_summary",
          "Holdout results over records with holdout worlds (T-Gap over train-valid, H-Gap over holdout-valid, delta gap over survivors)",
          {"model", "scenario", "n", "train_valid", "t_gap", "holdout_valid", "h_valid_pct", "h_gap", "survivors", "delta_gap"},
          {}};
  for (const auto& [model, rs] : groups) {
    for (Regime sc : scenarios_in(rs))
      t.rows.push_back(holdout_row(model, scen(sc), filter(rs, [&](const ScoreRecord& r) { return r.scenario == sc; })));
    t.rows.push_back(holdout_row(model, "overall", rs));
  }
  return t;
}

json conditional_row(const std::string& model, const std::string& scenario, const std::string& theory, const Records& rs) {
  const Records tv = filter(rs, t_val_h);
  const Records surv = filter(tv, [](const ScoreRecord& r) { return r.survivor; });
  json row = {{"model", model},
              {"scenario", scenario},
              {"t_val", tv.size()},
              {"h_given_t", surv.size()},
              {"h_pct_given_t", pct(surv.size(), tv.size())},
              {"delta_gap", mean_of(collect(surv, [](const ScoreRecord& r) { return r.delta_gap; }))}};
  if (!theory.empty()) row["theory"] = theory;
  return row;
}

Table holdout_conditional(const std::map<std::string, Records>& groups) {
  Table t{"holdout_conditional", "Holdout validity conditional on training validity (records with holdout worlds)",
          {"model", "scenario", "t_val", "h_given_t", "h_pct_given_t", "delta_gap"}, {}};
  for (const auto& [model, rs] : groups) {
    for (Regime sc : scenarios_in(rs))
      t.rows.push_back(conditional_row(model, scen(sc), "", filter(rs, [&](const ScoreRecord& r) { return r.scenario == sc; })));
    t.rows.push_back(conditional_row(model, "overall", "", rs));
  }
  return t;
}

Table holdout_by_theory(const std::map<std::string, Records>& groups) {
  Table t{"holdout_by_theory", "Holdout validity conditional on training validity, by theory",
          {"model", "scenario", "theory", "t_val", "h_given_t", "h_pct_given_t", "delta_gap"}, {}};
  for (const auto& [model, rs] : groups)
    for (Regime sc : scenarios_in(rs))
      for (TheoryId th : theories_in(rs)) {
        const Records s = filter(rs, [&](const ScoreRecord& r) { return r.scenario == sc && r.theory == th; });
        if (!s.empty()) t.rows.push_back(conditional_row(model, scen(sc), builtin_theory(th).short_id, s));
      }
  return t;
}

const char* ast_bin(int ast) {
  if (ast < 15) return "[0,15)";
  if (ast < 30) return "[15,30)";
  return "[30,inf)";
}

Table complexity_bins(const std::map<std::string, Records>& groups) {
  Table t{"complexity_bins", "Holdout generalization by formula AST size (parsed predictions)",
          {"model", "bin", "n", "valid_pct", "t_val", "h_given_t", "h_pct_given_t", "delta_gap"}, {}};
  for (const auto& [model, rs] : groups)
    for (const char* bin : {"[0,15)", "[15,30)", "[30,inf)"}) {
      const Records b = filter(rs, [&](const ScoreRecord& r) { return r.parse_ok && std::string(ast_bin(r.ast_size)) == bin; });
      const Records v = filter(b, [](const ScoreRecord& r) { return r.train_valid; });
      json row = conditional_row(model, "", "", b);
      row.erase("scenario");
      row["bin"] = bin;
      row["n"] = b.size();
      row["valid_pct"] = pct(v.size(), b.size());
      t.rows.push_back(std::move(row));
    }
  return t;
}

Table shorter_vs_longer(const std::map<std::string, Records>& groups) {
  Table t{"shorter_vs_longer",
          "Predictions shorter than gold (AST < gold) vs longer (AST > gold) on problems with both; macro-averaged per problem",
          {"model", "group", "problems", "predictions", "valid_pct", "h_pct_given_t", "gap_mean"}, {}};
  for (const auto& [model, rs] : groups) {
    std::map<std::string, std::pair<Records, Records>> by_problem;
    for (const ScoreRecord* r : rs) {
      if (!r->parse_ok || r->ast_size == r->gold_ast_size) continue;
      auto& slot = by_problem[r->instance_id];
      (r->ast_size < r->gold_ast_size ? slot.first : slot.second).push_back(r);
    }
    std::vector<json> vs[2], hs[2], gs[2];
    std::size_t preds[2] = {0, 0}, problems = 0;
    for (const auto& [id, pr] : by_problem) {
      if (pr.first.empty() || pr.second.empty()) continue;
      ++problems;
      const Records* g[2] = {&pr.first, &pr.second};
      for (int k = 0; k < 2; ++k) {
        const Records& x = *g[k];
        preds[k] += x.size();
        const Records v = filter(x, [](const ScoreRecord& r) { return r.train_valid; });
        const Records tv = filter(x, t_val_h);
        const Records sv = filter(tv, [](const ScoreRecord& r) { return r.survivor; });
        vs[k].push_back(pct(v.size(), x.size()));
        hs[k].push_back(pct(sv.size(), tv.size()));
        gs[k].push_back(mean_of(collect(v, [](const ScoreRecord& r) { return r.gap; })));
      }
    }
    const char* names[2] = {"shorter", "longer"};
    for (int k = 0; k < 2; ++k)
      t.rows.push_back({{"model", model},
                        {"group", names[k]},
                        {"problems", problems},
                        {"predictions", preds[k]},
                        {"valid_pct", mean_json(vs[k])},
                        {"h_pct_given_t", mean_json(hs[k])},
                        {"gap_mean", mean_json(gs[k])}});
  }
  return t;
}

Table beats_gold(const std::map<std::string, Records>& groups) {
  Table t{"beats_gold", "Train-valid predictions with training cost strictly below the gold rule (Full and Partial)",
          {"model", "scenario", "train_valid", "beats", "rate_pct", "mean_improvement", "mean_ast"}, {}};
  for (const auto& [model, rs] : groups) {
    auto row = [&](const std::string& name, const Records& s) {
      const Records v = filter(s, [](const ScoreRecord& r) { return r.train_valid; });
      const Records b = filter(v, [](const ScoreRecord& r) { return r.beats_gold; });
      t.rows.push_back({{"model", model},
                        {"scenario", name},
                        {"train_valid", v.size()},
                        {"beats", b.size()},
                        {"rate_pct", pct(b.size(), v.size())},
                        {"mean_improvement", mean_of(collect(b, [](const ScoreRecord& r) -> std::optional<double> {
                           return -*r.gold_margin;
                         }))},
                        {"mean_ast", mean_of(collect(b, [](const ScoreRecord& r) -> std::optional<double> { return r.ast_size; }))}});
    };
    for (Regime sc : {Regime::Full, Regime::Partial}) {
      const Records s = filter(rs, [&](const ScoreRecord& r) { return r.scenario == sc; });
      if (!s.empty()) row(scen(sc), s);
    }
    row("overall", filter(rs, [](const ScoreRecord& r) { return r.scenario != Regime::Skeptical; }));
  }
  return t;
}

Table gap_distribution(const std::map<std::string, Records>& groups) {
  Table t{"gap_distribution", "Distribution of per-world training gap over train-valid predictions",
          {"model", "scenario", "n", "mean", "median", "p90", "max", "gt3_pct", "gt5_pct"}, {}};
  for (const auto& [model, rs] : groups) {
    auto row = [&](const std::string& name, const Records& s) {
      const std::vector<double> g = collect(s, [](const ScoreRecord& r) { return r.gap; });
      const auto over = [&](double th) { return std::count_if(g.begin(), g.end(), [&](double x) { return x > th; }); };
      t.rows.push_back({{"model", model},
                        {"scenario", name},
                        {"n", g.size()},
                        {"mean", mean_of(g)},
                        {"median", g.empty() ? json(nullptr) : json(percentile(g, 0.5))},
                        {"p90", g.empty() ? json(nullptr) : json(percentile(g, 0.9))},
                        {"max", g.empty() ? json(nullptr) : json(*std::max_element(g.begin(), g.end()))},
                        {"gt3_pct", pct(over(3.0), g.size())},
                        {"gt5_pct", pct(over(5.0), g.size())}});
    };
    for (Regime sc : scenarios_in(rs)) row(scen(sc), filter(rs, [&](const ScoreRecord& r) { return r.scenario == sc; }));
    row("overall", rs);
  }
  return t;
}

Table failure_modes(const std::map<std::string, Records>& groups) {
  Table t{"failure_modes", "Failure classes (first match); Brittle split into catastrophic (<50% holdout valid) and mild",
          {"model", "class", "count", "pct"}, {}};
  for (const auto& [model, rs] : groups) {
    for (FailureClass c : {FailureClass::ParseError, FailureClass::AllInvalidTrain, FailureClass::PartialInvalidTrain,
                           FailureClass::Brittle, FailureClass::ParsimonyInflation, FailureClass::Success}) {
      const auto n = filter(rs, [&](const ScoreRecord& r) { return r.failure == c; }).size();
      t.rows.push_back({{"model", model}, {"class", failure_class_name(c)}, {"count", n}, {"pct", pct(n, rs.size())}});
    }
    const auto cat = filter(rs, [](const ScoreRecord& r) { return r.failure == FailureClass::Brittle && r.catastrophic; }).size();
    t.rows.push_back({{"model", model}, {"class", "Brittle(catastrophic)"}, {"count", cat}, {"pct", pct(cat, rs.size())}});
  }
  return t;
}

Table brittle_patterns(const std::map<std::string, Records>& groups) {
  Table t{"brittle_patterns", "Brittle predictions: severity and mean holdout-valid fraction",
          {"model", "scenario", "brittle", "catastrophic", "mild", "mean_holdout_valid_pct"}, {}};
  for (const auto& [model, rs] : groups) {
    auto row = [&](const std::string& name, const Records& s) {
      const Records b = filter(s, [](const ScoreRecord& r) { return r.failure == FailureClass::Brittle; });
      const auto cat = filter(b, [](const ScoreRecord& r) { return r.catastrophic; }).size();
      t.rows.push_back({{"model", model},
                        {"scenario", name},
                        {"brittle", b.size()},
                        {"catastrophic", cat},
                        {"mild", b.size() - cat},
                        {"mean_holdout_valid_pct", mean_of(collect(b, [](const ScoreRecord& r) -> std::optional<double> {
                           return 100.0 * r.holdout_valid_count / r.holdout_worlds;
                         }))}});
    };
    for (Regime sc : scenarios_in(rs)) row(scen(sc), filter(rs, [&](const ScoreRecord& r) { return r.scenario == sc; }));
    row("overall", rs);
  }
  return t;
}

std::string cell(const json& v) {
  if (v.is_null()) return "-";
  if (v.is_number_float()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v.get<double>());
    return buf;
  }
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

}  // namespace

json Table::to_json() const { return {{"name", name}, {"title", title}, {"columns", columns}, {"rows", rows}}; }

std::string Table::to_text() const {
  std::vector<std::size_t> w(columns.size());
  std::vector<std::vector<std::string>> cells;
  for (std::size_t c = 0; c < columns.size(); ++c) w[c] = columns[c].size();
  for (const json& r : rows) {
    std::vector<std::string> line;
    for (std::size_t c = 0; c < columns.size(); ++c) {
      line.push_back(r.contains(columns[c]) ? cell(r.at(columns[c])) : "");
      w[c] = std::max(w[c], line.back().size());
    }
    cells.push_back(std::move(line));
  }
  std::ostringstream os;
  os << title << "\n\n";
  auto emit = [&](const std::vector<std::string>& line) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      if (c) os << "  ";
      os << line[c] << std::string(w[c] - line[c].size(), ' ');
    }
    os << "\n";
  };
  emit(columns);
  std::size_t total = 0;
  for (std::size_t x : w) total += x;
  os << std::string(total + 2 * (w.size() - 1), '-') << "\n";
  for (const auto& line : cells) emit(line);
  return os.str();
}

const json* Table::find(const std::vector<std::pair<std::string, std::string>>& key) const {
  for (const json& r : rows) {
    bool ok = true;
    for (const auto& [k, v] : key)
      if (!r.contains(k) || cell(r.at(k)) != v) ok = false;
    if (ok) return &r;
  }
  return nullptr;
}

double percentile(std::vector<double> v, double p) {
  if (v.empty()) throw std::invalid_argument("percentile of an empty set");
  std::sort(v.begin(), v.end());
  const double pos = p * double(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - double(lo)) * (v[hi] - v[lo]);
}

std::vector<Table> build_report(const std::vector<ScoreRecord>& records) {
  if (records.empty()) throw std::invalid_argument("no score records to aggregate");
  std::map<std::string, Records> groups;
  for (const ScoreRecord& r : records) {
    groups[r.model_id].push_back(&r);
    groups[kAllModels].push_back(&r);
  }
  return {train_summary(groups),     per_theory(groups),        holdout_summary(groups),  holdout_conditional(groups),
          holdout_by_theory(groups), complexity_bins(groups),   shorter_vs_longer(groups), beats_gold(groups),
          gap_distribution(groups),  failure_modes(groups),     brittle_patterns(groups)};
}

void write_report(const std::string& dir, const std::vector<Table>& tables) {
  std::filesystem::create_directories(dir);
  for (const Table& t : tables) {
    std::ofstream(std::filesystem::path(dir) / (t.name + ".json")) << t.to_json().dump(2) << "\n";
    std::ofstream(std::filesystem::path(dir) / (t.name + ".txt")) << t.to_text();
  }
}

}  // namespace abd
