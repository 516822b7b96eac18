// abd: generate, verify, score and report on default-exception abduction
// datasets.

#include <algorithm>
#include <atomic>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "abd/dataset.hpp"
#include "abd/oracle.hpp"
#include "abd/prompt.hpp"
#include "abd/report.hpp"
#include "abd/scoring.hpp"

using nlohmann::json;

namespace {

// Runs fn(i) for i in [0, n) on `threads` workers. Results go wherever fn
// writes them, so callers index by i to keep input order.
void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (int i; (i = next.fetch_add(1)) < n;) fn(i);
    });
  for (auto& th : pool) th.join();
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) {
    if (!l.empty() && l.back() == '\r') l.pop_back();
    lines.push_back(std::move(l));
  }
  return lines;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

std::vector<abd::TheoryId> parse_theories(const std::vector<std::string>& names, abd::Regime scenario) {
  std::vector<abd::TheoryId> out;
  if (names.empty()) {
    for (abd::TheoryId t : abd::all_theories())
      if (abd::builtin_theory(t).supports(scenario)) out.push_back(t);
    return out;
  }
  for (const std::string& n : names) {
    std::stringstream ss(n);
    for (std::string part; std::getline(ss, part, ',');)
      if (!part.empty()) out.push_back(abd::theory_id_from_name(part));
  }
  return out;
}

// ---- generate ----

struct GenerateOpts {
  std::string scenario = "full";
  std::vector<std::string> theories;
  std::uint64_t seed = 0;
  int count = 10;
  std::optional<int> world_budget, margin, holdouts, min_worlds;
  bool refine_gold = false;
  int threads = 1;
  std::string out;
};

int cmd_generate(const GenerateOpts& o) {
  abd::BatchParams b;
  b.scenario = *abd::regime_from_name(o.scenario);
  b.theories = parse_theories(o.theories, b.scenario);
  b.count = o.count;
  b.global_seed = o.seed;
  b.dataset_path = o.out;
  b.threads = o.threads;
  b.world_budget = o.world_budget;
  b.margin = o.margin;
  b.holdouts = o.holdouts;
  b.min_worlds = o.min_worlds;
  b.refine_gold = o.refine_gold;
  for (abd::TheoryId t : b.theories) abd::params_for(b, t).validate();

  abd::BatchResult res = abd::generate_batch(b);
  abd::Dataset ds{abd::header_for(b), std::move(res.instances)};
  abd::save_dataset(o.out, ds);
  auto log = open_out(o.out + ".log.jsonl");
  for (const json& l : res.logs) log << l.dump() << '\n';

  int with_holdouts = 0;
  for (const auto& inst : ds.instances) with_holdouts += inst.holdout_available;
  std::cout << "wrote " << ds.instances.size() << " instances (" << with_holdouts << " with holdouts) to " << o.out
            << "\n";
  return 0;
}

// ---- verify ----

// Engine vs brute-force oracle on one world; returns mismatches, or nullopt
// when the world is too large for the oracle.
std::optional<std::vector<std::string>> oracle_diff(const abd::InstanceRecord& inst, const abd::World& w,
                                                    const abd::Hypothesis& gold, int gold_cost, int opt,
                                                    const std::string& tag) {
  if (!abd::oracle::within_limits(w)) return std::nullopt;
  const abd::TheorySpec& th = inst.theory_spec();
  std::vector<std::string> out;
  const auto c = abd::oracle::cost(inst.scenario, th, w, gold);
  if (!c) out.push_back(tag + ": oracle finds the gold invalid");
  else if (*c != gold_cost) out.push_back(tag + ": oracle gold cost " + std::to_string(*c) + " != " + std::to_string(gold_cost));
  const int oo = abd::oracle::opt_cost(inst.scenario, th, w);
  if (oo != opt) out.push_back(tag + ": oracle OptCost " + std::to_string(oo) + " != " + std::to_string(opt));
  return out;
}

int cmd_verify(const std::string& path, bool use_oracle, int threads) {
  abd::Dataset ds = abd::load_dataset(path, {.audit = false});
  const int n = static_cast<int>(ds.instances.size());
  std::vector<std::vector<std::string>> problems(n);
  std::vector<int> checked(n, 0), skipped(n, 0);
  parallel_for(n, threads, [&](int i) {
    const auto& inst = ds.instances[i];
    problems[i] = abd::audit_instance(inst, abd::params_for(ds.header, inst.theory));
    if (!use_oracle) return;
    const abd::Hypothesis gold = inst.gold_hypothesis();
    auto run = [&](const std::vector<abd::World>& ws, const std::vector<int>& gc, const std::vector<int>& oc,
                   const char* kind) {
      for (std::size_t k = 0; k < ws.size() && k < gc.size() && k < oc.size(); ++k) {
        auto d = oracle_diff(inst, ws[k], gold, gc[k], oc[k], inst.id + " " + kind + " " + std::to_string(k));
        if (!d) {
          ++skipped[i];
          continue;
        }
        ++checked[i];
        for (auto& s : *d) problems[i].push_back(std::move(s));
      }
    };
    run(inst.worlds, inst.gold_cost, inst.opt_cost, "world");
    run(inst.holdouts, inst.holdout_gold_cost, inst.holdout_opt_cost, "holdout");
  });

  // Canonical serialization must round-trip.
  std::ifstream in(path, std::ios::binary);
  std::stringstream original, again;
  original << in.rdbuf();
  abd::write_dataset(again, ds);
  int errors = 0;
  if (original.str() != again.str()) {
    std::cout << "serialization: file is not in canonical form\n";
    ++errors;
  }
  for (const auto& p : problems)
    for (const auto& s : p) {
      std::cout << s << "\n";
      ++errors;
    }
  std::cout << "verified " << n << " instances: " << errors << " violations";
  if (use_oracle) {
    int c = 0, s = 0;
    for (int i = 0; i < n; ++i) c += checked[i], s += skipped[i];
    std::cout << "; oracle checked " << c << " worlds, skipped " << s << " beyond its limits";
  }
  std::cout << "\n";
  return errors == 0 ? 0 : 1;
}

// ---- optcost ----

int cmd_optcost(const std::string& path, const std::string& out) {
  abd::Dataset ds = abd::load_dataset(path);
  abd::Table t{"optcost", "Per-instance OptCost baseline and gold cost (training worlds)",
               {"instance", "theory", "worlds", "opt_total", "gold_total", "gold_gap_per_world"}, {}};
  if (ds.header.scenario == abd::Regime::Skeptical) t.columns.push_back("opt_uniform_total");
  for (const auto& inst : ds.instances) {
    int opt = 0, ou = 0;
    for (int v : inst.opt_cost) opt += v;
    for (int v : inst.opt_cost_uniform) ou += v;
    json row = {{"instance", inst.id},
                {"theory", inst.theory_spec().short_id},
                {"worlds", inst.worlds.size()},
                {"opt_total", opt},
                {"gold_total", inst.gold_total()},
                {"gold_gap_per_world", double(inst.gold_total() - opt) / double(inst.worlds.size())}};
    if (ds.header.scenario == abd::Regime::Skeptical) row["opt_uniform_total"] = ou;
    t.rows.push_back(std::move(row));
  }
  std::cout << t.to_text();
  if (!out.empty()) open_out(out) << t.to_json().dump(2) << "\n";
  return 0;
}

// ---- score ----

struct ScoreOpts {
  std::string dataset, predictions, manifest, out;
  bool oracle = false;
  int threads = 1;
};

int cmd_score(const ScoreOpts& o) {
  abd::Dataset ds = abd::load_dataset(o.dataset);
  std::map<std::string, const abd::InstanceRecord*> by_id;
  for (const auto& inst : ds.instances) by_id[inst.id] = &inst;

  const auto preds = read_lines(o.predictions);
  const auto manifest = read_lines(o.manifest.empty() ? o.predictions + ".manifest.jsonl" : o.manifest);
  if (manifest.size() != preds.size())
    throw std::runtime_error("manifest has " + std::to_string(manifest.size()) + " lines for " +
                             std::to_string(preds.size()) + " predictions");

  const int n = static_cast<int>(preds.size());
  std::vector<std::optional<abd::ScoreRecord>> recs(n);
  std::vector<std::string> errors(n);
  parallel_for(n, o.threads, [&](int i) {
    json m;
    try {
      m = json::parse(manifest[i]);
    } catch (const json::exception&) {
      errors[i] = "manifest line " + std::to_string(i + 1) + ": invalid JSON";
      return;
    }
    const std::string id = m.value("instance_id", "");
    const auto it = by_id.find(id);
    if (it == by_id.end()) {
      errors[i] = "line " + std::to_string(i + 1) + ": unknown instance_id '" + id + "'";
      return;
    }
    const abd::InstanceRecord& inst = *it->second;
    const abd::ParsedLine pl = abd::parse_prediction(preds[i]);
    abd::ScoreRecord r = pl.prediction ? abd::score_formula(pl.prediction->formula, inst)
                                       : abd::parse_failure_record(pl.error, inst);
    r.model_id = m.value("model_id", "");
    if (o.oracle && r.parse_ok && r.error.empty()) {
      const abd::Hypothesis h = abd::parse_hypothesis(r.formula, inst.theory_spec().scope);
      for (std::size_t k = 0; k < inst.worlds.size(); ++k) {
        if (!abd::oracle::within_limits(inst.worlds[k])) continue;
        if (abd::oracle::valid(inst.scenario, inst.theory_spec(), inst.worlds[k], h) != r.per_world_valid[k])
          errors[i] = "line " + std::to_string(i + 1) + ": oracle disagrees on world " + std::to_string(k);
      }
    }
    recs[i] = std::move(r);
  });

  auto out = open_out(o.out);
  int bad = 0;
  for (int i = 0; i < n; ++i) {
    if (!errors[i].empty()) {
      std::cerr << errors[i] << "\n";
      ++bad;
    }
    if (recs[i]) out << abd::score_to_json(*recs[i]).dump() << '\n';
  }
  std::cout << "scored " << n - bad << " of " << n << " predictions into " << o.out << "\n";
  return bad == 0 ? 0 : 1;
}

// ---- report ----

int cmd_report(const std::string& scores, const std::string& out) {
  std::vector<abd::ScoreRecord> recs;
  for (const std::string& l : read_lines(scores))
    if (!l.empty()) recs.push_back(abd::score_from_json(json::parse(l)));
  const auto tables = abd::build_report(recs);
  abd::write_report(out, tables);
  for (const auto& t : tables) std::cout << t.to_text() << "\n";
  return 0;
}

// ---- prompt ----

int cmd_prompt(const std::string& dataset, const std::string& instance, const std::string& out) {
  abd::Dataset ds = abd::load_dataset(dataset, {.audit = false});
  if (!instance.empty()) {
    for (const auto& inst : ds.instances)
      if (inst.id == instance) {
        std::cout << abd::render_prompt(inst).user_prompt;
        return 0;
      }
    std::cerr << "unknown instance " << instance << "\n";
    return 1;
  }
  std::ofstream file;
  if (!out.empty()) file = open_out(out);
  std::ostream& os = out.empty() ? std::cout : file;
  for (const auto& inst : ds.instances) {
    const abd::PromptBundle b = abd::render_prompt(inst);
    os << json{{"instance_id", inst.id}, {"system", b.system_prompt}, {"user", b.user_prompt}}.dump() << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Default-exception abduction benchmark toolkit"};
  app.require_subcommand(1);
  const std::vector<std::string> scenarios{"full", "partial", "skeptical"};

  GenerateOpts g;
  auto* gen = app.add_subcommand("generate", "Generate a dataset with holdouts and a generation log");
  gen->add_option("--scenario", g.scenario)->check(CLI::IsMember(scenarios))->required();
  gen->add_option("--theory", g.theories, "T1..T7 (repeatable or comma separated; default: all for the scenario)");
  gen->add_option("--seed", g.seed);
  gen->add_option("--count", g.count)->check(CLI::NonNegativeNumber);
  gen->add_option("--world-budget", g.world_budget);
  gen->add_option("--margin", g.margin);
  gen->add_option("--holdouts", g.holdouts);
  gen->add_option("--min-worlds", g.min_worlds);
  gen->add_flag("--refine-gold", g.refine_gold);
  gen->add_option("--threads", g.threads)->check(CLI::PositiveNumber);
  gen->add_option("--out", g.out)->required();

  std::string v_path;
  bool v_oracle = false;
  int v_threads = 1;
  auto* ver = app.add_subcommand("verify", "Re-audit every instance of a dataset");
  ver->add_option("dataset", v_path)->required();
  ver->add_flag("--oracle", v_oracle, "Cross-check costs with the brute-force oracle where feasible");
  ver->add_option("--threads", v_threads)->check(CLI::PositiveNumber);

  std::string oc_path, oc_out;
  auto* opt = app.add_subcommand("optcost", "OptCost baseline table");
  opt->add_option("dataset", oc_path)->required();
  opt->add_option("--out", oc_out);

  ScoreOpts s;
  auto* sc = app.add_subcommand("score", "Score model predictions");
  sc->add_option("dataset", s.dataset)->required();
  sc->add_option("--predictions", s.predictions)->required();
  sc->add_option("--manifest", s.manifest, "Default: <predictions>.manifest.jsonl");
  sc->add_option("--out", s.out)->required();
  sc->add_flag("--oracle", s.oracle);
  sc->add_option("--threads", s.threads)->check(CLI::PositiveNumber);

  std::string r_scores, r_out;
  auto* rep = app.add_subcommand("report", "Aggregate score records into tables");
  rep->add_option("scores", r_scores)->required();
  rep->add_option("--out", r_out)->required();

  std::string p_path, p_instance, p_out;
  auto* pr = app.add_subcommand("prompt", "Render model prompts");
  pr->add_option("dataset", p_path)->required();
  pr->add_option("--instance", p_instance, "Print one user prompt as plain text");
  pr->add_option("--out", p_out, "JSONL output (default stdout)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*gen) return cmd_generate(g);
    if (*ver) return cmd_verify(v_path, v_oracle, v_threads);
    if (*opt) return cmd_optcost(oc_path, oc_out);
    if (*sc) return cmd_score(s);
    if (*rep) return cmd_report(r_scores, r_out);
    if (*pr) return cmd_prompt(p_path, p_instance, p_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
