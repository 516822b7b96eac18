#include "abd/dataset.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "abd/seeding.hpp"

namespace abd {

using nlohmann::json;

namespace {

const Pred kObserved[] = {Pred::P, Pred::Q, Pred::R, Pred::S};

json atoms_json(const std::vector<GroundAtom>& atoms, Pred p) {
  json a = json::array();
  for (const GroundAtom& g : atoms) {
    if (arity(p) == 1) a.push_back(g.i);
    else a.push_back({g.i, g.j});
  }
  return a;
}

void read_atoms(World& w, const json& arr, Pred p, AtomState s) {
  if (!arr.is_array()) throw DatasetError(std::string(pred_name(p)) + ": expected an array");
  for (const json& e : arr) {
    GroundAtom g{p, 0, 0};
    if (arity(p) == 1) {
      g.i = e.get<int>();
    } else {
      if (!e.is_array() || e.size() != 2) throw DatasetError(std::string(pred_name(p)) + ": expected [i, j] pairs");
      g.i = e[0].get<int>();
      g.j = e[1].get<int>();
    }
    if (w.state(g) != AtomState::False)
      throw DatasetError("atom " + atom_name(g) + " listed twice");
    w.set(g, s);
  }
}

Tier tier_from_name(const std::string& s) {
  for (Tier t : {Tier::Tier1, Tier::Tier2, Tier::Mutant})
    if (s == tier_name(t)) return t;
  throw DatasetError("unknown competitor tier '" + s + "'");
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

DatasetHeader header_for(const BatchParams& b) {
  DatasetHeader h;
  h.scenario = b.scenario;
  h.world_budget = b.world_budget;
  h.margin = b.margin;
  h.holdouts = b.holdouts;
  h.min_worlds = b.min_worlds;
  h.refine_gold = b.refine_gold;
  h.global_seed = b.global_seed;
  std::string all;
  for (TheoryId t : b.theories) all += params_for(b, t).digest();
  h.params_digest = hex(sha256(all)).substr(0, 16);
  return h;
}

BatchParams batch_params(const DatasetHeader& h) {
  BatchParams b;
  b.scenario = h.scenario;
  b.world_budget = h.world_budget;
  b.margin = h.margin;
  b.holdouts = h.holdouts;
  b.min_worlds = h.min_worlds;
  b.refine_gold = h.refine_gold;
  b.global_seed = h.global_seed;
  return b;
}

GenParams params_for(const DatasetHeader& h, TheoryId theory) { return params_for(batch_params(h), theory); }

json world_to_json(const World& w) {
  json j = {{"n", w.domain_size()}};
  json unknown = json::object();
  for (Pred p : kObserved) {
    j[pred_name(p)] = atoms_json(w.true_atoms(p), p);
    unknown[pred_name(p)] = atoms_json(w.unknown_atoms(p), p);
  }
  j["unknown"] = std::move(unknown);
  return j;
}

World world_from_json(const json& j) {
  const int n = j.at("n").get<int>();
  if (n < 1 || n > kMaxDomainSize) throw DatasetError("domain size out of range");
  World w(n);
  try {
    for (Pred p : kObserved) {
      read_atoms(w, j.at(pred_name(p)), p, AtomState::True);
      if (j.contains("unknown") && j["unknown"].contains(pred_name(p)))
        read_atoms(w, j["unknown"][pred_name(p)], p, AtomState::Unknown);
    }
  } catch (const WorldError& e) {
    throw DatasetError(e.what());
  }
  return w;
}

json instance_to_json(const InstanceRecord& inst) {
  json worlds = json::array(), holdouts = json::array(), comps = json::array();
  for (const World& w : inst.worlds) worlds.push_back(world_to_json(w));
  for (const World& w : inst.holdouts) holdouts.push_back(world_to_json(w));
  for (const CompetitorRecord& c : inst.competitors) comps.push_back({{"formula", c.formula}, {"tier", tier_name(c.tier)}});
  const auto& pv = inst.provenance;
  return {
      {"id", inst.id},
      {"scenario", regime_name(inst.scenario)},
      {"theory", inst.theory_spec().short_id},
      {"theory_internal", inst.theory_spec().internal_id},
      {"axiom", render_formula(inst.theory_spec().axiom)},
      {"allowed", pred_names(inst.theory_spec().scope.allowed)},
      {"forbidden", pred_names(inst.theory_spec().scope.forbidden)},
      {"gold", inst.gold},
      {"gold_template", inst.gold_template},
      {"worlds", std::move(worlds)},
      {"gold_cost", inst.gold_cost},
      {"opt_cost", inst.opt_cost},
      {"opt_cost_uniform", inst.opt_cost_uniform},
      {"competitors", std::move(comps)},
      {"cheater_margin", opt_json(inst.cheater_margin)},
      {"holdouts", std::move(holdouts)},
      {"holdout_gold_cost", inst.holdout_gold_cost},
      {"holdout_opt_cost", inst.holdout_opt_cost},
      {"holdout_available", inst.holdout_available},
      {"provenance",
       {{"global_seed", pv.global_seed},
        {"index", pv.index},
        {"attempt", pv.attempt},
        {"instance_seed", pv.instance_seed},
        {"dataset_path", pv.dataset_path},
        {"holdout_seeds", pv.holdout_seeds}}},
  };
}

InstanceRecord instance_from_json(const json& j) {
  InstanceRecord inst;
  try {
    inst.id = j.at("id").get<std::string>();
    const auto sc = regime_from_name(j.at("scenario").get<std::string>());
    if (!sc) throw DatasetError("unknown scenario");
    inst.scenario = *sc;
    inst.theory = theory_id_from_name(j.at("theory").get<std::string>());
    inst.gold = j.at("gold").get<std::string>();
    inst.gold_template = j.at("gold_template").get<std::string>();
    for (const json& w : j.at("worlds")) inst.worlds.push_back(world_from_json(w));
    inst.gold_cost = j.at("gold_cost").get<std::vector<int>>();
    inst.opt_cost = j.at("opt_cost").get<std::vector<int>>();
    inst.opt_cost_uniform = j.at("opt_cost_uniform").get<std::vector<int>>();
    for (const json& c : j.at("competitors"))
      inst.competitors.push_back({c.at("formula").get<std::string>(), tier_from_name(c.at("tier").get<std::string>())});
    inst.cheater_margin = opt_get<int>(j, "cheater_margin");
    for (const json& w : j.at("holdouts")) inst.holdouts.push_back(world_from_json(w));
    inst.holdout_gold_cost = j.at("holdout_gold_cost").get<std::vector<int>>();
    inst.holdout_opt_cost = j.at("holdout_opt_cost").get<std::vector<int>>();
    inst.holdout_available = j.at("holdout_available").get<bool>();
    const json& pv = j.at("provenance");
    inst.provenance.global_seed = pv.at("global_seed").get<std::uint64_t>();
    inst.provenance.index = pv.at("index").get<int>();
    inst.provenance.attempt = pv.at("attempt").get<int>();
    inst.provenance.instance_seed = pv.at("instance_seed").get<std::uint64_t>();
    inst.provenance.dataset_path = pv.at("dataset_path").get<std::string>();
    inst.provenance.holdout_seeds = pv.at("holdout_seeds").get<std::vector<std::uint32_t>>();
  } catch (const json::exception& e) {
    throw DatasetError(std::string("malformed instance record: ") + e.what());
  } catch (const TheoryError& e) {
    throw DatasetError(e.what());
  }
  // Derived fields must agree with the theory table.
  const TheorySpec& th = inst.theory_spec();
  if (j.value("axiom", "") != render_formula(th.axiom)) throw DatasetError(inst.id + ": axiom does not match theory");
  if (j.value("theory_internal", "") != th.internal_id) throw DatasetError(inst.id + ": theory id mismatch");
  return inst;
}

json header_to_json(const DatasetHeader& h) {
  return {{"format", "abd-dataset"},
          {"version", kDatasetVersion},
          {"scenario", regime_name(h.scenario)},
          {"generator_params_digest", h.params_digest},
          {"params",
           {{"world_budget", opt_json(h.world_budget)},
            {"margin", opt_json(h.margin)},
            {"holdouts", opt_json(h.holdouts)},
            {"min_worlds", opt_json(h.min_worlds)},
            {"refine_gold", h.refine_gold},
            {"global_seed", h.global_seed}}}};
}

DatasetHeader header_from_json(const json& j) {
  if (j.value("format", "") != "abd-dataset") throw DatasetError("not an abd dataset header");
  if (j.value("version", 0) != kDatasetVersion) throw DatasetError("unsupported dataset version");
  DatasetHeader h;
  try {
    const auto sc = regime_from_name(j.at("scenario").get<std::string>());
    if (!sc) throw DatasetError("unknown scenario in header");
    h.scenario = *sc;
    h.params_digest = j.at("generator_params_digest").get<std::string>();
    const json& p = j.at("params");
    h.world_budget = opt_get<int>(p, "world_budget");
    h.margin = opt_get<int>(p, "margin");
    h.holdouts = opt_get<int>(p, "holdouts");
    h.min_worlds = opt_get<int>(p, "min_worlds");
    h.refine_gold = p.at("refine_gold").get<bool>();
    h.global_seed = p.at("global_seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw DatasetError(std::string("malformed header: ") + e.what());
  }
  return h;
}

void write_dataset(std::ostream& out, const Dataset& ds) {
  out << header_to_json(ds.header).dump() << '\n';
  for (const InstanceRecord& inst : ds.instances) out << instance_to_json(inst).dump() << '\n';
}

void save_dataset(const std::string& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DatasetError("cannot write " + path);
  write_dataset(out, ds);
  if (!out) throw DatasetError("write failed for " + path);
}

Dataset read_dataset(std::istream& in, const LoadOptions& opt) {
  Dataset ds;
  std::string line;
  int lineno = 0;
  auto at = [&](const std::string& msg) { return DatasetError("line " + std::to_string(lineno) + ": " + msg); };
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw at(std::string("invalid JSON: ") + e.what());
    }
    try {
      if (!have_header) {
        ds.header = header_from_json(j);
        have_header = true;
        continue;
      }
      InstanceRecord inst = instance_from_json(j);
      if (inst.scenario != ds.header.scenario) throw DatasetError(inst.id + ": scenario differs from header");
      if (opt.audit) {
        const auto v = audit_instance(inst, params_for(ds.header, inst.theory));
        if (!v.empty()) throw DatasetError(v.front());
      }
      ds.instances.push_back(std::move(inst));
    } catch (const DatasetError& e) {
      throw at(e.what());
    } catch (const std::exception& e) {
      throw at(e.what());
    }
  }
  if (!have_header) throw DatasetError("empty dataset file");
  return ds;
}

Dataset load_dataset(const std::string& path, const LoadOptions& opt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot read " + path);
  return read_dataset(in, opt);
}

}  // namespace abd
