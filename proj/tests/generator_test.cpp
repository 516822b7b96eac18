#include "doctest.h"

#include <map>
#include <set>

#include "abd/dataset.hpp"
#include "abd/generator.hpp"
#include "abd/seeding.hpp"

using namespace abd;

namespace {

BatchParams batch(Regime r, std::vector<TheoryId> th, int count, std::uint64_t seed) {
  BatchParams b;
  b.scenario = r;
  b.theories = std::move(th);
  b.count = count;
  b.global_seed = seed;
  b.dataset_path = "data/test.jsonl";
  return b;
}

std::string dump(const BatchResult& r) {
  std::string s;
  for (const InstanceRecord& i : r.instances) s += instance_to_json(i).dump() + "\n";
  return s;
}

// Competitor elimination re-derived from the engine: invalid somewhere, or
// at least `margin` more expensive than the gold rule.
void check_beaten(const InstanceRecord& inst, const GenParams& p) {
  const TheorySpec& th = inst.theory_spec();
  const int gold = inst.gold_total();
  for (const CompetitorRecord& c : inst.competitors) {
    INFO(inst.id << " competitor " << c.formula);
    const Hypothesis h = parse_hypothesis(c.formula, th.scope);
    bool valid = true;
    int total = 0;
    for (const World& w : inst.worlds) {
      const WorldResult r = evaluate_world(inst.scenario, th, w, h);
      if (!r.valid) {
        valid = false;
        break;
      }
      total += *r.cost;
    }
    CHECK((!valid || total >= gold + p.margin));
  }
}

}  // namespace

TEST_CASE("sha256 test vectors") {
  CHECK(hex(sha256("abc")) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(hex(sha256("")) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("holdout seeds match the documented hash") {
  // Reference values computed with an independent SHA-256 implementation.
  CHECK(holdout_seed("data/full.jsonl", "ABD_FULL_TH2_000", 0, 42) == 1034723526u);
  CHECK(holdout_seed("d.jsonl", "ABD_SKEPTICAL_TH5_013", 4, 7) == 1136534471u);
  CHECK(holdout_seed("d.jsonl", "ABD_SKEPTICAL_TH5_013", 3, 7) != holdout_seed("d.jsonl", "ABD_SKEPTICAL_TH5_013", 4, 7));
}

TEST_CASE("instance ids") {
  CHECK(instance_id(Regime::Full, TheoryId::T1, 7) == "ABD_FULL_TH2_007");
  CHECK(instance_id(Regime::Skeptical, TheoryId::T7, 123) == "ABD_SKEPTICAL_TH5_123");
}

TEST_CASE("parameter validation") {
  GenParams p = GenParams::defaults(Regime::Full, TheoryId::T1);
  CHECK_NOTHROW(p.validate());
  p.min_worlds = p.world_budget + 1;
  CHECK_THROWS_AS(p.validate(), GenerationError);
  CHECK_THROWS_AS(GenParams::defaults(Regime::Full, TheoryId::T6).validate(), GenerationError);
  GenParams q = GenParams::defaults(Regime::Partial, TheoryId::T2);
  const std::string d = q.digest();
  q.margin = 3;
  CHECK(q.digest() != d);
}

TEST_CASE("competitor pools respect scope and size limits") {
  Rng rng(4);
  for (TheoryId tid : all_theories()) {
    const TheorySpec& th = builtin_theory(tid);
    for (const std::string& t : usable_templates(th)) {
      const auto gold = instantiate_template(t, th, rng);
      if (!gold) continue;
      INFO(th.short_id << " gold " << gold->text());
      const auto pool = build_competitor_pool(th, *gold, rng);
      CHECK(pool.size() <= 30);
      int mutants = 0;
      std::set<std::string> seen;
      for (const Competitor& c : pool) {
        if (c.tier == Tier::Mutant) ++mutants;
        CHECK(seen.insert(c.hypothesis.text()).second);
        CHECK_FALSE(probe_equivalent(c.hypothesis.formula(), gold->formula()));
        for (Pred p : predicates_used(c.hypothesis.formula()).members()) CHECK(th.scope.allowed.contains(p));
      }
      CHECK(mutants <= 10);
      const int ast = formula_metrics(gold->formula()).ast_size;
      CHECK(ast >= 5);
      CHECK(ast <= 30);
    }
  }
  // T1 forbids Q, so no shortcut mentions it.
  for (const Hypothesis& h : tier2_shortcuts(builtin_theory(TheoryId::T1)))
    CHECK_FALSE(predicates_used(h.formula()).contains(Pred::Q));
}

TEST_CASE("check_world names the failing filter") {
  const GenParams p = GenParams::defaults(Regime::Full, TheoryId::T1);
  const TheorySpec& th = builtin_theory(TheoryId::T1);
  // a0 -R-> a1, P(a1), no Q: a0 needs to be abnormal.
  World w(9);
  w.set_true(Pred::R, 0, 1);
  w.set_true(Pred::P, 1);
  const Hypothesis never = parse_hypothesis("(and (P x) (not (P x)))", th.scope);
  const WorldCheck bad = check_world(p, w, never);
  CHECK_FALSE(bad.passes);
  CHECK(bad.failed == "gold-validity");
  const Hypothesis exact = parse_hypothesis("(exists y (and (R x y) (P y)))", th.scope);
  const WorldCheck ok = check_world(p, w, exact);
  CHECK(ok.gold_valid);
  CHECK(ok.opt == 1);
  CHECK(ok.gold_cost == 1);
  CHECK(ok.passes);
  World empty(9);
  CHECK(check_world(p, empty, exact).failed == "optcost-floor");
}

TEST_CASE("full batch: audits clean, competitors beaten, templates diverse") {
  const BatchParams b = batch(Regime::Full, {TheoryId::T1, TheoryId::T2, TheoryId::T3, TheoryId::T4, TheoryId::T5}, 50, 11);
  const BatchResult r = generate_batch(b);
  REQUIRE(r.instances.size() == 50);
  REQUIRE(r.logs.size() == 50);
  std::map<std::string, int> per_template;
  std::set<std::string> ids;
  for (const InstanceRecord& inst : r.instances) {
    const GenParams p = params_for(b, inst.theory);
    INFO(inst.id);
    CHECK(audit_instance(inst, p).empty());
    CHECK(ids.insert(inst.id).second);
    CHECK(inst.worlds.size() >= std::size_t(p.min_worlds));
    CHECK(inst.worlds.size() <= std::size_t(p.world_budget));
    for (const World& w : inst.worlds) CHECK(w.num_unknown() == 0);
    if (inst.cheater_margin) CHECK(*inst.cheater_margin >= 0);
    check_beaten(inst, p);
    ++per_template[inst.gold_template];
  }
  for (const auto& [t, n] : per_template) {
    INFO(t);
    CHECK(n <= 50 * 0.15);
  }
}

TEST_CASE("generation is deterministic and thread-count independent") {
  BatchParams b = batch(Regime::Full, {TheoryId::T1, TheoryId::T4}, 6, 99);
  const std::string a = dump(generate_batch(b));
  CHECK(a == dump(generate_batch(b)));
  b.threads = 3;
  CHECK(a == dump(generate_batch(b)));
  b.global_seed = 100;
  CHECK(a != dump(generate_batch(b)));
}

TEST_CASE("partial and skeptical batches audit clean") {
  for (Regime reg : {Regime::Partial, Regime::Skeptical}) {
    const BatchParams b = batch(reg, {TheoryId::T1, TheoryId::T6}, reg == Regime::Partial ? 1 : 4, 5);
    const BatchResult r = generate_batch(b);
    for (const InstanceRecord& inst : r.instances) {
      const GenParams p = params_for(b, inst.theory);
      INFO(inst.id);
      CHECK(audit_instance(inst, p).empty());
      check_beaten(inst, p);
      int unknowns = 0;
      for (const World& w : inst.worlds) {
        unknowns += w.num_unknown();
        CHECK(w.unknown_atoms(Pred::P).empty());
        CHECK(w.unknown_atoms(Pred::Q).empty());
      }
      CHECK(unknowns > 0);
      if (reg == Regime::Skeptical) {
        for (const World& w : inst.worlds) CHECK(w.domain_size() == inst.worlds[0].domain_size());
        REQUIRE(inst.opt_cost_uniform.size() == inst.worlds.size());
        for (std::size_t k = 0; k < inst.worlds.size(); ++k) CHECK(inst.opt_cost[k] <= inst.opt_cost_uniform[k]);
      }
    }
  }
}

TEST_CASE("holdouts are reproducible and distinct from training worlds") {
  const BatchParams b = batch(Regime::Full, {TheoryId::T2}, 3, 21);
  BatchResult r = generate_batch(b);
  for (InstanceRecord& inst : r.instances) {
    INFO(inst.id);
    REQUIRE(inst.holdout_available);
    REQUIRE(inst.holdouts.size() == 5);
    for (const World& h : inst.holdouts)
      for (const World& w : inst.worlds) CHECK_FALSE(worlds_equivalent(h, w));
    for (std::size_t k = 0; k < inst.holdouts.size(); ++k)
      CHECK(inst.provenance.holdout_seeds[k] == holdout_seed(b.dataset_path, inst.id, int(k), b.global_seed));
    const std::vector<World> before = inst.holdouts;
    generate_holdouts(inst, params_for(b, inst.theory), b.dataset_path, b.global_seed);
    REQUIRE(inst.holdouts.size() == before.size());
    for (std::size_t k = 0; k < before.size(); ++k) CHECK(worlds_equivalent(before[k], inst.holdouts[k]));
  }
}
