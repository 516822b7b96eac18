#include "doctest.h"

#include "abd/generator.hpp"
#include "abd/prompt.hpp"

using namespace abd;

namespace {

InstanceRecord one(Regime r, TheoryId t) {
  BatchParams b;
  b.scenario = r;
  b.theories = {t};
  b.count = 1;
  b.global_seed = 2;
  b.holdouts = 0;
  return generate_batch(b).instances.at(0);
}

bool has(const std::string& s, const std::string& sub) { return s.find(sub) != std::string::npos; }

int count(const std::string& s, const std::string& sub) {
  int n = 0;
  for (std::size_t p = s.find(sub); p != std::string::npos; p = s.find(sub, p + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("atom set formatting") {
  CHECK(format_atom_set({}) == "{}");
  CHECK(format_atom_set({{Pred::P, 0}, {Pred::P, 3}}) == "{a0, a3}");
  CHECK(format_atom_set({{Pred::R, 1, 2}, {Pred::R, 4, 0}}) == "{(a1, a2), (a4, a0)}");
}

TEST_CASE("system prompt") {
  CHECK(has(system_prompt(), "expert in first-order logic"));
}

TEST_CASE("full prompt: closed world, scope and every world") {
  const InstanceRecord inst = one(Regime::Full, TheoryId::T2);
  const std::string u = render_prompt(inst).user_prompt;
  CHECK(has(u, "Closed World Assumption"));
  CHECK(has(u, "**AllowedAlphaPredicates**: [\"P\", \"R\"]"));
  CHECK(has(u, "**ForbiddenAlphaPredicates**: [\"Ab\", \"Q\", \"S\"]"));
  CHECK(has(u, "**Theory ID**: TH7"));
  CHECK(has(u, render_formula(inst.theory_spec().axiom)));
  CHECK(count(u, "### World W") == int(inst.worlds.size()));
  CHECK_FALSE(has(u, "Unknown Atoms**"));
  CHECK_FALSE(has(u, inst.gold));  // the gold rule never leaks
}

TEST_CASE("partial prompt lists unknown atoms per world") {
  const InstanceRecord inst = one(Regime::Partial, TheoryId::T1);
  const std::string u = render_prompt(inst).user_prompt;
  CHECK(count(u, "**Unknown Atoms**") == int(inst.worlds.size()));
  CHECK(has(u, "**Known Facts**"));
}

TEST_CASE("skeptical prompt asks for all completions") {
  const InstanceRecord inst = one(Regime::Skeptical, TheoryId::T6);
  const std::string u = render_prompt(inst).user_prompt;
  CHECK(has(u, "FOR ALL completions"));
  CHECK(has(u, "**Theory ID**: TH3"));
  CHECK(count(u, "**Unknown Atoms**") == int(inst.worlds.size()));
}
