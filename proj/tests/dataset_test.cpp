#include "doctest.h"

#include <sstream>

#include "abd/dataset.hpp"

using namespace abd;

namespace {

Dataset small_dataset(Regime r, std::vector<TheoryId> th, int count) {
  BatchParams b;
  b.scenario = r;
  b.theories = std::move(th);
  b.count = count;
  b.global_seed = 17;
  b.dataset_path = "data/rt.jsonl";
  b.holdouts = 2;
  return {header_for(b), generate_batch(b).instances};
}

std::string to_text(const Dataset& ds) {
  std::ostringstream out;
  write_dataset(out, ds);
  return out.str();
}

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) v.push_back(l);
  return v;
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const std::string& l : v) s += l + "\n";
  return s;
}

// Loads and returns the error text, or "" when the text loads.
std::string load_error(const std::string& text) {
  std::istringstream in(text);
  try {
    read_dataset(in);
  } catch (const DatasetError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("world json layout") {
  World w(3);
  w.set_true(Pred::P, 2);
  w.set_true(Pred::R, 0, 1);
  w.set_unknown(Pred::S, 1, 1);
  const nlohmann::json j = world_to_json(w);
  CHECK(j.dump() == R"({"P":[2],"Q":[],"R":[[0,1]],"S":[],"n":3,"unknown":{"P":[],"Q":[],"R":[],"S":[[1,1]]}})");
  CHECK(worlds_equivalent(world_from_json(j), w));

  nlohmann::json dup = j;
  dup["P"] = {2, 2};
  CHECK_THROWS(world_from_json(dup));
  nlohmann::json both = j;
  both["S"] = {{1, 1}};
  CHECK_THROWS(world_from_json(both));  // true and unknown at once
  nlohmann::json out = j;
  out["P"] = {3};
  CHECK_THROWS(world_from_json(out));
}

TEST_CASE("load then save is byte-identical") {
  for (Regime r : {Regime::Full, Regime::Skeptical}) {
    const Dataset ds = small_dataset(r, {TheoryId::T1, TheoryId::T2}, 2);
    const std::string text = to_text(ds);
    std::istringstream in(text);
    const Dataset back = read_dataset(in);
    CHECK(back.instances.size() == ds.instances.size());
    CHECK(to_text(back) == text);
    const auto ls = lines_of(text);
    CHECK(ls.size() == ds.instances.size() + 1);
    CHECK(nlohmann::json::parse(ls[0])["format"] == "abd-dataset");
  }
}

TEST_CASE("tampered records are rejected with a line number") {
  const std::string text = to_text(small_dataset(Regime::Full, {TheoryId::T3}, 2));
  const auto ls = lines_of(text);
  CHECK(load_error(text).empty());

  auto edit = [&](int line, auto&& f) {
    auto v = ls;
    nlohmann::json j = nlohmann::json::parse(v[line]);
    f(j);
    v[line] = j.dump();
    return join(v);
  };

  const std::string cost = load_error(edit(2, [](nlohmann::json& j) { j["gold_cost"][0] = j["gold_cost"][0].get<int>() + 1; }));
  CHECK(cost.find("line 3") != std::string::npos);

  CHECK_FALSE(load_error(edit(1, [](nlohmann::json& j) { j["gold"] = "(P x"; })).empty());
  CHECK_FALSE(load_error(edit(1, [](nlohmann::json& j) { j["opt_cost"][0] = 0; })).empty());
  CHECK_FALSE(load_error(edit(1, [](nlohmann::json& j) { j.erase("worlds"); })).empty());
  CHECK_FALSE(load_error(edit(1, [](nlohmann::json& j) { j["competitors"].clear(); j["competitors"].push_back({{"formula", "(Q x)"}, {"tier", "tier1"}}); })).empty());
  CHECK_FALSE(load_error(edit(0, [](nlohmann::json& j) { j["format"] = "other"; })).empty());
  CHECK_FALSE(load_error(join({ls[0], "{not json"})).empty());
  CHECK_FALSE(load_error("").empty());

  // Audit can be skipped for forensic reads.
  std::istringstream in(edit(1, [](nlohmann::json& j) { j["gold_cost"][0] = 99; }));
  CHECK_NOTHROW(read_dataset(in, {.audit = false}));
}

TEST_CASE("header carries the generation overrides") {
  BatchParams b;
  b.scenario = Regime::Partial;
  b.theories = {TheoryId::T5};
  b.global_seed = 8;
  b.margin = 3;
  b.min_worlds = 5;
  const DatasetHeader h = header_for(b);
  const DatasetHeader back = header_from_json(header_to_json(h));
  CHECK(back.margin == 3);
  CHECK(back.min_worlds == 5);
  CHECK(back.global_seed == 8);
  CHECK(back.params_digest == h.params_digest);
  CHECK(params_for(back, TheoryId::T5).margin == 3);
}
