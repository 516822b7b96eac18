#include "abd/templates.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "abd/world.hpp"

namespace abd {

namespace {

std::vector<Pred> unary_allowed(const TheorySpec& th) {
  std::vector<Pred> v;
  for (Pred p : {Pred::P, Pred::Q})
    if (th.scope.allowed.contains(p)) v.push_back(p);
  return v;
}

std::vector<Pred> binary_allowed(const TheorySpec& th) {
  std::vector<Pred> v;
  for (Pred p : {Pred::R, Pred::S})
    if (th.scope.allowed.contains(p)) v.push_back(p);
  return v;
}

std::string lit(Pred p, const char* var, bool neg) {
  std::string a = std::string("(") + pred_name(p) + " " + var + ")";
  return neg ? "(not " + a + ")" : a;
}

std::string rel(Pred p, const char* a, const char* b) {
  return std::string("(") + pred_name(p) + " " + a + " " + b + ")";
}

struct Slots {
  std::string u1, u2;  // unary literals on x, different predicates
  Pred b1, b2;         // binary predicates
  std::string ly, lz;  // unary literals on y and z
  std::string lz_y;    // the y-literal's predicate and sign, applied to z
};

using Builder = std::function<std::string(const Slots&)>;

struct TemplateDef {
  GoldTemplate info;
  Builder build;
};

const std::vector<TemplateDef>& defs() {
  static const std::vector<TemplateDef> d = {
      {{"unary_pair", true}, [](const Slots& s) { return "(and " + s.u1 + " " + s.u2 + ")"; }},
      {{"unary_selfloop", false},
       [](const Slots& s) { return "(and " + s.u1 + " " + rel(s.b1, "x", "x") + ")"; }},
      {{"unary_no_selfloop", false},
       [](const Slots& s) { return "(and " + s.u1 + " (not " + rel(s.b1, "x", "x") + "))"; }},
      {{"has_witness", false},
       [](const Slots& s) { return "(exists y (and " + rel(s.b1, "x", "y") + " " + s.ly + "))"; }},
      {{"no_successor", false},
       [](const Slots& s) { return "(not (exists y " + rel(s.b1, "x", "y") + "))"; }},
      {{"unary_no_successor", false},
       [](const Slots& s) { return "(and " + s.u1 + " (not (exists y " + rel(s.b1, "x", "y") + ")))"; }},
      {{"all_successors", false},
       [](const Slots& s) {
         return "(forall y (or (not " + rel(s.b1, "x", "y") + ") " + s.ly + "))";
       }},
      {{"unary_witness", false},
       [](const Slots& s) {
         return "(and " + s.u1 + " (exists y (and " + rel(s.b1, "x", "y") + " " + s.ly + ")))";
       }},
      {{"unary_all", false},
       [](const Slots& s) {
         return "(and " + s.u1 + " (forall y (or (not " + rel(s.b1, "x", "y") + ") " + s.ly + ")))";
       }},
      {{"no_witness", false},
       [](const Slots& s) {
         return "(not (exists y (and " + rel(s.b1, "x", "y") + " " + s.ly + ")))";
       }},
      {{"unary_no_witness", false},
       [](const Slots& s) {
         return "(and " + s.u1 + " (not (exists y (and " + rel(s.b1, "x", "y") + " " + s.ly + "))))";
       }},
      {{"nonempty_all", false},
       [](const Slots& s) {
         return "(and (exists y " + rel(s.b1, "x", "y") + ") (forall y (or (not " +
                rel(s.b1, "x", "y") + ") " + s.ly + ")))";
       }},
      {{"two_hop_all", false},
       [](const Slots& s) {
         return "(exists y (and " + rel(s.b1, "x", "y") + " (forall z (or (not " +
                rel(s.b2, "y", "z") + ") " + s.lz + "))))";
       }},
      {{"two_hop_witness", false},
       [](const Slots& s) {
         return "(exists y (and " + rel(s.b1, "x", "y") + " (exists z (and " + rel(s.b2, "y", "z") +
                " " + s.lz + "))))";
       }},
      {{"two_successors", false},
       [](const Slots& s) {
         return "(exists y (exists z (and " + rel(s.b1, "x", "y") + " " + rel(s.b1, "x", "z") +
                " (not (= y z)))))";
       }},
      {{"two_witnesses", false},
       [](const Slots& s) {
         return "(exists y (exists z (and " + rel(s.b1, "x", "y") + " " + rel(s.b1, "x", "z") +
                " (not (= y z)) " + s.ly + " " + s.lz_y + ")))";
       }},
      {{"predecessor_witness", false},
       [](const Slots& s) { return "(exists y (and " + rel(s.b1, "y", "x") + " " + s.ly + "))"; }},
  };
  return d;
}

const TemplateDef* find_def(const std::string& id) {
  for (const TemplateDef& d : defs())
    if (d.info.id == id) return &d;
  return nullptr;
}

Slots draw_slots(const TheorySpec& th, Rng& rng) {
  const auto un = unary_allowed(th);
  const auto bi = binary_allowed(th);
  Slots s;
  const std::size_t k1 = rng.index(un.size());
  s.u1 = lit(un[k1], "x", rng.coin());
  if (un.size() > 1) s.u2 = lit(un[(k1 + 1 + rng.index(un.size() - 1)) % un.size()], "x", rng.coin());
  s.b1 = bi[rng.index(bi.size())];
  s.b2 = bi[rng.index(bi.size())];
  const Pred py = un[rng.index(un.size())];
  const bool ny = rng.coin();
  s.ly = lit(py, "y", ny);
  s.lz_y = lit(py, "z", ny);
  s.lz = lit(un[rng.index(un.size())], "z", rng.coin());
  return s;
}

// Closed random worlds used to compare formulas extensionally.
const std::vector<World>& probe_worlds() {
  static const std::vector<World> worlds = [] {
    Rng rng(0x5eed0fab);
    std::vector<World> v;
    for (int k = 0; k < 48; ++k) {
      const int n = static_cast<int>(rng.uniform_int(2, 7));
      World w(n);
      for (Pred p : {Pred::P, Pred::Q, Pred::R, Pred::S}) {
        const double rho = rng.uniform_real(0.1, 0.7);
        for (int i = 0; i < n; ++i) {
          if (arity(p) == 1) {
            if (rng.uniform_real(0, 1) < rho) w.set_true(p, i);
          } else {
            for (int j = 0; j < n; ++j)
              if (rng.uniform_real(0, 1) < rho * 0.7) w.set_true(p, i, j);
          }
        }
      }
      v.push_back(std::move(w));
    }
    return v;
  }();
  return worlds;
}

}  // namespace

const std::vector<GoldTemplate>& gold_templates() {
  static const std::vector<GoldTemplate> v = [] {
    std::vector<GoldTemplate> out;
    for (const TemplateDef& d : defs()) out.push_back(d.info);
    return out;
  }();
  return v;
}

namespace {

bool fillable(const GoldTemplate& t, const TheorySpec& theory) {
  if (binary_allowed(theory).empty() || unary_allowed(theory).empty()) return false;
  return unary_allowed(theory).size() >= 2 || !t.needs_two_unary;
}

}  // namespace

std::vector<std::string> usable_templates(const TheorySpec& theory) {
  // A template is usable when some instantiation can mark a forced element.
  std::vector<std::string> ids;
  for (const GoldTemplate& t : gold_templates()) {
    if (!fillable(t, theory)) continue;
    Rng rng(0x7e3b1a7e);
    for (int k = 0; k < 64; ++k) {
      const auto h = instantiate_template(t.id, theory, rng);
      if (h && gold_compatible(*h, theory)) {
        ids.push_back(t.id);
        break;
      }
    }
  }
  return ids;
}

std::optional<Hypothesis> instantiate_template(const std::string& id, const TheorySpec& theory,
                                               Rng& rng) {
  const TemplateDef* d = find_def(id);
  if (!d) return std::nullopt;
  if (!fillable(d->info, theory)) return std::nullopt;
  const Slots s = draw_slots(theory, rng);
  return parse_hypothesis(d->build(s), theory.scope);
}

bool gold_compatible(const Hypothesis& alpha, const TheorySpec& theory) {
  const Completion none;
  for (const World& w : probe_worlds()) {
    for (int a = 0; a < w.domain_size(); ++a) {
      const Env env = Env().bind(Var::X, a);
      if (eval_formula(w, none, env, alpha.formula()) && eval_formula(w, none, env, theory.antecedent) &&
          !eval_formula(w, none, env, theory.consequent))
        return true;
    }
  }
  return false;
}

bool probe_equivalent(const Formula& a, const Formula& b) {
  const Completion none;
  for (const World& w : probe_worlds()) {
    for (int e = 0; e < w.domain_size(); ++e) {
      const Env env = Env().bind(Var::X, e);
      if (eval_formula(w, none, env, a) != eval_formula(w, none, env, b)) return false;
    }
  }
  return true;
}

const char* tier_name(Tier t) {
  switch (t) {
    case Tier::Tier1: return "tier1";
    case Tier::Tier2: return "tier2";
    case Tier::Mutant: return "mutant";
  }
  return "?";
}

namespace {

void add_scoped(std::vector<Hypothesis>& out, const std::string& text, const TheorySpec& th) {
  try {
    out.push_back(parse_hypothesis(text, th.scope));
  } catch (const ScopeError&) {
  }
}

}  // namespace

std::vector<Hypothesis> tier1_shortcuts(const TheorySpec& theory) {
  std::vector<std::string> texts = {"(or (P x) (not (P x)))", "(and (P x) (not (P x)))"};
  for (Pred p : {Pred::P, Pred::Q}) {
    texts.push_back(lit(p, "x", false));
    texts.push_back(lit(p, "x", true));
  }
  for (Pred b : {Pred::R, Pred::S}) {
    texts.push_back(rel(b, "x", "x"));
    texts.push_back("(not " + rel(b, "x", "x") + ")");
    texts.push_back("(exists y " + rel(b, "x", "y") + ")");
    texts.push_back("(not (exists y " + rel(b, "x", "y") + "))");
    texts.push_back("(exists y " + rel(b, "y", "x") + ")");
  }
  for (bool n1 : {false, true})
    for (bool n2 : {false, true}) {
      texts.push_back("(and " + lit(Pred::P, "x", n1) + " " + lit(Pred::Q, "x", n2) + ")");
      texts.push_back("(or " + lit(Pred::P, "x", n1) + " " + lit(Pred::Q, "x", n2) + ")");
    }
  std::vector<Hypothesis> out;
  for (const std::string& t : texts) add_scoped(out, t, theory);
  return out;
}

const std::vector<std::string>& tier2_shortcut_texts() {
  static const std::vector<std::string> v = {
      "(exists y (and (R x y) (P y)))",
      "(and (P x) (exists y (R x y)))",
      "(exists y (and (S x y) (P y)))",
      "(and (P x) (exists y (S x y)))",
      "(and (P x) (not (exists y (R x y))))",
      "(and (P x) (not (exists y (S x y))))",
      "(exists y (and (R x y) (not (P y))))",
      "(exists y (and (S x y) (not (P y))))",
      "(and (not (P x)) (exists y (R x y)))",
      "(exists y (and (R y x) (P y)))",
      "(forall y (or (not (R x y)) (P y)))",
      "(forall y (or (not (S x y)) (P y)))",
      "(exists y (and (R x y) (Q y)))",
      "(exists y (and (S x y) (Q y)))",
      "(and (P x) (exists y (and (R x y) (P y))))",
      "(exists y (and (R x y) (S x y)))",
  };
  return v;
}

std::vector<Hypothesis> tier2_shortcuts(const TheorySpec& theory) {
  std::vector<Hypothesis> out;
  for (const std::string& t : tier2_shortcut_texts()) add_scoped(out, t, theory);
  return out;
}

namespace {

Formula rebuild(const Formula& f, std::vector<Formula> kids) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::Not: return Formula::negation(std::move(kids[0]));
    case K::And: return Formula::conjunction(std::move(kids));
    case K::Or: return Formula::disjunction(std::move(kids));
    case K::Implies: return Formula::implies(std::move(kids[0]), std::move(kids[1]));
    case K::Forall: return Formula::forall(f.bound_var(), std::move(kids[0]));
    case K::Exists: return Formula::exists(f.bound_var(), std::move(kids[0]));
    default: return f;
  }
}

}  // namespace

std::vector<Formula> single_mutations(const Formula& f) {
  using K = Formula::Kind;
  std::vector<Formula> out;
  switch (f.kind()) {
    case K::Atom:
    case K::Equal: out.push_back(Formula::negation(f)); break;
    case K::Not: out.push_back(f.child()); break;
    case K::And:
    case K::Or: {
      out.push_back(f.kind() == K::And ? Formula::disjunction(f.children())
                                       : Formula::conjunction(f.children()));
      for (std::size_t i = 0; i < f.children().size(); ++i) {
        std::vector<Formula> rest;
        for (std::size_t j = 0; j < f.children().size(); ++j)
          if (j != i) rest.push_back(f.children()[j]);
        out.push_back(rest.size() == 1 ? rest[0] : rebuild(f, std::move(rest)));
      }
      break;
    }
    case K::Forall: out.push_back(Formula::exists(f.bound_var(), f.child())); break;
    case K::Exists: out.push_back(Formula::forall(f.bound_var(), f.child())); break;
    case K::Implies: break;
  }
  for (std::size_t i = 0; i < f.children().size(); ++i) {
    for (Formula& m : single_mutations(f.children()[i])) {
      std::vector<Formula> kids = f.children();
      kids[i] = std::move(m);
      out.push_back(rebuild(f, std::move(kids)));
    }
  }
  return out;
}

std::vector<Hypothesis> gold_mutants(const Hypothesis& gold, const TheorySpec& theory, Rng& rng,
                                     int limit) {
  std::vector<Formula> cands = single_mutations(gold.formula());
  // Shuffle, then keep the first `limit` that survive the filters.
  for (std::size_t i = cands.size(); i > 1; --i) std::swap(cands[i - 1], cands[rng.index(i)]);
  std::vector<Hypothesis> out;
  std::set<std::string> seen{gold.text()};
  for (const Formula& f : cands) {
    if (static_cast<int>(out.size()) >= limit) break;
    const std::string text = render_formula(f);
    if (!seen.insert(text).second) continue;
    std::optional<Hypothesis> h;
    try {
      h = validate_hypothesis(f, theory.scope);
    } catch (const ScopeError&) {
      continue;
    }
    if (probe_equivalent(f, gold.formula())) continue;
    const bool dup = std::any_of(out.begin(), out.end(),
                                 [&](const Hypothesis& o) { return probe_equivalent(o.formula(), f); });
    if (dup) continue;
    out.push_back(std::move(*h));
  }
  return out;
}

std::vector<Competitor> build_competitor_pool(const TheorySpec& theory, const Hypothesis& gold,
                                              Rng& rng, int cap) {
  std::vector<Competitor> pool;
  std::set<std::string> seen{gold.text()};
  auto add = [&](const Hypothesis& h, Tier t) {
    if (static_cast<int>(pool.size()) >= cap) return;
    if (!seen.insert(h.text()).second) return;
    if (probe_equivalent(h.formula(), gold.formula())) return;
    pool.push_back({h, t});
  };
  for (const Hypothesis& h : tier1_shortcuts(theory)) add(h, Tier::Tier1);
  for (const Hypothesis& h : gold_mutants(gold, theory, rng, 10)) add(h, Tier::Mutant);
  for (const Hypothesis& h : tier2_shortcuts(theory)) add(h, Tier::Tier2);
  return pool;
}

}  // namespace abd
