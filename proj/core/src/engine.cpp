#include "abd/engine.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <cstdint>

namespace abd {

namespace {

enum class Tri : std::uint8_t { F = 0, T = 1, U = 2 };

Tri tnot(Tri t) { return t == Tri::U ? Tri::U : (t == Tri::T ? Tri::F : Tri::T); }

// Flat form of a Formula for repeated evaluation.
struct Program {
  struct Node {
    Formula::Kind kind;
    Pred pred;
    std::uint8_t v0, v1;
    std::int32_t first, count;  // range in kids
  };
  std::vector<Node> nodes;
  std::vector<std::int32_t> kids;
  std::int32_t root = -1;

  explicit Program(const Formula& f) { root = add(f); }

  std::int32_t add(const Formula& f) {
    Node nd{f.kind(), Pred::P, 0, 0, 0, 0};
    if (f.kind() == Formula::Kind::Atom) nd.pred = f.pred();
    const auto args = f.args();
    if (!args.empty()) nd.v0 = static_cast<std::uint8_t>(args[0]);
    if (args.size() > 1) nd.v1 = static_cast<std::uint8_t>(args[1]);
    std::vector<std::int32_t> mine;
    for (const Formula& c : f.children()) mine.push_back(add(c));
    nd.first = static_cast<std::int32_t>(kids.size());
    nd.count = static_cast<std::int32_t>(mine.size());
    kids.insert(kids.end(), mine.begin(), mine.end());
    nodes.push_back(nd);
    return static_cast<std::int32_t>(nodes.size()) - 1;
  }
};

constexpr std::int32_t kFalse = -2;
constexpr std::int32_t kTrue = -1;

// A world plus a partial assignment to its unknown atoms.
class Grounding {
 public:
  explicit Grounding(const World& w) : n_(w.domain_size()), assign_(w.num_unknown(), -1) {
    for (Pred p : {Pred::P, Pred::Q, Pred::R, Pred::S}) {
      auto& c = code_[static_cast<int>(p)];
      const int cells = arity(p) == 1 ? n_ : n_ * n_;
      c.resize(cells);
      for (int k = 0; k < cells; ++k) {
        const int i = arity(p) == 1 ? k : k / n_;
        const int j = arity(p) == 1 ? 0 : k % n_;
        switch (w.state(p, i, j)) {
          case AtomState::False: c[k] = kFalse; break;
          case AtomState::True: c[k] = kTrue; break;
          case AtomState::Unknown: c[k] = w.unknown_index({p, i, j}); break;
        }
      }
    }
  }

  int n() const { return n_; }
  int num_unknown() const { return static_cast<int>(assign_.size()); }
  std::vector<std::int8_t>& assignment() { return assign_; }

  Completion completion() const {
    std::vector<std::uint8_t> v(assign_.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = assign_[k] > 0 ? 1 : 0;
    return Completion(std::move(v));
  }

  Tri eval(const Program& p, std::int32_t node, std::array<int, kNumVars>& env, int& br) const {
    const Program::Node& nd = p.nodes[node];
    using K = Formula::Kind;
    switch (nd.kind) {
      case K::Atom: {
        const int s = static_cast<int>(nd.pred);
        assert(s < kNumObservedPreds);
        const int i = env[nd.v0];
        const int k = arity(nd.pred) == 1 ? i : i * n_ + env[nd.v1];
        const std::int32_t c = code_[s][k];
        if (c == kFalse) return Tri::F;
        if (c == kTrue) return Tri::T;
        const std::int8_t a = assign_[c];
        if (a < 0) {
          br = c;
          return Tri::U;
        }
        return a ? Tri::T : Tri::F;
      }
      case K::Equal: return env[nd.v0] == env[nd.v1] ? Tri::T : Tri::F;
      case K::Not: return tnot(eval(p, p.kids[nd.first], env, br));
      case K::And:
      case K::Or: {
        const Tri stop = nd.kind == K::And ? Tri::F : Tri::T;
        const int saved = br;
        bool unknown = false;
        for (std::int32_t c = 0; c < nd.count; ++c) {
          const Tri r = eval(p, p.kids[nd.first + c], env, br);
          if (r == stop) {
            br = saved;
            return stop;
          }
          if (r == Tri::U) unknown = true;
        }
        if (unknown) return Tri::U;
        br = saved;
        return tnot(stop);
      }
      case K::Implies: {
        const int saved = br;
        const Tri l = eval(p, p.kids[nd.first], env, br);
        if (l == Tri::F) {
          br = saved;
          return Tri::T;
        }
        const int after_l = br;
        const Tri r = eval(p, p.kids[nd.first + 1], env, br);
        if (r == Tri::T) {
          br = saved;
          return Tri::T;
        }
        if (l == Tri::T) return r;  // r is F (br restored by callee) or U
        if (r == Tri::F) br = after_l;
        return Tri::U;
      }
      case K::Forall:
      case K::Exists: {
        const Tri stop = nd.kind == K::Forall ? Tri::F : Tri::T;
        const int saved = br;
        const int old = env[nd.v0];
        bool unknown = false;
        Tri out = tnot(stop);
        for (int e = 0; e < n_; ++e) {
          env[nd.v0] = e;
          const Tri r = eval(p, p.kids[nd.first], env, br);
          if (r == stop) {
            out = stop;
            break;
          }
          if (r == Tri::U) unknown = true;
        }
        env[nd.v0] = old;
        if (out == stop) {
          br = saved;
          return stop;
        }
        if (unknown) return Tri::U;
        br = saved;
        return out;
      }
    }
    return Tri::U;
  }

 private:
  int n_;
  std::array<std::vector<std::int32_t>, kNumObservedPreds> code_;
  std::vector<std::int8_t> assign_;
};

// Per-element quantities the searches reason about.
enum class Target {
  Bad,     // Ante & ~alpha & ~Cons: the grounded axiom fails at this element
  Forced,  // Ante & ~Cons: the element must be abnormal
  Alpha,   // alpha holds
};

class Search {
 public:
  Search(const World& w, const TheorySpec& th, const Formula* alpha)
      : g_(w), ante_(th.antecedent), cons_(th.consequent), alpha_(alpha ? *alpha : th.antecedent),
        has_alpha_(alpha != nullptr), cells_(w.domain_size()) {}

  Grounding& grounding() { return g_; }
  int n() const { return g_.n(); }

  // Three-valued target at element a. br receives an unassigned atom the
  // value depends on when the result is U.
  Tri status(int a, Target t, int& br) {
    Cell& c = cells_[a];
    if (t == Target::Alpha) return comp(c, a, 2, br);
    const Tri ante = comp(c, a, 0, br);
    if (ante == Tri::F) return Tri::F;
    int br_a = br;
    Tri hyp = Tri::F;
    int br_h = -1;
    if (t == Target::Bad) {
      hyp = comp(c, a, 2, br_h);
      if (hyp == Tri::T) return Tri::F;
    }
    int br_c = -1;
    const Tri cons = comp(c, a, 1, br_c);
    if (cons == Tri::T) return Tri::F;
    if (ante == Tri::T && hyp == Tri::F && cons == Tri::F) return Tri::T;
    br = ante == Tri::U ? br_a : (hyp == Tri::U ? br_h : br_c);
    return Tri::U;
  }

  struct Cell {
    std::array<Tri, 3> v{Tri::U, Tri::U, Tri::U};
  };
  std::vector<Cell> save() const { return cells_; }
  void restore(const std::vector<Cell>& s) { cells_ = s; }

 private:
  Tri comp(Cell& c, int a, int which, int& br) {
    if (c.v[which] != Tri::U) return c.v[which];
    assert(which != 2 || has_alpha_);
    const Program& p = which == 0 ? ante_ : (which == 1 ? cons_ : alpha_);
    std::array<int, kNumVars> env{a, 0, 0, 0};
    int b = -1;
    const Tri r = g_.eval(p, p.root, env, b);
    c.v[which] = r;
    if (r == Tri::U) br = b;
    return r;
  }

  Grounding g_;
  Program ante_, cons_, alpha_;
  bool has_alpha_;
  std::vector<Cell> cells_;
};

// Depth-first search over partial completions. Each node scans the elements,
// asks `visit` what to do, and branches on the returned atom.
class Driver {
 public:
  explicit Driver(Search& s) : s_(s) {}

  // Returns true to stop the whole search. `node` returns the atom to branch
  // on, or -1 to close this sub-tree (after recording whatever it found).
  template <class NodeFn>
  bool run(NodeFn&& node) {
    bool stop = false;
    const int br = node(stop);
    if (stop) return true;
    if (br < 0) return false;
    auto& asg = s_.grounding().assignment();
    const auto saved = s_.save();
    for (std::int8_t val : {std::int8_t(0), std::int8_t(1)}) {
      asg[br] = val;
      if (run(node)) {
        asg[br] = -1;
        return true;
      }
      s_.restore(saved);
    }
    asg[br] = -1;
    return false;
  }

 private:
  Search& s_;
};

// Partial: some completion makes every element good.
bool exists_satisfying(Search& s, std::optional<Completion>* witness) {
  bool found = false;
  Driver(s).run([&](bool& stop) {
    int br = -1;
    for (int a = 0; a < s.n(); ++a) {
      int b = -1;
      const Tri t = s.status(a, Target::Bad, b);
      if (t == Tri::T) return -1;
      if (t == Tri::U && br < 0) br = b;
    }
    if (br < 0) {
      found = true;
      stop = true;
      if (witness) *witness = s.grounding().completion();
    }
    return br;
  });
  return found;
}

// Skeptical: some completion makes some element bad.
bool exists_counterexample(Search& s, std::optional<Completion>* witness) {
  bool found = false;
  Driver(s).run([&](bool& stop) {
    int br = -1;
    for (int a = 0; a < s.n(); ++a) {
      int b = -1;
      const Tri t = s.status(a, Target::Bad, b);
      if (t == Tri::T) {
        found = true;
        stop = true;
        if (witness) *witness = s.grounding().completion();
        return -1;
      }
      if (t == Tri::U && br < 0) br = b;
    }
    return br;
  });
  return found;
}

// Count of elements whose target is true, optimised over completions.
// `feasible` adds the Partial constraint that no element is bad.
int optimise_count(Search& s, Target target, bool maximise, bool feasible) {
  const int n = s.n();
  int best = maximise ? -1 : n + 1;
  Driver(s).run([&](bool&) {
    int br_feas = -1, br_obj = -1;
    if (feasible) {
      for (int a = 0; a < n; ++a) {
        int b = -1;
        const Tri t = s.status(a, Target::Bad, b);
        if (t == Tri::T) return -1;
        if (t == Tri::U && br_feas < 0) br_feas = b;
      }
    }
    int sure = 0, open = 0;
    for (int a = 0; a < n; ++a) {
      int b = -1;
      const Tri t = s.status(a, target, b);
      if (t == Tri::T) ++sure;
      if (t == Tri::U) {
        ++open;
        if (br_obj < 0) br_obj = b;
      }
    }
    if (maximise ? sure + open <= best : sure >= best) return -1;
    if (br_feas < 0 && open == 0) {
      best = sure;
      return -1;
    }
    return br_feas >= 0 ? br_feas : br_obj;
  });
  return best;
}

// Elements whose target is true under at least one completion.
int count_possible(const World& w, const TheorySpec& th, const Formula* alpha, Target target) {
  Search root(w, th, alpha);
  int k = 0;
  for (int a = 0; a < root.n(); ++a) {
    int b = -1;
    const Tri t0 = root.status(a, target, b);
    if (t0 != Tri::U) {
      k += t0 == Tri::T;
      continue;
    }
    Search sa(w, th, alpha);
    bool hit = false;
    Driver(sa).run([&](bool& stop) {
      int br = -1;
      const Tri t = sa.status(a, target, br);
      if (t == Tri::T) {
        hit = true;
        stop = true;
      }
      return t == Tri::U ? br : -1;
    });
    k += hit;
  }
  return k;
}

int count_full(Search& s, Target t) {
  int k = 0;
  for (int a = 0; a < s.n(); ++a) {
    int b = -1;
    if (s.status(a, t, b) == Tri::T) ++k;
  }
  return k;
}

}  // namespace

WorldResult evaluate_world(Regime regime, const TheorySpec& theory, const World& w,
                           const Hypothesis& alpha) {
  WorldResult r;
  Search s(w, theory, &alpha.formula());
  switch (regime) {
    case Regime::Full: {
      r.valid = world_valid(regime, theory, w, alpha);
      if (r.valid) r.cost = count_full(s, Target::Alpha);
      return r;
    }
    case Regime::Partial: {
      r.valid = exists_satisfying(s, &r.witness);
      if (r.valid) {
        Search s2(w, theory, &alpha.formula());
        r.cost = optimise_count(s2, Target::Alpha, false, true);
      }
      return r;
    }
    case Regime::Skeptical: {
      r.valid = !exists_counterexample(s, &r.witness);
      if (r.valid) {
        Search s2(w, theory, &alpha.formula());
        r.cost = optimise_count(s2, Target::Alpha, true, false);
      }
      return r;
    }
  }
  return r;
}

bool world_valid(Regime regime, const TheorySpec& theory, const World& w, const Hypothesis& alpha) {
  Search s(w, theory, &alpha.formula());
  switch (regime) {
    case Regime::Full:
      if (w.num_unknown() > 0)
        throw ContractError("Full regime requires a world without unknown atoms");
      for (int a = 0; a < s.n(); ++a) {
        int b = -1;
        if (s.status(a, Target::Bad, b) != Tri::F) return false;
      }
      return true;
    case Regime::Partial: return exists_satisfying(s, nullptr);
    case Regime::Skeptical: return !exists_counterexample(s, nullptr);
  }
  return false;
}

int worst_case_count(const World& w, const Hypothesis& alpha) {
  // The theory is irrelevant for this count; any spec supplies the slots.
  Search s(w, builtin_theory(TheoryId::T1), &alpha.formula());
  return optimise_count(s, Target::Alpha, true, false);
}

int violation_count(Regime regime, const TheorySpec& theory, const World& w, const Hypothesis& alpha) {
  switch (regime) {
    case Regime::Full: {
      if (w.num_unknown() > 0)
        throw ContractError("Full regime requires a world without unknown atoms");
      Search s(w, theory, &alpha.formula());
      return count_full(s, Target::Bad);
    }
    case Regime::Partial: {
      Search s(w, theory, &alpha.formula());
      return optimise_count(s, Target::Bad, false, false);
    }
    case Regime::Skeptical: return count_possible(w, theory, &alpha.formula(), Target::Bad);
  }
  return 0;
}

EngineVerdict validity(Regime regime, const TheorySpec& theory, std::span<const World> worlds,
                       const Hypothesis& alpha) {
  EngineVerdict v;
  for (const World& w : worlds) {
    Search s(w, theory, &alpha.formula());
    bool ok = false;
    std::optional<Completion> wit;
    switch (regime) {
      case Regime::Full: ok = world_valid(regime, theory, w, alpha); break;
      case Regime::Partial: ok = exists_satisfying(s, &wit); break;
      case Regime::Skeptical: ok = !exists_counterexample(s, &wit); break;
    }
    v.per_world_valid.push_back(ok);
    v.per_world_witness.push_back(std::move(wit));
    v.valid = v.valid && ok;
  }
  return v;
}

int opt_cost(Regime regime, const TheorySpec& theory, const World& w, OptVariant variant) {
  Search s(w, theory, nullptr);
  switch (regime) {
    case Regime::Full:
      if (w.num_unknown() > 0)
        throw ContractError("Full regime requires a world without unknown atoms");
      // Ab occurs only as Ab(x) guarding the element's own instance, so the
      // least Ab is exactly the set of elements where Ante & ~Cons holds.
      return count_full(s, Target::Forced);
    case Regime::Partial: return optimise_count(s, Target::Forced, false, false);
    case Regime::Skeptical:
      if (variant == OptVariant::Pointwise) return optimise_count(s, Target::Forced, true, false);
      // One Ab for every completion: an element must be in it iff some
      // completion forces it.
      return count_possible(w, theory, nullptr, Target::Forced);
  }
  return 0;
}

OptReport opt_costs(Regime regime, const TheorySpec& theory, std::span<const World> worlds,
                    OptVariant variant) {
  OptReport r;
  r.regime = regime;
  for (const World& w : worlds) {
    r.per_world.push_back(opt_cost(regime, theory, w, variant));
    r.total += r.per_world.back();
  }
  return r;
}

CostReport cost(Regime regime, const TheorySpec& theory, std::span<const World> worlds,
                const Hypothesis& alpha) {
  CostReport r;
  r.regime = regime;
  for (std::size_t k = 0; k < worlds.size(); ++k) {
    const WorldResult wr = evaluate_world(regime, theory, worlds[k], alpha);
    if (!wr.valid)
      throw ContractError("cost requested for a hypothesis invalid on world " + std::to_string(k));
    r.per_world_cost.push_back(*wr.cost);
    r.total += *wr.cost;
  }
  return r;
}

CostReport gaps(CostReport c, const OptReport& opt, std::optional<int> gold_cost) {
  if (c.regime != opt.regime) throw ContractError("cost and OptCost computed under different regimes");
  if (c.per_world_cost.size() != opt.per_world.size())
    throw ContractError("cost and OptCost cover different world lists");
  c.opt_per_world = opt.per_world;
  c.opt_total = opt.total;
  c.gap_total = c.total - c.opt_total;
  const double m = c.per_world_cost.empty() ? 1.0 : double(c.per_world_cost.size());
  c.gap_normalized = c.gap_total / m;
  c.gold_cost = gold_cost;
  if (gold_cost) c.gap_gold_normalized = (c.total - *gold_cost) / m;
  return c;
}

CostReport gaps(CostReport c, const OptReport& opt, const TheorySpec& theory,
                std::span<const World> worlds, const Hypothesis& gold) {
  const CostReport g = cost(c.regime, theory, worlds, gold);
  return gaps(std::move(c), opt, g.total);
}

}  // namespace abd
