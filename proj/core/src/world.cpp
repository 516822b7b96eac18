#include "abd/world.hpp"

#include <bit>
#include <cmath>
#include <sstream>

namespace abd {

std::string atom_name(const GroundAtom& a) {
  std::ostringstream os;
  os << pred_name(a.pred) << "(a" << a.i;
  if (arity(a.pred) == 2) os << ",a" << a.j;
  os << ')';
  return os.str();
}

World::World(int domain_size) : n_(domain_size) {
  if (n_ < 1 || n_ > kMaxDomainSize)
    throw WorldError("domain size must be in [1, " + std::to_string(kMaxDomainSize) + "]");
  for (Pred p : {Pred::P, Pred::Q, Pred::R, Pred::S}) {
    const int cells = arity(p) == 1 ? n_ : n_ * n_;
    states_[slot(p)].assign(cells, AtomState::False);
    unknown_pos_[slot(p)].assign(cells, -1);
  }
}

void World::check(const GroundAtom& a) const {
  slot(a.pred);
  const bool ok = a.i >= 0 && a.i < n_ &&
                  (arity(a.pred) == 1 ? a.j == 0 : (a.j >= 0 && a.j < n_));
  if (!ok) throw WorldError("atom " + atom_name(a) + " outside domain of size " + std::to_string(n_));
}

void World::set(const GroundAtom& a, AtomState s) {
  check(a);
  AtomState& cell = states_[slot(a.pred)][offset(a.pred, a.i, a.j)];
  const bool reidx = (cell == AtomState::Unknown) != (s == AtomState::Unknown);
  cell = s;
  if (reidx) reindex();
}

void World::reindex() {
  unknown_.clear();
  for (Pred p : {Pred::P, Pred::Q, Pred::R, Pred::S}) {
    auto& st = states_[slot(p)];
    auto& pos = unknown_pos_[slot(p)];
    for (std::size_t k = 0; k < st.size(); ++k) {
      if (st[k] == AtomState::Unknown) {
        pos[k] = static_cast<std::int32_t>(unknown_.size());
        const int i = arity(p) == 1 ? int(k) : int(k) / n_;
        const int j = arity(p) == 1 ? 0 : int(k) % n_;
        unknown_.push_back({p, i, j});
      } else {
        pos[k] = -1;
      }
    }
  }
}

int World::unknown_index(const GroundAtom& a) const {
  check(a);
  return unknown_pos_[slot(a.pred)][offset(a.pred, a.i, a.j)];
}

namespace {

std::vector<GroundAtom> collect(const World& w, Pred p, AtomState want) {
  std::vector<GroundAtom> out;
  const int n = w.domain_size();
  if (arity(p) == 1) {
    for (int i = 0; i < n; ++i)
      if (w.state(p, i) == want) out.push_back({p, i, 0});
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (w.state(p, i, j) == want) out.push_back({p, i, j});
  }
  return out;
}

}  // namespace

std::vector<GroundAtom> World::true_atoms(Pred p) const { return collect(*this, p, AtomState::True); }
std::vector<GroundAtom> World::unknown_atoms(Pred p) const {
  return collect(*this, p, AtomState::Unknown);
}

bool worlds_equivalent(const World& a, const World& b) { return a == b; }

Completion Completion::from_bits(int num_atoms, std::uint64_t pattern) {
  std::vector<std::uint8_t> v(num_atoms);
  for (int k = 0; k < num_atoms; ++k) v[k] = (pattern >> k) & 1u;
  return Completion(std::move(v));
}

AbnormalSet::AbnormalSet(int domain_size, std::uint64_t mask) : n_(domain_size), mask_(mask) {
  if (domain_size < 0 || domain_size > kMaxDomainSize) throw WorldError("bad domain size");
  if (domain_size < 64 && (mask >> domain_size) != 0)
    throw WorldError("abnormal set member outside the domain");
}

int AbnormalSet::size() const { return std::popcount(mask_); }

int Env::get(Var v) const {
  const int e = vals_[static_cast<int>(v)];
  if (e < 0) throw EvalError(std::string("unbound variable ") + var_name(v));
  return e;
}

bool atom_value(const World& w, const Completion& c, const GroundAtom& a) {
  switch (w.state(a)) {
    case AtomState::True: return true;
    case AtomState::False: return false;
    case AtomState::Unknown: {
      const int k = w.unknown_index(a);
      if (k >= c.size()) throw EvalError("completion does not cover " + atom_name(a));
      return c.value(k);
    }
  }
  return false;
}

namespace {

template <class AbFn>
bool eval(const World& w, const Completion& c, const Env& env, const Formula& f, const AbFn& ab) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::Atom: {
      const auto args = f.args();
      if (f.pred() == Pred::Ab) return ab(env.get(args[0]));
      const int i = env.get(args[0]);
      const int j = args.size() > 1 ? env.get(args[1]) : 0;
      return atom_value(w, c, {f.pred(), i, j});
    }
    case K::Equal: return env.get(f.args()[0]) == env.get(f.args()[1]);
    case K::Not: return !eval(w, c, env, f.child(), ab);
    case K::And:
      for (const Formula& g : f.children())
        if (!eval(w, c, env, g, ab)) return false;
      return true;
    case K::Or:
      for (const Formula& g : f.children())
        if (eval(w, c, env, g, ab)) return true;
      return false;
    case K::Implies: return !eval(w, c, env, f.child(0), ab) || eval(w, c, env, f.child(1), ab);
    case K::Forall:
      for (int a = 0; a < w.domain_size(); ++a)
        if (!eval(w, c, env.bind(f.bound_var(), a), f.child(), ab)) return false;
      return true;
    case K::Exists:
      for (int a = 0; a < w.domain_size(); ++a)
        if (eval(w, c, env.bind(f.bound_var(), a), f.child(), ab)) return true;
      return false;
  }
  return false;
}

}  // namespace

bool eval_formula(const World& w, const Completion& c, const Env& env, const Formula& f,
                  const Hypothesis* ab_rule) {
  auto ab = [&](int a) -> bool {
    if (!ab_rule) throw EvalError("Ab occurs but no abnormality rule was supplied");
    return eval_formula(w, c, Env().bind(Var::X, a), ab_rule->formula(), nullptr);
  };
  return eval(w, c, env, f, ab);
}

bool eval_formula(const World& w, const Completion& c, const Env& env, const Formula& f,
                  const AbnormalSet& ab) {
  if (ab.domain_size() != w.domain_size()) throw EvalError("abnormal set / world size mismatch");
  return eval(w, c, env, f, [&](int a) { return ab.contains(a); });
}

CompletionRange enumerate_completions(const World& w, int cap) {
  if (w.num_unknown() > cap || w.num_unknown() > 62) {
    throw EnumerationCapError("world has " + std::to_string(w.num_unknown()) +
                              " unknown atoms, above the enumeration cap of " + std::to_string(cap));
  }
  return CompletionRange(w.num_unknown());
}

// ---------------------------------------------------------------------------
// Sampling

DensityRanges DensityRanges::for_regime(Regime r) {
  DensityRanges d;
  if (r == Regime::Skeptical) {
    d.rho = {Interval{0.40, 0.60}, Interval{0.20, 0.50}, Interval{0.15, 0.30}, Interval{0.10, 0.25}};
  } else {
    d.rho = {Interval{0.20, 0.60}, Interval{0.20, 0.60}, Interval{0.12, 0.25}, Interval{0.08, 0.18}};
  }
  return d;
}

void DensityRanges::validate() const {
  for (const Interval& iv : rho)
    if (!(0.0 <= iv.lo && iv.lo <= iv.hi && iv.hi <= 1.0))
      throw WorldError("density interval must satisfy 0 <= lo <= hi <= 1");
}

int true_atom_count(int n, int k, double rho) {
  const double cells = k == 1 ? n : double(n) * n;
  return std::max(1, static_cast<int>(std::floor(cells * rho)));
}

int masked_atom_count(int n, double rate) {
  return static_cast<int>(std::lround(rate * double(n) * n));
}

LatentWorld sample_latent(int n, const DensityRanges& densities, const UnknownRates& rates, Rng& rng) {
  LatentWorld lw;
  lw.n = n;
  for (Pred p : {Pred::P, Pred::Q, Pred::R, Pred::S}) {
    const int s = static_cast<int>(p);
    const int cells = arity(p) == 1 ? n : n * n;
    lw.value[s].assign(cells, 0);
    lw.masked[s].assign(cells, 0);
    const Interval iv = densities.rho[s];
    const double rho = rng.uniform_real(iv.lo, iv.hi);
    const int count = std::min(cells, true_atom_count(n, arity(p), rho));
    for (int k : rng.sample_without_replacement(cells, count)) lw.value[s][k] = 1;
  }
  // Only binary predicates are masked.
  for (Pred p : {Pred::R, Pred::S}) {
    const int s = static_cast<int>(p);
    const double rate = rates.rate[s];
    if (!(rate >= 0.0 && rate <= 1.0)) throw WorldError("unknown rate must lie in [0, 1]");
    const int count = std::min(n * n, masked_atom_count(n, rate));
    for (int k : rng.sample_without_replacement(n * n, count)) lw.masked[s][k] = 1;
  }
  return lw;
}

World LatentWorld::to_world() const {
  World w(n);
  for (Pred p : {Pred::P, Pred::Q, Pred::R, Pred::S}) {
    const int s = static_cast<int>(p);
    for (std::size_t k = 0; k < value[s].size(); ++k) {
      const int i = arity(p) == 1 ? int(k) : int(k) / n;
      const int j = arity(p) == 1 ? 0 : int(k) % n;
      if (masked[s][k]) w.set({p, i, j}, AtomState::Unknown);
      else if (value[s][k]) w.set({p, i, j}, AtomState::True);
    }
  }
  return w;
}

World sample_world(IntRange n_range, const DensityRanges& densities, const UnknownRates& rates,
                   Rng& rng) {
  if (n_range.empty()) throw WorldError("empty domain-size range");
  densities.validate();
  const int n = static_cast<int>(rng.uniform_int(n_range.lo, n_range.hi));
  return sample_latent(n, densities, rates, rng).to_world();
}

}  // namespace abd
