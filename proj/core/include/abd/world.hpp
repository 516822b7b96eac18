// Finite relational worlds over P, Q (unary) and R, S (binary), with an
// optional set of unobserved ground atoms, plus a reference evaluator and the
// density-controlled sampler.

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <iterator>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "abd/formula.hpp"
#include "abd/hypothesis.hpp"
#include "abd/regime.hpp"
#include "abd/rng.hpp"

namespace abd {

inline constexpr int kMaxDomainSize = 64;

struct GroundAtom {
  Pred pred;
  int i;
  int j = 0;  // unused for unary predicates
  auto operator<=>(const GroundAtom&) const = default;
};

std::string atom_name(const GroundAtom& a);  // "R(a1,a3)"

enum class AtomState : std::uint8_t { False, True, Unknown };

class WorldError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class World {
 public:
  // All atoms false, nothing unknown.
  explicit World(int domain_size);

  int domain_size() const { return n_; }
  AtomState state(Pred p, int i, int j = 0) const { return states_[slot(p)][offset(p, i, j)]; }
  AtomState state(const GroundAtom& a) const { return state(a.pred, a.i, a.j); }

  // Sorted by (i, j).
  std::vector<GroundAtom> true_atoms(Pred p) const;
  std::vector<GroundAtom> unknown_atoms(Pred p) const;
  // Omega in canonical order: predicate P, Q, R, S, then row-major i*n + j.
  const std::vector<GroundAtom>& unknown_atoms() const { return unknown_; }
  int num_unknown() const { return static_cast<int>(unknown_.size()); }
  // Position of a in unknown_atoms(), or -1.
  int unknown_index(const GroundAtom& a) const;

  // Mutators keep both atom sets disjoint: set_true clears unknown and vice versa.
  void set(const GroundAtom& a, AtomState s);
  void set_true(Pred p, int i, int j = 0) { set({p, i, j}, AtomState::True); }
  void set_unknown(Pred p, int i, int j = 0) { set({p, i, j}, AtomState::Unknown); }

  bool operator==(const World& o) const { return n_ == o.n_ && states_ == o.states_; }

 private:
  static int slot(Pred p) {
    if (p == Pred::Ab) throw WorldError("Ab has no stored extension");
    return static_cast<int>(p);
  }
  int offset(Pred p, int i, int j) const { return arity(p) == 1 ? i : i * n_ + j; }
  void check(const GroundAtom& a) const;
  void reindex();

  int n_;
  std::array<std::vector<AtomState>, kNumObservedPreds> states_;
  std::vector<GroundAtom> unknown_;
  std::array<std::vector<std::int32_t>, kNumObservedPreds> unknown_pos_;
};

bool worlds_equivalent(const World& a, const World& b);

// Truth values for Omega, aligned with World::unknown_atoms().
class Completion {
 public:
  Completion() = default;
  explicit Completion(std::vector<std::uint8_t> values) : values_(std::move(values)) {}
  // Bits of `pattern` give the values, bit k for atom k (|Omega| <= 64).
  static Completion from_bits(int num_atoms, std::uint64_t pattern);

  int size() const { return static_cast<int>(values_.size()); }
  bool value(int k) const { return values_.at(k) != 0; }
  const std::vector<std::uint8_t>& values() const { return values_; }
  bool operator==(const Completion&) const = default;

 private:
  std::vector<std::uint8_t> values_;
};

// Membership over a0..a(n-1), as a bit mask.
class AbnormalSet {
 public:
  AbnormalSet() = default;
  AbnormalSet(int domain_size, std::uint64_t mask);
  int domain_size() const { return n_; }
  bool contains(int a) const { return (mask_ >> a) & 1u; }
  std::uint64_t mask() const { return mask_; }
  int size() const;

 private:
  int n_ = 0;
  std::uint64_t mask_ = 0;
};

// Variable -> element binding; unset variables are -1.
class Env {
 public:
  Env() { vals_.fill(-1); }
  Env bind(Var v, int element) const {
    Env e = *this;
    e.vals_[static_cast<int>(v)] = element;
    return e;
  }
  int get(Var v) const;
  bool bound(Var v) const { return vals_[static_cast<int>(v)] >= 0; }

 private:
  std::array<int, kNumVars> vals_;
};

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Truth of an atom: true set, then completion value if unknown, else false.
bool atom_value(const World& w, const Completion& c, const GroundAtom& a);

// Reference evaluator. Ab(t) is alpha instantiated at t when ab_rule is given;
// EvalError if Ab occurs without one or a free variable is unbound.
bool eval_formula(const World& w, const Completion& c, const Env& env, const Formula& f,
                  const Hypothesis* ab_rule = nullptr);
// Same, with Ab read from an explicit set.
bool eval_formula(const World& w, const Completion& c, const Env& env, const Formula& f,
                  const AbnormalSet& ab);

class EnumerationCapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kDefaultEnumerationCap = 24;

// All 2^|Omega| completions, index k read as a bit pattern over Omega.
class CompletionRange {
 public:
  class iterator {
   public:
    using value_type = Completion;
    using difference_type = std::ptrdiff_t;
    using iterator_category = std::input_iterator_tag;
    iterator() = default;
    iterator(int m, std::uint64_t k) : m_(m), k_(k) {}
    Completion operator*() const { return Completion::from_bits(m_, k_); }
    iterator& operator++() {
      ++k_;
      return *this;
    }
    iterator operator++(int) {
      iterator t = *this;
      ++k_;
      return t;
    }
    bool operator==(const iterator& o) const { return k_ == o.k_; }

   private:
    int m_ = 0;
    std::uint64_t k_ = 0;
  };

  explicit CompletionRange(int num_atoms) : m_(num_atoms) {}
  iterator begin() const { return {m_, 0}; }
  iterator end() const { return {m_, std::uint64_t(1) << m_}; }
  std::uint64_t size() const { return std::uint64_t(1) << m_; }

 private:
  int m_;
};

CompletionRange enumerate_completions(const World& w, int cap = kDefaultEnumerationCap);

// ---------------------------------------------------------------------------
// Sampling

struct Interval {
  double lo = 0;
  double hi = 0;
};

struct IntRange {
  int lo = 0;
  int hi = -1;
  bool empty() const { return hi < lo; }
};

struct DensityRanges {
  std::array<Interval, kNumObservedPreds> rho;  // indexed by Pred

  static DensityRanges for_regime(Regime r);
  void validate() const;
};

struct UnknownRates {
  std::array<double, kNumObservedPreds> rate{};  // indexed by Pred
};

// A world before masking: every atom has a definite value.
struct LatentWorld {
  int n = 0;
  std::array<std::vector<std::uint8_t>, kNumObservedPreds> value;
  std::array<std::vector<std::uint8_t>, kNumObservedPreds> masked;
  World to_world() const;
};

// Number of true atoms the sampler places for density rho: max(1, floor(n^k rho)).
int true_atom_count(int n, int arity, double rho);
// Number of masked atoms for a binary predicate: round(rate * n^2).
int masked_atom_count(int n, double rate);

LatentWorld sample_latent(int n, const DensityRanges& densities, const UnknownRates& rates, Rng& rng);
World sample_world(IntRange n_range, const DensityRanges& densities, const UnknownRates& rates,
                   Rng& rng);

}  // namespace abd
