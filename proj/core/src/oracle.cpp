#include "abd/oracle.hpp"

#include <algorithm>
#include <bit>
#include <vector>

namespace abd::oracle {

bool within_limits(const World& w, Limits limits) {
  return w.num_unknown() <= limits.max_unknown && w.domain_size() <= limits.max_domain;
}

namespace {

std::vector<Completion> all_completions(const World& w, Limits limits) {
  if (!within_limits(w, limits))
    throw EnumerationCapError("world exceeds the oracle limits");
  std::vector<Completion> out;
  for (Completion c : enumerate_completions(w, limits.max_unknown)) out.push_back(std::move(c));
  return out;
}

bool axiom_holds(const TheorySpec& th, const World& w, const Completion& c, const Hypothesis& alpha) {
  return eval_formula(w, c, Env(), th.axiom, &alpha);
}

bool axiom_holds(const TheorySpec& th, const World& w, const Completion& c, const AbnormalSet& ab) {
  return eval_formula(w, c, Env(), th.axiom, ab);
}

int abnormal_count(const World& w, const Completion& c, const Hypothesis& alpha) {
  int k = 0;
  for (int a = 0; a < w.domain_size(); ++a)
    if (eval_formula(w, c, Env().bind(Var::X, a), alpha.formula())) ++k;
  return k;
}

// Subsets of the domain in ascending size, then ascending mask.
std::vector<std::uint64_t> subsets_by_size(int n) {
  std::vector<std::uint64_t> masks(std::size_t(1) << n);
  for (std::size_t m = 0; m < masks.size(); ++m) masks[m] = m;
  std::stable_sort(masks.begin(), masks.end(),
                   [](std::uint64_t a, std::uint64_t b) { return std::popcount(a) < std::popcount(b); });
  return masks;
}

int min_ab(const TheorySpec& th, const World& w, const Completion& c) {
  for (std::uint64_t m : subsets_by_size(w.domain_size()))
    if (axiom_holds(th, w, c, AbnormalSet(w.domain_size(), m))) return std::popcount(m);
  throw ContractError("no abnormal set satisfies the axiom");
}

}  // namespace

bool valid(Regime regime, const TheorySpec& theory, const World& w, const Hypothesis& alpha,
           Limits limits) {
  const auto cs = all_completions(w, limits);
  if (regime == Regime::Full) {
    if (w.num_unknown() > 0) throw ContractError("Full regime requires a world without unknown atoms");
    return axiom_holds(theory, w, cs.front(), alpha);
  }
  bool any = false, all = true;
  for (const Completion& c : cs) {
    const bool ok = axiom_holds(theory, w, c, alpha);
    any = any || ok;
    all = all && ok;
  }
  return regime == Regime::Partial ? any : all;
}

std::optional<int> cost(Regime regime, const TheorySpec& theory, const World& w,
                        const Hypothesis& alpha, Limits limits) {
  if (!valid(regime, theory, w, alpha, limits)) return std::nullopt;
  const auto cs = all_completions(w, limits);
  std::optional<int> best;
  for (const Completion& c : cs) {
    if (regime == Regime::Partial && !axiom_holds(theory, w, c, alpha)) continue;
    const int k = abnormal_count(w, c, alpha);
    if (!best) best = k;
    else best = regime == Regime::Skeptical ? std::max(*best, k) : std::min(*best, k);
  }
  return best;
}

int opt_cost(Regime regime, const TheorySpec& theory, const World& w, OptVariant variant,
             Limits limits) {
  const auto cs = all_completions(w, limits);
  switch (regime) {
    case Regime::Full:
      if (w.num_unknown() > 0) throw ContractError("Full regime requires a world without unknown atoms");
      return min_ab(theory, w, cs.front());
    case Regime::Partial: {
      int best = w.domain_size() + 1;
      for (const Completion& c : cs) best = std::min(best, min_ab(theory, w, c));
      return best;
    }
    case Regime::Skeptical:
      if (variant == OptVariant::Pointwise) {
        int worst = 0;
        for (const Completion& c : cs) worst = std::max(worst, min_ab(theory, w, c));
        return worst;
      }
      for (std::uint64_t m : subsets_by_size(w.domain_size())) {
        const AbnormalSet ab(w.domain_size(), m);
        if (std::all_of(cs.begin(), cs.end(),
                        [&](const Completion& c) { return axiom_holds(theory, w, c, ab); }))
          return std::popcount(m);
      }
      throw ContractError("no abnormal set satisfies the axiom");
  }
  return 0;
}

}  // namespace abd::oracle
