// Naive reference semantics: full completion sweeps, full subset search for
// free Ab, and evaluation of the whole axiom with the reference evaluator.
// Exponential in both |Omega| and n; meant for cross-checking the engine.

#pragma once

#include <optional>

#include "abd/engine.hpp"

namespace abd::oracle {

struct Limits {
  int max_unknown = 16;
  int max_domain = 12;
};

// EnumerationCapError when the world exceeds `limits`.
bool valid(Regime regime, const TheorySpec& theory, const World& w, const Hypothesis& alpha,
           Limits limits = {});
std::optional<int> cost(Regime regime, const TheorySpec& theory, const World& w,
                        const Hypothesis& alpha, Limits limits = {});
int opt_cost(Regime regime, const TheorySpec& theory, const World& w,
             OptVariant variant = OptVariant::Pointwise, Limits limits = {});

bool within_limits(const World& w, Limits limits = {});

}  // namespace abd::oracle
