#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace abd {

// Observation regime: closed world, existential completion, universal completion.
enum class Regime { Full, Partial, Skeptical };

const char* regime_name(Regime r);  // "full" | "partial" | "skeptical"
std::optional<Regime> regime_from_name(std::string_view s);

}  // namespace abd
