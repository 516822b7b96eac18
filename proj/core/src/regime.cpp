#include "abd/regime.hpp"

namespace abd {

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::Full: return "full";
    case Regime::Partial: return "partial";
    case Regime::Skeptical: return "skeptical";
  }
  return "?";
}

std::optional<Regime> regime_from_name(std::string_view s) {
  if (s == "full") return Regime::Full;
  if (s == "partial") return Regime::Partial;
  if (s == "skeptical") return Regime::Skeptical;
  return std::nullopt;
}

}  // namespace abd
