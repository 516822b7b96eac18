#include "abd/prompt.hpp"

#include <sstream>

namespace abd {

namespace {

#include "prompt_text.inc"

std::string quoted_list(const std::vector<std::string>& names) {
  std::string s = "[";
  for (std::size_t k = 0; k < names.size(); ++k) s += (k ? ", \"" : "\"") + names[k] + "\"";
  return s + "]";
}

void render_world(std::ostringstream& os, const World& w, int index, bool partial) {
  os << "### World W" << index << "\nDomain: {";
  for (int a = 0; a < w.domain_size(); ++a) os << (a ? ", a" : "a") << a;
  os << "}\n\n";
  os << (partial ? "**Known Facts** (unlisted atoms that are not Unknown are known FALSE):\n"
                 : "**Predicates** (Closed World Assumption: unlisted atoms are false):\n");
  for (Pred p : {Pred::P, Pred::Q, Pred::R, Pred::S})
    os << "- " << pred_name(p) << ": " << format_atom_set(w.true_atoms(p)) << "\n";
  if (partial) {
    os << "\n**Unknown Atoms** (truth value not observed, can be completed either way):\n";
    bool any = false;
    for (Pred p : {Pred::P, Pred::Q, Pred::R, Pred::S}) {
      const auto u = w.unknown_atoms(p);
      if (u.empty()) continue;
      any = true;
      os << "- " << pred_name(p) << ": " << format_atom_set(u) << "\n";
    }
    if (!any) os << "- (none)\n";
  }
  os << "\n";
}

}  // namespace

const std::string& system_prompt() {
  static const std::string s = kSystem;
  return s;
}

std::string format_atom_set(const std::vector<GroundAtom>& atoms) {
  std::string s = "{";
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    if (k) s += ", ";
    const GroundAtom& g = atoms[k];
    if (arity(g.pred) == 1) s += "a" + std::to_string(g.i);
    else s += "(a" + std::to_string(g.i) + ", a" + std::to_string(g.j) + ")";
  }
  return s + "}";
}

PromptBundle render_prompt(const InstanceRecord& inst) {
  const TheorySpec& th = inst.theory_spec();
  const char* head = kFullHead;
  const char* tail = kFullTail;
  if (inst.scenario == Regime::Partial) head = kPartialHead, tail = kPartialTail;
  if (inst.scenario == Regime::Skeptical) head = kSkepticalHead, tail = kSkepticalTail;

  std::ostringstream os;
  os << head;
  os << "**AllowedAlphaPredicates**: " << quoted_list(pred_names(th.scope.allowed)) << "\n";
  os << "**ForbiddenAlphaPredicates**: " << quoted_list(pred_names(th.scope.forbidden)) << "\n\n";
  os << "**Theory ID**: " << th.internal_id << "\n\n";
  os << "**Axioms**:\n1. `" << render_formula(th.axiom) << "`\n\n";
  os << "## Training Worlds\n\n";
  for (std::size_t k = 0; k < inst.worlds.size(); ++k)
    render_world(os, inst.worlds[k], static_cast<int>(k), inst.scenario != Regime::Full);
  os << tail;
  return {system_prompt(), os.str()};
}

}  // namespace abd
