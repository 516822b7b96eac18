// Model-facing prompt rendering for an instance.

#pragma once

#include <string>

#include "abd/generator.hpp"

namespace abd {

struct PromptBundle {
  std::string system_prompt;
  std::string user_prompt;
};

const std::string& system_prompt();
PromptBundle render_prompt(const InstanceRecord& inst);

// "{a0, a3}" / "{(a1, a2), (a4, a0)}" in index order.
std::string format_atom_set(const std::vector<GroundAtom>& atoms);

}  // namespace abd
