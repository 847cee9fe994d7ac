// SPDX-License-Identifier: Apache-2.0
#include "caporch/task.hpp"

namespace caporch {

std::string AnswerMode::name() const {
    switch (kind) {
        case Kind::MultipleChoice: return "multiple_choice";
        case Kind::ExactText: return "exact_text";
        case Kind::Numeric: return "numeric";
        case Kind::ActionSequence: return "action_sequence";
    }
    return "exact_text";
}

nlohmann::json capability_set_to_json(const std::set<Capability>& caps) {
    auto out = nlohmann::json::array();
    for (auto c : caps) out.push_back(std::string(short_name(c)));
    return out;
}

}  // namespace caporch
