// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "caporch/capability.hpp"
#include "caporch/image.hpp"

namespace caporch {

struct AnswerMode {
    enum class Kind { MultipleChoice, ExactText, Numeric, ActionSequence };
    Kind kind = Kind::ExactText;
    double tolerance = 0.0;  // Numeric only

    // "multiple_choice", "exact_text", "numeric", "action_sequence"
    std::string name() const;
    bool operator==(const AnswerMode&) const = default;
};

// One benchmark instance: instruction Q_T, input images I_input and gold answer.
struct TaskInstance {
    std::string id;
    std::string instruction;
    std::vector<ImageRef> images;
    std::string gold;
    AnswerMode answer_mode;
    std::string family;
    std::set<Capability> capability_labels;
};

nlohmann::json capability_set_to_json(const std::set<Capability>& caps);

}  // namespace caporch
