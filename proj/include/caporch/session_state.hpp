// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "caporch/capability.hpp"
#include "caporch/error.hpp"
#include "caporch/messages.hpp"
#include "caporch/protocol.hpp"
#include "caporch/task.hpp"

namespace caporch {

enum class EvidenceKind { TaskText, InputImage, ModelTurn, Observation, ProtocolError };
std::string_view to_string(EvidenceKind k);

struct EvidenceItem {
    std::string id;
    EvidenceKind kind = EvidenceKind::Observation;
    std::string text;  // rendered message text
    std::vector<std::string> image_ids;
    bool pinned = false;
    std::size_t approx_tokens = 0;
    int turn_of_origin = 0;
};

// Result of a tool execution, or a synthesized protocol-error notice.
struct Observation {
    EvidenceKind kind = EvidenceKind::Observation;  // Observation or ProtocolError
    int turn = 1;
    std::string tool;
    std::string text;
    std::vector<std::string> image_ids;
};

// Multimodal evidence E_i plus the histories C_<i and R_<i under a token budget.
struct SessionState {
    std::vector<EvidenceItem> evidence;
    std::vector<Capability> capability_history;
    std::vector<ReasoningTurn> turn_history;
    std::size_t budget_tokens = 0;
    std::size_t used_tokens = 0;
    std::vector<std::string> evicted_ids;
    int next_seq = 1;

    std::size_t pinned_tokens() const;
    // Most recent image id in evidence order, if any.
    std::string latest_image() const;
};

enum class StateErrorKind { BudgetTooSmall, ObservationTooLarge, InvalidTask };
std::string_view to_string(StateErrorKind k);
using StateError = KindedError<StateErrorKind>;

inline constexpr std::size_t kImageTokenOverhead = 8;

// ceil(bytes / 4) + 8 per image reference.
std::size_t estimate_tokens(std::string_view text, std::size_t image_count);

// Evidence = [TaskText, InputImage...], all pinned. Throws BudgetTooSmall.
SessionState init_state(const TaskInstance& task, std::size_t budget_tokens);

// Appends `obs` unpinned, evicting older items to stay within budget.
// Throws ObservationTooLarge when obs alone exceeds budget minus pinned size.
void append_observation(SessionState& state, const Observation& obs);

// Records R_i in the turn history and as a ModelTurn evidence item. Text that
// cannot fit the budget is stored truncated.
void append_model_turn(SessionState& state, const ReasoningTurn& turn);

// Shrinks `obs` so that it fits the budget after eviction.
Observation fit_to_budget(const SessionState& state, Observation obs);

// [system prompt, evidence in order..., capability-history line if non-empty].
ProviderMessages serialize_context(const SessionState& state, std::string_view system_prompt);

}  // namespace caporch
