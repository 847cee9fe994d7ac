// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <functional>
#include <optional>
#include <string>

#include "caporch/capability.hpp"
#include "caporch/image.hpp"
#include "caporch/model_provider.hpp"
#include "caporch/registry.hpp"
#include "caporch/run_config.hpp"
#include "caporch/session_state.hpp"
#include "caporch/task.hpp"
#include "caporch/tool_executor.hpp"
#include "caporch/trace.hpp"

namespace caporch {

struct SessionResult {
    std::optional<std::string> answer;
    int turns_used = 0;
    Termination termination = Termination::TurnLimit;
    TraceRecord trace;
};

// Everything a session needs besides the task, model, registry and config.
struct SessionEnv {
    ImageStore* store = nullptr;          // required
    const ToolExecutor* executor = nullptr;  // null: built-in local tools only
    const AliasTable* aliases = nullptr;     // null: the default alias table
    const std::atomic<bool>* cancel = nullptr;
    std::function<void(const TurnRecord&)> on_turn;
};

// System prompt for a run mode: capability sections (minus disabled ones) or a flat list.
std::string system_prompt_for(const Registry& registry, const RunMode& mode);

// Resolves "input:N" (0-based task image) and "latest" aliases; other entries
// must be ids present in the store. Returns the first reference that does not
// resolve, or nullopt when all do.
std::optional<std::string> resolve_image_refs(std::vector<std::string>& refs, const TaskInstance& task,
                                              const SessionState& state, const ImageStore& store);

// The reasoning loop: at most config.max_turn completions, one tool call per turn.
// Protocol violations and tool failures become protocol-error observations.
SessionResult run_session(const TaskInstance& task, ModelProvider& provider, const Registry& registry,
                          const RunConfig& config, const SessionEnv& env);

}  // namespace caporch
