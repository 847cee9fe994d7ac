// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "caporch/capability.hpp"
#include "caporch/image.hpp"
#include "caporch/protocol.hpp"
#include "caporch/registry.hpp"

namespace caporch {

enum class Termination { Answered, TurnLimit, ProviderError, Aborted };
std::string_view to_string(Termination t);
std::optional<Termination> termination_from_string(std::string_view s);

struct TurnRecord {
    int index = 1;
    std::string raw;
    std::vector<Segment> segments;
    std::string context_digest;  // digest of the messages sent for this turn
    std::optional<Capability> capability;
    std::optional<ToolInvocation> invocation;
    std::string backend;  // of the invoked tool, when known
    bool executed = false;
    // Set when the turn produced a protocol error instead of an execution.
    std::string error_kind;
    std::string error_message;
    // "observation", "protocol_error" or empty (terminal turn / provider failure).
    std::string observation_kind;
    std::string observation_text;
    std::vector<std::string> observation_images;
    std::string observation_digest;
    std::vector<std::string> notes;
    double elapsed_ms = 0;
};

// SHA-256 over kind, text and image ids.
std::string observation_digest(std::string_view kind, std::string_view text,
                               const std::vector<std::string>& image_ids);

struct TraceRecord {
    std::string task_id;
    std::string instruction;
    std::vector<ImageRef> images;
    nlohmann::json config;  // RunConfig snapshot
    std::string provider;
    std::size_t max_context_tokens = 0;
    std::size_t budget_tokens = 0;
    std::string system_prompt_digest;
    std::vector<TurnRecord> turns;
    Termination termination = Termination::TurnLimit;
    std::optional<std::string> answer;
    std::vector<Capability> capability_history;
    std::vector<std::string> evicted_ids;
    std::string failure;  // ProviderError / Aborted detail
    // Wall-clock fields.
    std::string started_at;
    double elapsed_ms = 0;

    // Without timing the serialization is a deterministic function of the session.
    nlohmann::json to_json(bool include_timing = true) const;
    static TraceRecord from_json(const nlohmann::json& doc);

    void save(const std::filesystem::path& path) const;
    static TraceRecord load(const std::filesystem::path& path);
};

// Trimmed inner text of the first Answer segment of the terminal turn.
std::optional<std::string> extract_final_answer(const TraceRecord& trace);

}  // namespace caporch
