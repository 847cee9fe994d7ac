// SPDX-License-Identifier: Apache-2.0
#include "caporch/orchestrator.hpp"

#include <chrono>
#include <variant>
#include <thread>

#include <spdlog/spdlog.h>

#include "caporch/protocol.hpp"
#include "caporch/util.hpp"

namespace caporch {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// A violation found while turning a model turn into a tool execution.
struct Violation {
    std::string kind;
    std::string detail;
};

const char* kHint =
    "hint: declare one capability in <cap>...</cap> and one JSON tool call in "
    "<tool_call>...</tool_call>, or finish with <answer>...</answer>";
const char* kFlatHint =
    "hint: give one JSON tool call in <tool_call>...</tool_call>, or finish with <answer>...</answer>";

std::string protocol_error_text(const Violation& v, bool flat) {
    return "error: " + v.kind + "\ndetail: " + v.detail + "\n" + (flat ? kFlatHint : kHint);
}

// {"name": str, "arguments": object, "images": [str]}
std::variant<ToolInvocation, Violation> parse_tool_call(const std::string& payload) {
    json doc;
    try {
        doc = json::parse(payload);
    } catch (const json::parse_error& e) {
        return Violation{"MalformedToolCall", std::string("tool_call is not valid JSON: ") + e.what()};
    }
    if (!doc.is_object()) return Violation{"MalformedToolCall", "tool_call must be a JSON object"};
    if (!doc.contains("name") || !doc["name"].is_string()) {
        return Violation{"MalformedToolCall", "tool_call needs a string \"name\""};
    }
    ToolInvocation inv;
    inv.tool = doc["name"].get<std::string>();
    if (doc.contains("arguments")) {
        if (!doc["arguments"].is_object()) return Violation{"MalformedToolCall", "\"arguments\" must be an object"};
        inv.arguments = doc["arguments"];
    }
    if (doc.contains("images")) {
        const auto& imgs = doc["images"];
        if (!imgs.is_array()) return Violation{"MalformedToolCall", "\"images\" must be an array of strings"};
        for (const auto& v : imgs) {
            if (!v.is_string()) return Violation{"MalformedToolCall", "\"images\" must be an array of strings"};
            inv.image_refs.push_back(v.get<std::string>());
        }
    }
    return inv;
}

std::string complete_with_retries(ModelProvider& provider, const ProviderMessages& msgs, const RunConfig& config,
                                  const DecodingParams& decoding) {
    for (int attempt = 0;; ++attempt) {
        try {
            return provider.complete(msgs, decoding);
        } catch (const ProviderError& e) {
            if (e.kind() != ProviderErrorKind::Transport || attempt >= config.provider_retries) throw;
            const int wait = config.retry_backoff_ms * (1 << attempt);
            spdlog::warn("provider transport error (attempt {}): {}; retrying in {} ms", attempt + 1, e.what(), wait);
            if (wait > 0) std::this_thread::sleep_for(std::chrono::milliseconds(wait));
        }
    }
}

}  // namespace

std::string system_prompt_for(const Registry& registry, const RunMode& mode) {
    if (mode.kind == RunMode::Kind::FlatSelection) {
        const auto tools = registry.flat_toolset();
        return render_flat_system_prompt(tools, flat_protocol_doc());
    }
    std::vector<CapabilitySpec> caps;
    for (const auto& spec : capability_specs()) {
        if (!mode.disabled.contains(spec.id)) caps.push_back(spec);
    }
    const auto tools = registry.enabled_tools(mode.disabled);
    return render_system_prompt(caps, tools, default_protocol_doc());
}

std::optional<std::string> resolve_image_refs(std::vector<std::string>& refs, const TaskInstance& task,
                                              const SessionState& state, const ImageStore& store) {
    for (auto& ref : refs) {
        const std::string r = trim(ref);
        if (r == "latest") {
            const std::string id = state.latest_image();
            if (id.empty()) return ref;
            ref = id;
        } else if (r.starts_with("input:")) {
            const std::string n = r.substr(6);
            std::size_t idx = 0;
            try {
                std::size_t used = 0;
                idx = std::stoul(n, &used);
                if (used != n.size()) return ref;
            } catch (const std::exception&) {
                return ref;
            }
            if (idx >= task.images.size()) return ref;
            ref = task.images[idx].id;
        } else if (store.contains(r)) {
            ref = r;
        } else {
            return ref;
        }
    }
    return std::nullopt;
}

SessionResult run_session(const TaskInstance& task, ModelProvider& provider, const Registry& registry,
                          const RunConfig& config, const SessionEnv& env) {
    config.validate();
    if (env.store == nullptr) throw std::invalid_argument("run_session needs an image store");
    ImageStore& store = *env.store;
    const ToolExecutor default_executor;
    const ToolExecutor& executor = env.executor ? *env.executor : default_executor;
    static const AliasTable default_aliases = AliasTable::load_default();
    const AliasTable& aliases = env.aliases ? *env.aliases : default_aliases;

    const bool flat = config.mode.kind == RunMode::Kind::FlatSelection;
    const ProviderInfo info = provider.info();
    const DecodingParams decoding{config.temperature, config.top_p, config.max_output};
    const auto session_start = Clock::now();

    SessionResult result;
    TraceRecord& trace = result.trace;
    trace.task_id = task.id;
    trace.instruction = task.instruction;
    trace.images = task.images;
    trace.config = config.to_json();
    trace.provider = info.name;
    trace.max_context_tokens = info.max_context_tokens;
    trace.budget_tokens = context_budget(info, config.budget_fraction);
    trace.started_at = utc_timestamp();

    SessionState state;
    auto finish = [&](Termination t) -> SessionResult {
        trace.capability_history = state.capability_history;
        trace.evicted_ids = state.evicted_ids;
        trace.termination = t;
        trace.elapsed_ms = ms_since(session_start);
        result.termination = t;
        result.answer = trace.answer;
        result.turns_used = static_cast<int>(trace.turns.size());
        return std::move(result);
    };

    std::string system_prompt;
    try {
        system_prompt = system_prompt_for(registry, config.mode);
        state = init_state(task, trace.budget_tokens);
    } catch (const std::exception& e) {
        trace.failure = e.what();
        return finish(Termination::Aborted);
    }
    trace.system_prompt_digest = sha256_hex(system_prompt);

    ValidationOptions vopts;
    vopts.enforce_capability = !flat;
    vopts.disabled = config.mode.disabled;

    for (int i = 1; i <= config.max_turn; ++i) {
        if (env.cancel && env.cancel->load()) {
            trace.failure = "cancelled";
            return finish(Termination::Aborted);
        }
        const auto turn_start = Clock::now();
        const ProviderMessages msgs = serialize_context(state, system_prompt);
        std::string raw;
        try {
            // Traces and context digests are JSON, so model output must be valid UTF-8.
            raw = sanitize_utf8(complete_with_retries(provider, msgs, config, decoding));
        } catch (const std::exception& e) {
            trace.failure = e.what();
            spdlog::warn("task {}: provider failed at turn {}: {}", task.id, i, e.what());
            return finish(Termination::ProviderError);
        }

        ReasoningTurn turn = parse_turn(std::move(raw), i);
        TurnRecord rec;
        rec.index = i;
        rec.raw = turn.raw;
        rec.segments = turn.segments;
        rec.context_digest = msgs.digest();

        try {
            append_model_turn(state, turn);
        } catch (const StateError& e) {
            trace.failure = e.what();
            trace.turns.push_back(std::move(rec));
            return finish(Termination::Aborted);
        }

        if (turn.terminal) {
            trace.answer = trim(turn.first(SegmentKind::Answer)->text);
            if (turn.first(SegmentKind::ToolCall)) rec.notes.push_back("tool_call ignored: the turn carries an answer");
            rec.elapsed_ms = ms_since(turn_start);
            if (env.on_turn) env.on_turn(rec);
            trace.turns.push_back(std::move(rec));
            return finish(Termination::Answered);
        }

        // Stage 1: capability. Stage 2: tool call bound to it.
        std::optional<Violation> violation;
        std::optional<Capability> declared;
        const Segment* cap_seg = turn.first(SegmentKind::Cap);
        const Segment* call_seg = turn.first(SegmentKind::ToolCall);
        if (flat) {
            if (cap_seg) rec.notes.push_back("cap ignored: capability stage disabled");
        } else if (!cap_seg) {
            violation = Violation{"MissingCapability", "the turn has no <cap> segment"};
        } else {
            try {
                declared = canonicalize_capability(trim(cap_seg->text), aliases);
                rec.capability = declared;
            } catch (const CapabilityError& e) {
                violation = Violation{"UnknownCapability", e.what()};
            }
        }
        if (!violation && !call_seg) {
            violation = Violation{"MissingToolCall", "the turn has no <tool_call> segment"};
        }
        if (call_seg) {
            if (const auto extra = turn.count_shadowed(SegmentKind::ToolCall); extra > 0) {
                rec.notes.push_back("ignored " + std::to_string(extra) + " extra tool_call segment(s)");
            }
        }

        std::optional<ToolInvocation> inv;
        if (!violation) {
            auto parsed = parse_tool_call(trim(call_seg->text));
            if (auto* v = std::get_if<Violation>(&parsed)) {
                violation = *v;
            } else {
                inv = std::get<ToolInvocation>(std::move(parsed));
                inv->declared_capability = declared;
                if (auto bad = resolve_image_refs(inv->image_refs, task, state, store)) {
                    violation = Violation{"UnresolvedImage", "image reference '" + *bad + "' does not resolve"};
                }
                rec.invocation = inv;
            }
        }

        const ToolSpec* spec = inv ? registry.find(inv->tool) : nullptr;
        if (spec) rec.backend = spec->backend.to_string();
        if (!violation) {
            const auto verdict = registry.validate_binding(*inv, vopts);
            if (!verdict.ok()) {
                const auto& r = *verdict.rejection();
                violation = Violation{std::string(to_string(r.kind)), r.message()};
            }
        }

        Observation obs;
        obs.turn = i;
        if (!violation) {
            if (flat) rec.capability = spec->capability;
            state.capability_history.push_back(spec->capability);
            try {
                ToolOutput out = executor.execute(*inv, registry, store);
                rec.executed = true;
                obs.kind = EvidenceKind::Observation;
                obs.tool = inv->tool;
                obs.text = std::move(out.text);
                obs.image_ids = std::move(out.image_ids);
            } catch (const ToolExecutionFailed& e) {
                rec.executed = true;
                violation = Violation{"ToolExecutionFailed", e.detail()};
            }
        }
        if (violation) {
            rec.error_kind = violation->kind;
            rec.error_message = violation->detail;
            obs.kind = EvidenceKind::ProtocolError;
            obs.tool = inv ? inv->tool : "";
            obs.text = protocol_error_text(*violation, flat);
            obs.image_ids.clear();
        }

        try {
            obs = fit_to_budget(state, std::move(obs));
            append_observation(state, obs);
        } catch (const StateError& e) {
            trace.failure = e.what();
            trace.turns.push_back(std::move(rec));
            return finish(Termination::Aborted);
        }
        rec.observation_kind = obs.kind == EvidenceKind::Observation ? "observation" : "protocol_error";
        rec.observation_text = obs.text;
        rec.observation_images = obs.image_ids;
        rec.observation_digest = observation_digest(rec.observation_kind, obs.text, obs.image_ids);
        rec.elapsed_ms = ms_since(turn_start);
        if (env.on_turn) env.on_turn(rec);
        trace.turns.push_back(std::move(rec));
    }

    return finish(Termination::TurnLimit);
}

}  // namespace caporch
