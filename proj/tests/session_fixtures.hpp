// SPDX-License-Identifier: Apache-2.0
// Scripted sessions with hand-written expected traces, shared by the unit
// tests and the acceptance runner.
#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "caporch/orchestrator.hpp"
#include "caporch/util.hpp"

namespace fixture {

using namespace caporch;

struct ExpectedTurn {
    std::string raw;
    std::optional<Capability> capability;
    std::string tool;  // empty when no invocation was extracted
    bool executed = false;
    std::string error_kind;
    std::string observation_kind;
    std::string observation_text;  // exact, or a prefix when `prefix_only`
    bool prefix_only = false;
    std::vector<std::string> notes;
};

struct ExpectedTrace {
    Termination termination = Termination::Answered;
    std::optional<std::string> answer;
    std::vector<Capability> capability_history;
    std::vector<ExpectedTurn> turns;
};

// Returns an empty string when `trace` matches, otherwise the first difference.
inline std::string diff(const TraceRecord& trace, const ExpectedTrace& want) {
    auto fail = [](int turn, const std::string& field, const std::string& got, const std::string& exp) {
        return "turn " + std::to_string(turn) + " " + field + ": got '" + got + "', expected '" + exp + "'";
    };
    if (trace.termination != want.termination) {
        return fail(0, "termination", std::string(to_string(trace.termination)), std::string(to_string(want.termination)));
    }
    if (trace.answer != want.answer) return fail(0, "answer", trace.answer.value_or("<none>"), want.answer.value_or("<none>"));
    if (trace.capability_history != want.capability_history) return "capability_history differs";
    if (trace.turns.size() != want.turns.size()) {
        return fail(0, "turn count", std::to_string(trace.turns.size()), std::to_string(want.turns.size()));
    }
    std::string prev_context;
    for (std::size_t i = 0; i < want.turns.size(); ++i) {
        const auto& t = trace.turns[i];
        const auto& w = want.turns[i];
        const int n = static_cast<int>(i + 1);
        if (t.index != n) return fail(n, "index", std::to_string(t.index), std::to_string(n));
        if (t.raw != w.raw) return fail(n, "raw", t.raw, w.raw);
        if (t.capability != w.capability) {
            return fail(n, "capability", t.capability ? std::string(short_name(*t.capability)) : "<none>",
                        w.capability ? std::string(short_name(*w.capability)) : "<none>");
        }
        const std::string tool = t.invocation ? t.invocation->tool : "";
        if (tool != w.tool) return fail(n, "tool", tool, w.tool);
        if (t.executed != w.executed) return fail(n, "executed", t.executed ? "true" : "false", w.executed ? "true" : "false");
        if (t.error_kind != w.error_kind) return fail(n, "error_kind", t.error_kind, w.error_kind);
        if (t.observation_kind != w.observation_kind) return fail(n, "observation_kind", t.observation_kind, w.observation_kind);
        const bool text_ok = w.prefix_only ? t.observation_text.starts_with(w.observation_text)
                                           : t.observation_text == w.observation_text;
        if (!text_ok) return fail(n, "observation_text", t.observation_text, w.observation_text);
        if (t.notes != w.notes) return fail(n, "notes", t.notes.empty() ? "" : t.notes[0], w.notes.empty() ? "" : w.notes[0]);
        // Digest layout: kind, text, then each image id followed by a comma.
        if (!t.observation_kind.empty()) {
            std::string buf = t.observation_kind + "\n" + t.observation_text + "\n";
            for (const auto& id : t.observation_images) buf += id + ",";
            if (t.observation_digest != sha256_hex(buf)) return fail(n, "observation_digest", t.observation_digest, sha256_hex(buf));
        } else if (!t.observation_digest.empty()) {
            return fail(n, "observation_digest", t.observation_digest, "");
        }
        if (t.context_digest.size() != 64 || t.context_digest == prev_context) {
            return fail(n, "context_digest", t.context_digest, "a fresh sha256");
        }
        prev_context = t.context_digest;
    }
    return {};
}

// Wraps every built-in local tool with a call counter.
struct CountingExecutor {
    std::shared_ptr<std::map<std::string, int>> calls = std::make_shared<std::map<std::string, int>>();
    ToolExecutor executor;

    CountingExecutor() {
        for (const auto& [name, handler] : builtin_local_handlers()) {
            auto counter = calls;
            executor.set_local(name, [counter, name = name, handler = handler](const nlohmann::json& a,
                                                                             std::span<const std::string> ids,
                                                                             ImageStore& store) {
                ++(*counter)[name];
                return handler(a, ids, store);
            });
        }
    }
    int total() const {
        int n = 0;
        for (const auto& [_, c] : *calls) n += c;
        return n;
    }
};

inline TaskInstance text_task(std::string id, std::string instruction, std::string gold) {
    TaskInstance t;
    t.id = std::move(id);
    t.instruction = std::move(instruction);
    t.gold = std::move(gold);
    t.answer_mode.kind = AnswerMode::Kind::ExactText;
    t.family = "scripted";
    return t;
}

inline ScriptedTranscript script(std::vector<std::string> responses) {
    ScriptedTranscript s;
    for (auto& r : responses) s.entries.push_back({std::nullopt, std::move(r)});
    return s;
}

struct Scenario {
    std::string name;
    TaskInstance task;
    ScriptedTranscript transcript;
    RunConfig config;
    ExpectedTrace expected;
};

inline const char* kProtocolHint =
    "hint: declare one capability in <cap>...</cap> and one JSON tool call in "
    "<tool_call>...</tool_call>, or finish with <answer>...</answer>";

inline const std::string kTriangleCall =
    "<think>Use the calculator.</think><cap>Spatial & Geometric Understanding</cap>"
    "<tool_call>{\"name\": \"geometry_calculator\", \"arguments\": {\"shape\": \"triangle\", "
    "\"points\": [[0, 0], [3, 0], [0, 4]]}}</tool_call>";

inline const std::string kLogicCall =
    "<cap>Logic</cap><tool_call>{\"name\": \"eval_expression\", \"arguments\": {\"expr\": \"1+1\"}}</tool_call>";

// The three termination branches of the loop.
inline std::vector<Scenario> termination_scenarios() {
    std::vector<Scenario> out;
    {
        Scenario s{"immediate-answer", text_task("imm", "Pick the right option.", "B"),
                   script({"<answer>B</answer>"}), {}, {}};
        s.expected = {Termination::Answered, "B", {}, {{"<answer>B</answer>", {}, "", false, "", "", "", false, {}}}};
        out.push_back(std::move(s));
    }
    {
        Scenario s{"tool-then-answer", text_task("tri", "Area of the 3-4-5 right triangle?", "6"),
                   script({kTriangleCall, "<think>Area read off.</think><answer> 6 </answer>"}), {}, {}};
        s.expected = {Termination::Answered,
                      "6",
                      {Capability::Spatial},
                      {{kTriangleCall, Capability::Spatial, "geometry_calculator", true, "", "observation",
                        "shape: triangle\narea: 6.0\nperimeter: 12.0", false, {}},
                       {"<think>Area read off.</think><answer> 6 </answer>", {}, "", false, "", "", "", false, {}}}};
        out.push_back(std::move(s));
    }
    {
        std::vector<std::string> responses(12, kLogicCall);
        Scenario s{"turn-limit", text_task("loop", "Keep adding.", "2"), script(responses), {}, {}};
        s.expected.termination = Termination::TurnLimit;
        for (int i = 0; i < 10; ++i) {
            s.expected.capability_history.push_back(Capability::Logic);
            s.expected.turns.push_back(
                {kLogicCall, Capability::Logic, "eval_expression", true, "", "observation", "value: 2.0", false, {}});
        }
        out.push_back(std::move(s));
    }
    return out;
}

inline std::string protocol_error(const std::string& kind) { return "error: " + kind + "\ndetail: "; }

// One violating turn, then a clean answer. No tool may run in any of them.
inline std::vector<Scenario> adversarial_scenarios() {
    const std::string answer = "<answer>done</answer>";
    auto bad_then_answer = [&](std::string name, std::string bad, std::optional<Capability> cap, std::string tool,
                               std::string kind) {
        Scenario s{std::move(name), text_task("adv", "Compute something.", "done"), script({bad, answer}), {}, {}};
        s.expected = {Termination::Answered,
                      "done",
                      {},
                      {{bad, cap, std::move(tool), false, kind, "protocol_error", protocol_error(kind), true, {}},
                       {answer, {}, "", false, "", "", "", false, {}}}};
        return s;
    };
    std::vector<Scenario> out;
    out.push_back(bad_then_answer(
        "missing-cap",
        "<think>skip the capability</think><tool_call>{\"name\": \"eval_expression\", \"arguments\": {\"expr\": \"1\"}}</tool_call>",
        std::nullopt, "", "MissingCapability"));
    out.push_back(bad_then_answer(
        "unknown-cap",
        "<cap>Telepathy</cap><tool_call>{\"name\": \"eval_expression\", \"arguments\": {\"expr\": \"1\"}}</tool_call>",
        std::nullopt, "", "UnknownCapability"));
    out.push_back(bad_then_answer(
        "mismatched-tool",
        "<cap>Logical Programming Reasoning</cap><tool_call>{\"name\": \"geometry_calculator\", \"arguments\": "
        "{\"shape\": \"circle\", \"center\": [0, 0], \"radius\": 1}}</tool_call>",
        Capability::Logic, "geometry_calculator", "CapabilityMismatch"));
    out.push_back(bad_then_answer("malformed-json",
                                  "<cap>Logic</cap><tool_call>{\"name\": \"eval_expression\", \"arguments\": {\"expr\": </tool_call>",
                                  Capability::Logic, "", "MalformedToolCall"));
    out.push_back(bad_then_answer("unknown-tool",
                                  "<cap>Logic</cap><tool_call>{\"name\": \"warp_reality\", \"arguments\": {}}</tool_call>",
                                  Capability::Logic, "warp_reality", "UnknownTool"));
    out.push_back(bad_then_answer("missing-tool-call", "<think>thinking only</think><cap>Logic</cap>", Capability::Logic, "",
                                  "MissingToolCall"));
    {
        const std::string raw =
            "<answer>7</answer><cap>Logic</cap><tool_call>{\"name\": \"eval_expression\", \"arguments\": {\"expr\": \"7\"}}</tool_call>";
        Scenario s{"tool-after-answer", text_task("adv", "Compute something.", "7"), script({raw}), {}, {}};
        s.expected = {Termination::Answered,
                      "7",
                      {},
                      {{raw, {}, "", false, "", "", "", false, {"tool_call ignored: the turn carries an answer"}}}};
        out.push_back(std::move(s));
    }
    return out;
}

inline SessionResult run(const Scenario& s, ImageStore& store, const ToolExecutor* executor = nullptr) {
    ScriptedProvider provider(s.transcript);
    const auto registry = Registry::load_default();
    SessionEnv env;
    env.store = &store;
    env.executor = executor;
    return run_session(s.task, provider, registry, s.config, env);
}

}  // namespace fixture
