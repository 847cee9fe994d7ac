// SPDX-License-Identifier: Apache-2.0
#include "caporch/session_state.hpp"

#include <optional>
#include <stdexcept>

#include <spdlog/spdlog.h>

#include "caporch/util.hpp"

namespace caporch {

namespace {

constexpr std::string_view kTruncatedMarker = "\n[truncated]";

bool is_observation_class(EvidenceKind k) {
    return k == EvidenceKind::Observation || k == EvidenceKind::ProtocolError;
}

std::string render_observation(const Observation& obs) {
    std::string header;
    if (obs.kind == EvidenceKind::ProtocolError) {
        header = "[protocol-error turn=" + std::to_string(obs.turn) + "]\n";
    } else {
        header = "[observation turn=" + std::to_string(obs.turn) + " tool=" + obs.tool + "]\n";
    }
    return header + obs.text;
}

// Cuts `text` to at most `max_bytes` without splitting a UTF-8 sequence.
std::string utf8_prefix(std::string_view text, std::size_t max_bytes) {
    if (text.size() <= max_bytes) return std::string(text);
    std::size_t cut = max_bytes;
    while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80) --cut;
    return std::string(text.substr(0, cut));
}

// Largest text length (bytes) whose token estimate fits `tokens` with `images` refs.
std::optional<std::size_t> byte_allowance(std::size_t tokens, std::size_t images) {
    const std::size_t overhead = images * kImageTokenOverhead;
    if (tokens < overhead) return std::nullopt;
    return (tokens - overhead) * 4;
}

std::optional<std::size_t> pick_victim(const SessionState& s, int current_turn, bool protect_recent,
                                       bool observations) {
    for (std::size_t i = 0; i < s.evidence.size(); ++i) {
        const auto& item = s.evidence[i];
        if (item.pinned) continue;
        if (observations != is_observation_class(item.kind)) continue;
        if (protect_recent && item.turn_of_origin >= current_turn - 1) continue;
        return i;
    }
    return std::nullopt;
}

void make_room(SessionState& s, std::size_t incoming, int current_turn) {
    while (s.used_tokens + incoming > s.budget_tokens) {
        // Oldest observations, then oldest model turns; the two most recent turns
        // are only touched when nothing else is left.
        auto victim = pick_victim(s, current_turn, true, true);
        if (!victim) victim = pick_victim(s, current_turn, true, false);
        if (!victim) victim = pick_victim(s, current_turn, false, true);
        if (!victim) victim = pick_victim(s, current_turn, false, false);
        if (!victim) {
            throw StateError(StateErrorKind::ObservationTooLarge,
                             "no evictable evidence left to fit the budget");
        }
        const auto& item = s.evidence[*victim];
        spdlog::debug("evicting {} ({} tokens, turn {})", item.id, item.approx_tokens,
                      item.turn_of_origin);
        s.used_tokens -= item.approx_tokens;
        s.evicted_ids.push_back(item.id);
        s.evidence.erase(s.evidence.begin() + static_cast<std::ptrdiff_t>(*victim));
    }
}

int last_turn(const SessionState& s) {
    int t = 0;
    for (const auto& item : s.evidence) t = std::max(t, item.turn_of_origin);
    return t;
}

void push_item(SessionState& s, EvidenceKind kind, std::string text, std::vector<std::string> images,
               bool pinned, int turn) {
    EvidenceItem item;
    item.id = "e" + std::to_string(s.next_seq++);
    item.kind = kind;
    item.approx_tokens = estimate_tokens(text, images.size());
    item.text = std::move(text);
    item.image_ids = std::move(images);
    item.pinned = pinned;
    item.turn_of_origin = turn;
    s.used_tokens += item.approx_tokens;
    s.evidence.push_back(std::move(item));
}

}  // namespace

std::string_view to_string(EvidenceKind k) {
    switch (k) {
        case EvidenceKind::TaskText: return "TaskText";
        case EvidenceKind::InputImage: return "InputImage";
        case EvidenceKind::ModelTurn: return "ModelTurn";
        case EvidenceKind::Observation: return "Observation";
        case EvidenceKind::ProtocolError: return "ProtocolError";
    }
    return "?";
}

std::string_view to_string(StateErrorKind k) {
    switch (k) {
        case StateErrorKind::BudgetTooSmall: return "BudgetTooSmall";
        case StateErrorKind::ObservationTooLarge: return "ObservationTooLarge";
        case StateErrorKind::InvalidTask: return "InvalidTask";
    }
    return "?";
}

std::size_t SessionState::pinned_tokens() const {
    std::size_t n = 0;
    for (const auto& item : evidence) {
        if (item.pinned) n += item.approx_tokens;
    }
    return n;
}

std::string SessionState::latest_image() const {
    for (auto it = evidence.rbegin(); it != evidence.rend(); ++it) {
        if (!it->image_ids.empty()) return it->image_ids.back();
    }
    return {};
}

std::size_t estimate_tokens(std::string_view text, std::size_t image_count) {
    return (text.size() + 3) / 4 + image_count * kImageTokenOverhead;
}

SessionState init_state(const TaskInstance& task, std::size_t budget_tokens) {
    if (trim(task.instruction).empty()) {
        throw StateError(StateErrorKind::InvalidTask, "task '" + task.id + "' has an empty instruction");
    }
    SessionState s;
    s.budget_tokens = budget_tokens;
    push_item(s, EvidenceKind::TaskText, task.instruction, {}, true, 0);
    for (std::size_t i = 0; i < task.images.size(); ++i) {
        const auto& img = task.images[i];
        push_item(s, EvidenceKind::InputImage,
                  "[input image " + std::to_string(i) + ": " + img.id + " " +
                      std::to_string(img.width) + "x" + std::to_string(img.height) + "]",
                  {img.id}, true, 0);
    }
    if (s.used_tokens >= budget_tokens) {
        throw StateError(StateErrorKind::BudgetTooSmall,
                         "pinned task items need " + std::to_string(s.used_tokens) +
                             " tokens, budget is " + std::to_string(budget_tokens));
    }
    return s;
}

void append_observation(SessionState& state, const Observation& obs) {
    if (!is_observation_class(obs.kind)) {
        throw std::invalid_argument("append_observation expects an Observation or ProtocolError");
    }
    if (obs.turn < last_turn(state)) {
        throw std::invalid_argument("observation turn precedes existing evidence");
    }
    const auto text = render_observation(obs);
    const auto tokens = estimate_tokens(text, obs.image_ids.size());
    const auto available = state.budget_tokens - state.pinned_tokens();
    if (tokens > available) {
        throw StateError(StateErrorKind::ObservationTooLarge,
                         "observation needs " + std::to_string(tokens) + " tokens, only " +
                             std::to_string(available) + " available");
    }
    make_room(state, tokens, obs.turn);
    push_item(state, obs.kind, text, obs.image_ids, false, obs.turn);
}

Observation fit_to_budget(const SessionState& state, Observation obs) {
    const auto available = state.budget_tokens - state.pinned_tokens();
    if (estimate_tokens(render_observation(obs), obs.image_ids.size()) <= available) return obs;
    Observation empty = obs;
    empty.text.clear();
    const auto header_bytes = render_observation(empty).size() + kTruncatedMarker.size();
    auto allowance = byte_allowance(available, obs.image_ids.size());
    if (!allowance || *allowance < header_bytes) {
        obs.image_ids.clear();
        allowance = byte_allowance(available, 0);
    }
    if (!allowance || *allowance < header_bytes) {
        throw StateError(StateErrorKind::ObservationTooLarge, "budget cannot hold any observation");
    }
    obs.text = utf8_prefix(obs.text, *allowance - header_bytes) + std::string(kTruncatedMarker);
    return obs;
}

void append_model_turn(SessionState& state, const ReasoningTurn& turn) {
    if (turn.index < last_turn(state)) {
        throw std::invalid_argument("model turn index precedes existing evidence");
    }
    state.turn_history.push_back(turn);
    std::string text = turn.raw;
    const auto available = state.budget_tokens - state.pinned_tokens();
    if (estimate_tokens(text, 0) > available) {
        const auto allowance = available * 4;
        text = allowance > kTruncatedMarker.size()
                   ? utf8_prefix(text, allowance - kTruncatedMarker.size()) + std::string(kTruncatedMarker)
                   : std::string();
    }
    make_room(state, estimate_tokens(text, 0), turn.index);
    push_item(state, EvidenceKind::ModelTurn, std::move(text), {}, false, turn.index);
}

ProviderMessages serialize_context(const SessionState& state, std::string_view system_prompt) {
    ProviderMessages out;
    out.messages.push_back({Role::System, std::string(system_prompt), {}});
    for (const auto& item : state.evidence) {
        const Role role = item.kind == EvidenceKind::ModelTurn ? Role::Assistant : Role::User;
        out.messages.push_back({role, item.text, item.image_ids});
    }
    if (!state.capability_history.empty()) {
        std::string line = "[capability history]";
        for (std::size_t i = 0; i < state.capability_history.size(); ++i) {
            line += i == 0 ? " " : ", ";
            line += short_name(state.capability_history[i]);
        }
        out.messages.push_back({Role::User, std::move(line), {}});
    }
    return out;
}

}  // namespace caporch
