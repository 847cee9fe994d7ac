// SPDX-License-Identifier: Apache-2.0
#include "caporch/trace.hpp"

#include <fstream>
#include <stdexcept>

#include "caporch/util.hpp"

namespace caporch {

using nlohmann::json;

std::string_view to_string(Termination t) {
    switch (t) {
        case Termination::Answered: return "Answered";
        case Termination::TurnLimit: return "TurnLimit";
        case Termination::ProviderError: return "ProviderError";
        case Termination::Aborted: return "Aborted";
    }
    return "?";
}

std::optional<Termination> termination_from_string(std::string_view s) {
    for (auto t : {Termination::Answered, Termination::TurnLimit, Termination::ProviderError, Termination::Aborted}) {
        if (to_string(t) == s) return t;
    }
    return std::nullopt;
}

std::string observation_digest(std::string_view kind, std::string_view text,
                               const std::vector<std::string>& image_ids) {
    std::string buf;
    buf.append(kind).push_back('\n');
    buf.append(text).push_back('\n');
    for (const auto& id : image_ids) buf.append(id).push_back(',');
    return sha256_hex(buf);
}

namespace {

std::optional<SegmentKind> segment_kind_from_string(std::string_view s) {
    for (auto k : {SegmentKind::Think, SegmentKind::Cap, SegmentKind::ToolCall, SegmentKind::Answer, SegmentKind::Plain}) {
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

SegmentKind require_kind(const json& v) {
    const auto k = segment_kind_from_string(v.get<std::string>());
    if (!k) throw std::invalid_argument("unknown segment kind '" + v.get<std::string>() + "'");
    return *k;
}

Capability require_capability(const json& v) {
    const auto c = capability_from_short_name(v.get<std::string>());
    if (!c) throw std::invalid_argument("unknown capability '" + v.get<std::string>() + "'");
    return *c;
}

json segment_to_json(const Segment& s) {
    json j = {{"kind", to_string(s.kind)}, {"text", s.text}, {"span", {s.span.start, s.span.end}}};
    if (s.shadowed) j["shadowed"] = to_string(*s.shadowed);
    return j;
}

Segment segment_from_json(const json& j) {
    Segment s;
    s.kind = require_kind(j.at("kind"));
    s.text = j.at("text").get<std::string>();
    s.span = {j.at("span").at(0).get<std::size_t>(), j.at("span").at(1).get<std::size_t>()};
    if (j.contains("shadowed")) s.shadowed = require_kind(j["shadowed"]);
    return s;
}

ToolInvocation invocation_from_json(const json& j) {
    ToolInvocation inv;
    inv.tool = j.at("tool").get<std::string>();
    inv.arguments = j.value("arguments", json::object());
    inv.image_refs = j.value("images", std::vector<std::string>{});
    if (j.contains("declared_capability") && !j["declared_capability"].is_null()) {
        inv.declared_capability = require_capability(j["declared_capability"]);
    }
    return inv;
}

json turn_to_json(const TurnRecord& t, bool include_timing) {
    json segs = json::array();
    for (const auto& s : t.segments) segs.push_back(segment_to_json(s));
    json j = {
        {"index", t.index},
        {"raw", t.raw},
        {"segments", segs},
        {"context_digest", t.context_digest},
        {"capability", t.capability ? json(short_name(*t.capability)) : json(nullptr)},
        {"invocation", t.invocation ? t.invocation->to_json() : json(nullptr)},
        {"backend", t.backend},
        {"executed", t.executed},
        {"error_kind", t.error_kind},
        {"error_message", t.error_message},
        {"observation_kind", t.observation_kind},
        {"observation_text", t.observation_text},
        {"observation_images", t.observation_images},
        {"observation_digest", t.observation_digest},
        {"notes", t.notes},
    };
    if (include_timing) j["elapsed_ms"] = t.elapsed_ms;
    return j;
}

TurnRecord turn_from_json(const json& j) {
    TurnRecord t;
    t.index = j.at("index").get<int>();
    t.raw = j.at("raw").get<std::string>();
    for (const auto& s : j.at("segments")) t.segments.push_back(segment_from_json(s));
    t.context_digest = j.value("context_digest", "");
    if (j.contains("capability") && !j["capability"].is_null()) t.capability = require_capability(j["capability"]);
    if (j.contains("invocation") && !j["invocation"].is_null()) t.invocation = invocation_from_json(j["invocation"]);
    t.backend = j.value("backend", "");
    t.executed = j.value("executed", false);
    t.error_kind = j.value("error_kind", "");
    t.error_message = j.value("error_message", "");
    t.observation_kind = j.value("observation_kind", "");
    t.observation_text = j.value("observation_text", "");
    t.observation_images = j.value("observation_images", std::vector<std::string>{});
    t.observation_digest = j.value("observation_digest", "");
    t.notes = j.value("notes", std::vector<std::string>{});
    t.elapsed_ms = j.value("elapsed_ms", 0.0);
    return t;
}

}  // namespace

json TraceRecord::to_json(bool include_timing) const {
    json imgs = json::array();
    for (const auto& r : images) imgs.push_back({{"id", r.id}, {"width", r.width}, {"height", r.height}});
    json turns_j = json::array();
    for (const auto& t : turns) turns_j.push_back(turn_to_json(t, include_timing));
    json history = json::array();
    for (Capability c : capability_history) history.push_back(short_name(c));
    json j = {
        {"task_id", task_id},
        {"instruction", instruction},
        {"images", imgs},
        {"config", config},
        {"provider", provider},
        {"max_context_tokens", max_context_tokens},
        {"budget_tokens", budget_tokens},
        {"system_prompt_digest", system_prompt_digest},
        {"turns", turns_j},
        {"turns_used", turns.size()},
        {"termination", to_string(termination)},
        {"answer", answer ? json(*answer) : json(nullptr)},
        {"capability_history", history},
        {"evicted_ids", evicted_ids},
        {"failure", failure},
    };
    if (include_timing) {
        j["started_at"] = started_at;
        j["elapsed_ms"] = elapsed_ms;
    }
    return j;
}

TraceRecord TraceRecord::from_json(const json& j) {
    TraceRecord r;
    r.task_id = j.at("task_id").get<std::string>();
    r.instruction = j.value("instruction", "");
    for (const auto& im : j.value("images", json::array())) {
        r.images.push_back({im.at("id").get<std::string>(), im.value("width", 0), im.value("height", 0)});
    }
    r.config = j.value("config", json::object());
    r.provider = j.value("provider", "");
    r.max_context_tokens = j.value("max_context_tokens", std::size_t{0});
    r.budget_tokens = j.value("budget_tokens", std::size_t{0});
    r.system_prompt_digest = j.value("system_prompt_digest", "");
    int expected = 1;
    for (const auto& t : j.at("turns")) {
        r.turns.push_back(turn_from_json(t));
        if (r.turns.back().index != expected++) {
            throw std::invalid_argument("trace turns are not contiguous from 1");
        }
    }
    const auto term = termination_from_string(j.at("termination").get<std::string>());
    if (!term) throw std::invalid_argument("unknown termination '" + j["termination"].get<std::string>() + "'");
    r.termination = *term;
    if (j.contains("answer") && !j["answer"].is_null()) r.answer = j["answer"].get<std::string>();
    for (const auto& c : j.value("capability_history", json::array())) r.capability_history.push_back(require_capability(c));
    r.evicted_ids = j.value("evicted_ids", std::vector<std::string>{});
    r.failure = j.value("failure", "");
    r.started_at = j.value("started_at", "");
    r.elapsed_ms = j.value("elapsed_ms", 0.0);
    return r;
}

void TraceRecord::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write trace " + path.string());
    out << to_json(true).dump(2) << '\n';
}

TraceRecord TraceRecord::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read trace " + path.string());
    return from_json(json::parse(in));
}

std::optional<std::string> extract_final_answer(const TraceRecord& trace) {
    // Only the last turn can be terminal: the loop stops at the first answer.
    if (trace.turns.empty()) return std::nullopt;
    for (const auto& s : trace.turns.back().segments) {
        if (s.kind == SegmentKind::Answer) return trim(s.text);
    }
    return std::nullopt;
}

}  // namespace caporch
