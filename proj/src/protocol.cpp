// SPDX-License-Identifier: Apache-2.0
#include "caporch/protocol.hpp"

#include <array>
#include <set>

#include <spdlog/spdlog.h>

#include "caporch/util.hpp"

namespace caporch {

namespace {

constexpr std::array<Tag, 4> kTags = {Tag::Think, Tag::Cap, Tag::ToolCall, Tag::Answer};

std::optional<Tag> tag_at(std::string_view raw, std::size_t pos) {
    for (Tag t : kTags) {
        const auto open = open_tag(t);
        if (raw.compare(pos, open.size(), open) == 0) return t;
    }
    return std::nullopt;
}

void push_plain(std::vector<Segment>& out, std::string_view raw, std::size_t start,
                std::size_t end) {
    if (start >= end) return;
    // Merge with a preceding plain segment so inter-tag text stays one piece.
    if (!out.empty() && out.back().kind == SegmentKind::Plain && !out.back().shadowed &&
        out.back().span.end == start) {
        out.back().span.end = end;
        out.back().text.append(raw.substr(start, end - start));
        return;
    }
    out.push_back(Segment{SegmentKind::Plain, std::string(raw.substr(start, end - start)),
                          Span{start, end}, std::nullopt});
}

void render_tool(std::string& out, const ToolSpec& tool) {
    out += "- " + tool.name + ": " + tool.description + "\n";
    for (const auto& p : tool.params) {
        out += "    * " + p.name + " (" + std::string(to_string(p.type)) +
               (p.required ? ", required" : ", optional") + ")";
        if (!p.description.empty()) out += ": " + p.description;
        out += "\n";
    }
    if (tool.produces_images) out += "    returns a new image id\n";
}

}  // namespace

std::string_view open_tag(Tag t) {
    switch (t) {
        case Tag::Think: return "<think>";
        case Tag::Cap: return "<cap>";
        case Tag::ToolCall: return "<tool_call>";
        case Tag::Answer: return "<answer>";
    }
    return "";
}

std::string_view close_tag(Tag t) {
    switch (t) {
        case Tag::Think: return "</think>";
        case Tag::Cap: return "</cap>";
        case Tag::ToolCall: return "</tool_call>";
        case Tag::Answer: return "</answer>";
    }
    return "";
}

std::string_view to_string(SegmentKind k) {
    switch (k) {
        case SegmentKind::Think: return "think";
        case SegmentKind::Cap: return "cap";
        case SegmentKind::ToolCall: return "tool_call";
        case SegmentKind::Answer: return "answer";
        case SegmentKind::Plain: return "plain";
    }
    return "plain";
}

SegmentKind segment_kind(Tag t) {
    switch (t) {
        case Tag::Think: return SegmentKind::Think;
        case Tag::Cap: return SegmentKind::Cap;
        case Tag::ToolCall: return SegmentKind::ToolCall;
        case Tag::Answer: return SegmentKind::Answer;
    }
    return SegmentKind::Plain;
}

const Segment* ReasoningTurn::first(SegmentKind kind) const {
    for (const auto& s : segments) {
        if (s.kind == kind) return &s;
    }
    return nullptr;
}

std::size_t ReasoningTurn::count_shadowed(SegmentKind kind) const {
    std::size_t n = 0;
    for (const auto& s : segments) {
        if (s.shadowed && *s.shadowed == kind) ++n;
    }
    return n;
}

ReasoningTurn parse_turn(std::string raw, int index) {
    ReasoningTurn turn;
    turn.index = index;
    turn.raw = std::move(raw);
    const std::string_view src = turn.raw;

    std::set<SegmentKind> seen;
    std::size_t plain_start = 0;
    std::size_t pos = 0;
    while (pos < src.size()) {
        const auto lt = src.find('<', pos);
        if (lt == std::string_view::npos) break;
        const auto tag = tag_at(src, lt);
        if (!tag) {
            pos = lt + 1;
            continue;
        }
        const auto body = lt + open_tag(*tag).size();
        const auto close = src.find(close_tag(*tag), body);
        if (close == std::string_view::npos) {
            // Unterminated: the open tag is literal text.
            pos = body;
            continue;
        }
        const auto end = close + close_tag(*tag).size();
        push_plain(turn.segments, src, plain_start, lt);
        const auto kind = segment_kind(*tag);
        if (seen.insert(kind).second) {
            turn.segments.push_back(Segment{kind, std::string(src.substr(body, close - body)),
                                            Span{lt, end}, std::nullopt});
        } else {
            spdlog::debug("turn {}: repeated <{}> at offset {} kept as plain text", index,
                          to_string(kind), lt);
            turn.segments.push_back(Segment{SegmentKind::Plain,
                                            std::string(src.substr(lt, end - lt)), Span{lt, end},
                                            kind});
        }
        plain_start = end;
        pos = end;
    }
    push_plain(turn.segments, src, plain_start, src.size());
    turn.terminal = seen.contains(SegmentKind::Answer);
    return turn;
}

std::string reassemble(const ReasoningTurn& turn) {
    std::string out;
    out.reserve(turn.raw.size());
    std::size_t cursor = 0;
    for (const auto& s : turn.segments) {
        if (s.span.start > cursor) out.append(turn.raw, cursor, s.span.start - cursor);
        out.append(turn.raw, s.span.start, s.span.end - s.span.start);
        cursor = s.span.end;
    }
    if (cursor < turn.raw.size()) out.append(turn.raw, cursor, std::string::npos);
    return out;
}

std::optional<std::string> extract_between(std::string_view raw, Tag tag) {
    const auto turn = parse_turn(std::string(raw));
    if (const auto* seg = turn.first(segment_kind(tag))) return trim(seg->text);
    return std::nullopt;
}

std::string_view default_protocol_doc() {
    return R"(You solve visual reasoning tasks step by step. Each step must:
(i) first select a capability, (ii) call only tools listed under it, one per step, and (iii) once the observations settle the question, state the final answer.

Response format for every step:
<think>your reasoning for this step</think>
<cap>the name of ONE capability listed below</cap>
<tool_call>{"name": "<tool>", "arguments": {...}, "images": ["<image id>"]}</tool_call>

Only one tool call is executed per step, and it must belong to the capability you declared.
Image ids may also be written as "input:N" (the N-th task image) or "latest" (the most recent image).
When you are done, reply with <answer>final answer</answer> instead of a tool call.)";
}

std::string_view flat_protocol_doc() {
    return R"(You solve visual reasoning tasks step by step using the tools listed below.

Response format for every step:
<think>your reasoning for this step</think>
<tool_call>{"name": "<tool>", "arguments": {...}, "images": ["<image id>"]}</tool_call>

Only one tool call is executed per step.
Image ids may also be written as "input:N" (the N-th task image) or "latest" (the most recent image).
When you are done, reply with <answer>final answer</answer> instead of a tool call.)";
}

std::string render_system_prompt(std::span<const CapabilitySpec> capabilities,
                                 std::span<const ToolSpec> tools, std::string_view protocol_doc) {
    for (const auto& tool : tools) {
        bool listed = false;
        for (const auto& c : capabilities) listed = listed || c.id == tool.capability;
        if (!listed) {
            throw CapabilityError(CapabilityErrorKind::UnknownCapabilityBinding,
                                  "tool '" + tool.name + "' is bound to unlisted capability " +
                                      std::string(short_name(tool.capability)));
        }
    }
    std::string out(protocol_doc);
    out += "\n\n# Capabilities\n";
    for (const auto& c : capabilities) {
        out += "\n## " + c.display_name + "\n";
        out += c.description + "\n";
        out += "Admissible tools:\n";
        std::size_t n = 0;
        for (const auto& tool : tools) {
            if (tool.capability != c.id) continue;
            render_tool(out, tool);
            ++n;
        }
        if (n == 0) out += "(none available)\n";
    }
    return out;
}

std::string render_flat_system_prompt(std::span<const ToolSpec> tools,
                                      std::string_view protocol_doc) {
    std::string out(protocol_doc);
    out += "\n\n# Tools\n";
    for (const auto& tool : tools) render_tool(out, tool);
    return out;
}

}  // namespace caporch
