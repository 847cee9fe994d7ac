// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "caporch/capability.hpp"
#include "caporch/registry.hpp"

namespace caporch {

// Tags of the reasoning protocol. Matched case-sensitively, never nested.
enum class Tag { Think, Cap, ToolCall, Answer };

std::string_view open_tag(Tag t);
std::string_view close_tag(Tag t);

enum class SegmentKind { Think, Cap, ToolCall, Answer, Plain };
std::string_view to_string(SegmentKind k);
SegmentKind segment_kind(Tag t);

struct Span {
    std::size_t start = 0;  // inclusive
    std::size_t end = 0;    // exclusive

    bool operator==(const Span&) const = default;
};

struct Segment {
    SegmentKind kind = SegmentKind::Plain;
    // Inner text for tagged segments (untrimmed), verbatim source for Plain.
    std::string text;
    Span span;
    // Set on a Plain segment that holds a repeated, well-formed tag region whose
    // first occurrence already produced a segment of this kind.
    std::optional<SegmentKind> shadowed;
};

struct ReasoningTurn {
    int index = 1;
    std::string raw;
    std::vector<Segment> segments;
    bool terminal = false;

    const Segment* first(SegmentKind kind) const;
    std::size_t count_shadowed(SegmentKind kind) const;
};

// Total: any input parses, malformed regions are kept as Plain text.
ReasoningTurn parse_turn(std::string raw, int index = 1);

// Concatenation of the source text covered by each segment, in span order.
std::string reassemble(const ReasoningTurn& turn);

// Trimmed inner text of the first well-formed occurrence of `tag`.
std::optional<std::string> extract_between(std::string_view raw, Tag tag);

// Tag grammar and the capability-first instructions, embedded in the system prompt.
std::string_view default_protocol_doc();
// Variant used when the capability stage is disabled.
std::string_view flat_protocol_doc();

// One section per capability with its admissible tools. Deterministic.
// Throws CapabilityError(UnknownCapabilityBinding) when a tool's capability is
// not among `capabilities`.
std::string render_system_prompt(std::span<const CapabilitySpec> capabilities,
                                 std::span<const ToolSpec> tools, std::string_view protocol_doc);

// Single tool list without capability sections.
std::string render_flat_system_prompt(std::span<const ToolSpec> tools,
                                      std::string_view protocol_doc);

}  // namespace caporch
