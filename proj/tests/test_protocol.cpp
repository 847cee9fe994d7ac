// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>

#include "caporch/protocol.hpp"
#include "caporch/registry.hpp"
#include "oracles.hpp"

using namespace caporch;

namespace {

std::vector<SegmentKind> kinds(const ReasoningTurn& t) {
    std::vector<SegmentKind> out;
    for (const auto& s : t.segments) out.push_back(s.kind);
    return out;
}

std::string tag_name(SegmentKind k) { return std::string(to_string(k)); }

// Rebuilds the source from segment contents only, without looking at raw.
std::string rebuild(const ReasoningTurn& t) {
    std::string out;
    for (const auto& s : t.segments) {
        if (s.kind == SegmentKind::Plain) {
            out += s.text;
        } else {
            out += "<" + tag_name(s.kind) + ">" + s.text + "</" + tag_name(s.kind) + ">";
        }
    }
    return out;
}

std::size_t count(const std::string& hay, const std::string& needle) {
    std::size_t n = 0;
    for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
    return n;
}

}  // namespace

TEST(ParseTurn, ThinkCapToolCall) {
    const auto t = parse_turn(
        "<think>need area</think><cap>Spatial & Geometric Understanding</cap>"
        "<tool_call>{\"name\":\"geometry_calculator\"}</tool_call>");
    EXPECT_EQ(kinds(t), (std::vector{SegmentKind::Think, SegmentKind::Cap, SegmentKind::ToolCall}));
    EXPECT_FALSE(t.terminal);
    EXPECT_EQ(t.segments[1].text, "Spatial & Geometric Understanding");
}

TEST(ParseTurn, AnswerOnly) {
    const auto t = parse_turn("<answer>42</answer>");
    ASSERT_EQ(t.segments.size(), 1u);
    EXPECT_EQ(t.segments[0].kind, SegmentKind::Answer);
    EXPECT_EQ(t.segments[0].text, "42");
    EXPECT_TRUE(t.terminal);
}

TEST(ParseTurn, NoTags) {
    const auto t = parse_turn("no tags here");
    ASSERT_EQ(t.segments.size(), 1u);
    EXPECT_EQ(t.segments[0].kind, SegmentKind::Plain);
    EXPECT_EQ(t.segments[0].text, "no tags here");
    EXPECT_FALSE(t.terminal);
}

TEST(ParseTurn, EmptyInput) {
    const auto t = parse_turn("");
    EXPECT_TRUE(t.segments.empty());
    EXPECT_EQ(reassemble(t), "");
}

TEST(ParseTurn, UnterminatedTagIsPlain) {
    const auto t = parse_turn("<cap>Logic <answer>7</answer>");
    EXPECT_EQ(kinds(t), (std::vector{SegmentKind::Plain, SegmentKind::Answer}));
    EXPECT_EQ(t.segments[0].text, "<cap>Logic ");
    EXPECT_TRUE(t.terminal);
}

TEST(ParseTurn, RepeatedTagIsShadowed) {
    const auto t = parse_turn("<cap>A</cap> and <cap>B</cap>");
    EXPECT_EQ(t.first(SegmentKind::Cap)->text, "A");
    EXPECT_EQ(t.count_shadowed(SegmentKind::Cap), 1u);
    EXPECT_EQ(reassemble(t), t.raw);
}

TEST(ParseTurn, TagsAreCaseSensitive) {
    const auto t = parse_turn("<ANSWER>x</ANSWER>");
    EXPECT_FALSE(t.terminal);
}

TEST(ParseTurn, TrailingPlainAfterAnswer) {
    const auto t = parse_turn("<answer>B</answer> hope that helps");
    EXPECT_TRUE(t.terminal);
    EXPECT_EQ(t.segments.back().kind, SegmentKind::Plain);
}

TEST(ExtractBetween, Examples) {
    EXPECT_EQ(extract_between("<cap> Logic </cap>", Tag::Cap), "Logic");
    EXPECT_EQ(extract_between("plain text", Tag::Cap), std::nullopt);
    EXPECT_EQ(extract_between("<cap>A</cap><cap>B</cap>", Tag::Cap), "A");
}

// Property: any input parses, segments tile the input, and the text can be
// rebuilt byte for byte from the segments alone.
TEST(ParseTurn, FuzzLossless) {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 5000; ++i) {
        const std::string raw = oracle::tag_soup(rng);
        const auto t = parse_turn(raw);
        ASSERT_EQ(reassemble(t), raw);
        ASSERT_EQ(rebuild(t), raw) << raw;
        std::size_t cursor = 0;
        for (const auto& s : t.segments) {
            ASSERT_EQ(s.span.start, cursor);
            ASSERT_LT(s.span.start, s.span.end);
            cursor = s.span.end;
        }
        ASSERT_EQ(cursor, raw.size());
    }
}

// Property: tagged segments and shadowed regions match an independent scan.
TEST(ParseTurn, FuzzMatchesReferenceScan) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 5000; ++i) {
        const std::string raw = oracle::tag_soup(rng);
        const auto t = parse_turn(raw);
        std::vector<oracle::TagRegion> got;
        for (const auto& s : t.segments) {
            if (s.kind != SegmentKind::Plain) got.push_back({tag_name(s.kind), s.span.start, s.span.end, true});
            if (s.shadowed) got.push_back({tag_name(*s.shadowed), s.span.start, s.span.end, false});
        }
        const auto want = oracle::tag_regions(raw);
        ASSERT_EQ(got.size(), want.size()) << raw;
        for (std::size_t k = 0; k < want.size(); ++k) {
            EXPECT_EQ(got[k].name, want[k].name);
            EXPECT_EQ(got[k].start, want[k].start);
            EXPECT_EQ(got[k].end, want[k].end);
            EXPECT_EQ(got[k].first, want[k].first);
        }
        bool answer = false;
        for (const auto& r : want) answer = answer || r.name == "answer";
        EXPECT_EQ(t.terminal, answer);
    }
}

TEST(SystemPrompt, FullCatalog) {
    const auto reg = Registry::load_default();
    std::vector<ToolSpec> tools;
    for (const auto& t : reg.flat_toolset()) {
        if (t.backend.kind == Backend::Kind::Local) tools.push_back(t);
    }
    ASSERT_EQ(tools.size(), 12u);
    const auto prompt = render_system_prompt(capability_specs(), tools, default_protocol_doc());
    EXPECT_EQ(count(prompt, "\n## "), 6u);
    std::size_t entries = 0;
    for (const auto& t : tools) entries += count(prompt, "\n- " + t.name + ": ");
    EXPECT_EQ(entries, 12u);
    for (const auto& c : capability_specs()) EXPECT_NE(prompt.find(c.description), std::string::npos);
    EXPECT_NE(prompt.find("first select a capability"), std::string::npos);
}

TEST(SystemPrompt, NoTools) {
    const auto prompt = render_system_prompt(capability_specs(), {}, default_protocol_doc());
    EXPECT_EQ(count(prompt, "\n## "), 6u);
    EXPECT_EQ(count(prompt, "\n- "), 0u);
}

TEST(SystemPrompt, Deterministic) {
    const auto reg = Registry::load_default();
    const auto tools = reg.flat_toolset();
    EXPECT_EQ(render_system_prompt(capability_specs(), tools, default_protocol_doc()),
              render_system_prompt(capability_specs(), tools, default_protocol_doc()));
}

TEST(SystemPrompt, UnlistedCapabilityBinding) {
    const auto reg = Registry::load_default();
    const auto tools = reg.flat_toolset();
    std::vector<CapabilitySpec> caps(capability_specs().begin(), capability_specs().begin() + 2);
    try {
        render_system_prompt(caps, tools, default_protocol_doc());
        FAIL();
    } catch (const CapabilityError& e) {
        EXPECT_EQ(e.kind(), CapabilityErrorKind::UnknownCapabilityBinding);
    }
}

TEST(SystemPrompt, FlatHasNoCapabilityStage) {
    const auto reg = Registry::load_default();
    const auto tools = reg.flat_toolset();
    const auto prompt = render_flat_system_prompt(tools, flat_protocol_doc());
    EXPECT_EQ(prompt.find("<cap>"), std::string::npos);
    EXPECT_EQ(count(prompt, "\n## "), 0u);
    for (const auto& t : tools) EXPECT_NE(prompt.find("- " + t.name + ": "), std::string::npos);
}
