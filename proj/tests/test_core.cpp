// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "caporch/capability.hpp"
#include "caporch/messages.hpp"
#include "caporch/registry.hpp"
#include "caporch/run_config.hpp"
#include "caporch/util.hpp"

using namespace caporch;
using nlohmann::json;

namespace {

std::vector<std::string> names(const std::vector<ToolSpec>& tools) {
    std::vector<std::string> out;
    for (const auto& t : tools) out.push_back(t.name);
    return out;
}

}  // namespace

TEST(Util, Sha256KnownVector) {
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Util, Base64RoundTrip) {
    EXPECT_EQ(base64_encode("foobar"), "Zm9vYmFy");
    EXPECT_EQ(base64_decode("Zm9vYg=="), "foob");
    std::string bytes;
    for (int i = 0; i < 256; ++i) bytes.push_back(static_cast<char>(i));
    EXPECT_EQ(base64_decode(base64_encode(bytes)), bytes);
    EXPECT_THROW(base64_decode("!!!"), std::invalid_argument);
}

TEST(Util, SanitizeUtf8) {
    const std::string fffd = "\xEF\xBF\xBD";
    EXPECT_EQ(sanitize_utf8("plain"), "plain");
    EXPECT_EQ(sanitize_utf8("caf\xC3\xA9 \xF0\x9F\x99\x82"), "caf\xC3\xA9 \xF0\x9F\x99\x82");
    EXPECT_EQ(sanitize_utf8("a\xFF" "b"), "a" + fffd + "b");
    EXPECT_EQ(sanitize_utf8("\xC3"), fffd);                 // truncated
    EXPECT_EQ(sanitize_utf8("\xE0\x80\x80"), fffd + fffd + fffd);  // overlong
    EXPECT_EQ(sanitize_utf8("\xED\xA0\x80"), fffd + fffd + fffd);  // surrogate
    EXPECT_EQ(sanitize_utf8("\xF0\x9F\x99" "x"), fffd + "x");
}

TEST(Util, FormatNumberKeepsIntegralMarker) {
    EXPECT_EQ(format_number(6.0), "6.0");
    EXPECT_EQ(format_number(0.1), "0.1");
    EXPECT_EQ(format_number(-2.5), "-2.5");
}

TEST(Capability, CanonicalizeExactDisplayName) {
    const auto aliases = AliasTable::load_default();
    EXPECT_EQ(canonicalize_capability("Logical Programming Reasoning", aliases), Capability::Logic);
}

TEST(Capability, CanonicalizeCaseInsensitive) {
    const auto aliases = AliasTable::load_default();
    EXPECT_EQ(canonicalize_capability("spatial & geometric understanding", aliases), Capability::Spatial);
    EXPECT_EQ(canonicalize_capability("  PERCEPTION ", aliases), Capability::Perception);
}

TEST(Capability, CanonicalizeAlias) {
    const auto aliases = AliasTable::load_default();
    EXPECT_GT(aliases.version(), 0);
    EXPECT_EQ(canonicalize_capability("geometry", aliases), Capability::Spatial);
    EXPECT_EQ(canonicalize_capability("Marking", aliases), Capability::Augmentation);
}

TEST(Capability, UnknownCapabilityRejected) {
    const auto aliases = AliasTable::load_default();
    try {
        canonicalize_capability("telepathy", aliases);
        FAIL() << "expected UnknownCapability";
    } catch (const CapabilityError& e) {
        EXPECT_EQ(e.kind(), CapabilityErrorKind::UnknownCapability);
    }
    EXPECT_THROW(canonicalize_capability("", aliases), CapabilityError);
}

TEST(Capability, AliasTableRejectsBadTarget) {
    const json doc = {{"version", 1}, {"aliases", {{"mind reading", "Telepathy"}}}};
    try {
        AliasTable::from_json(doc);
        FAIL();
    } catch (const CapabilityError& e) {
        EXPECT_EQ(e.kind(), CapabilityErrorKind::AliasTableError);
    }
}

TEST(Capability, EveryShortNameRoundTrips) {
    for (auto c : kAllCapabilities) EXPECT_EQ(capability_from_short_name(short_name(c)), c);
    EXPECT_EQ(capability_specs().size(), 6u);
}

TEST(Registry, DefaultCatalogByCapability) {
    const auto reg = Registry::load_default();
    EXPECT_EQ(names(reg.tools_for(Capability::Spatial)),
              (std::vector<std::string>{"geometry_calculator", "geom_perp_intersect", "point_distance"}));
    EXPECT_EQ(names(reg.tools_for(Capability::Generation)),
              (std::vector<std::string>{"generate_image", "simplify_image"}));
    EXPECT_EQ(names(reg.tools_for(Capability::Transform)), (std::vector<std::string>{"crop", "sam"}));
}

TEST(Registry, PartitionProperty) {
    const auto reg = Registry::load_default();
    std::size_t sum = 0;
    std::set<std::string> from_caps;
    for (auto c : kAllCapabilities) {
        for (const auto& t : reg.tools_for(c)) {
            ++sum;
            EXPECT_EQ(t.capability, c);
            from_caps.insert(t.name);
        }
    }
    const auto flat = names(reg.flat_toolset());
    EXPECT_EQ(sum, flat.size());
    EXPECT_EQ(from_caps, std::set<std::string>(flat.begin(), flat.end()));
}

TEST(Registry, EmptyRegistry) {
    const Registry reg;
    EXPECT_TRUE(reg.flat_toolset().empty());
    EXPECT_TRUE(reg.tools_for(Capability::Logic).empty());
}

TEST(Registry, MlToolsAreRemote) {
    const auto reg = Registry::load_default();
    for (const char* name : {"ocr", "grounding_dino", "sam", "generate_image"}) {
        ASSERT_NE(reg.find(name), nullptr) << name;
        EXPECT_EQ(reg.find(name)->backend.kind, Backend::Kind::Remote) << name;
    }
    for (const auto& t : reg.flat_toolset()) {
        if (t.backend.kind != Backend::Kind::Remote) {
            EXPECT_EQ(t.backend.kind, Backend::Kind::Local) << t.name;
        }
    }
}

TEST(Registry, DuplicateToolRejected) {
    Registry reg;
    reg.add({"t", Capability::Logic, "", {}, false, Backend::local()});
    try {
        reg.add({"t", Capability::Spatial, "", {}, false, Backend::local()});
        FAIL();
    } catch (const RegistryError& e) {
        EXPECT_EQ(e.kind(), RegistryErrorKind::DuplicateTool);
    }
}

TEST(Registry, JsonRoundTrip) {
    const auto reg = Registry::load_default();
    const auto again = Registry::from_json(reg.to_json());
    EXPECT_EQ(again.to_json(), reg.to_json());
}

TEST(Registry, ValidateBindingAccepts) {
    const auto reg = Registry::load_default();
    ToolInvocation inv;
    inv.tool = "geometry_calculator";
    inv.declared_capability = Capability::Spatial;
    inv.arguments = {{"shape", "triangle"}, {"points", {{0, 0}, {3, 0}, {0, 4}}}};
    EXPECT_TRUE(reg.validate_binding(inv).ok());
}

TEST(Registry, ValidateBindingMismatch) {
    const auto reg = Registry::load_default();
    ToolInvocation inv;
    inv.tool = "crop";
    inv.declared_capability = Capability::Logic;
    inv.arguments = {{"rect", {0, 0, 4, 4}}};
    const auto v = reg.validate_binding(inv);
    ASSERT_FALSE(v.ok());
    EXPECT_EQ(v.rejection()->kind, RejectionKind::CapabilityMismatch);
    EXPECT_EQ(v.rejection()->expected, Capability::Transform);
    EXPECT_EQ(v.rejection()->declared, Capability::Logic);

    ValidationOptions flat;
    flat.enforce_capability = false;
    EXPECT_TRUE(reg.validate_binding(inv, flat).ok());
}

TEST(Registry, ValidateBindingUnknownTool) {
    const auto reg = Registry::load_default();
    ToolInvocation inv;
    inv.tool = "warp_reality";
    inv.declared_capability = Capability::Logic;
    const auto v = reg.validate_binding(inv);
    ASSERT_FALSE(v.ok());
    EXPECT_EQ(v.rejection()->kind, RejectionKind::UnknownTool);
}

TEST(Registry, ValidateBindingArguments) {
    const auto reg = Registry::load_default();
    ToolInvocation inv;
    inv.tool = "point_distance";
    inv.declared_capability = Capability::Spatial;
    inv.arguments = {{"p", {0, 0}}};
    auto v = reg.validate_binding(inv);
    ASSERT_FALSE(v.ok());
    EXPECT_EQ(v.rejection()->kind, RejectionKind::MissingArgument);
    EXPECT_EQ(v.rejection()->argument, "q");

    inv.arguments["q"] = "far away";
    v = reg.validate_binding(inv);
    ASSERT_FALSE(v.ok());
    EXPECT_EQ(v.rejection()->kind, RejectionKind::ArgumentTypeError);
}

TEST(Registry, ValidateBindingDisabled) {
    const auto reg = Registry::load_default();
    ToolInvocation inv;
    inv.tool = "eval_expression";
    inv.declared_capability = Capability::Logic;
    inv.arguments = {{"expr", "1+1"}};
    ValidationOptions opts;
    opts.disabled = {Capability::Logic};
    const auto v = reg.validate_binding(inv, opts);
    ASSERT_FALSE(v.ok());
    EXPECT_EQ(v.rejection()->kind, RejectionKind::CapabilityDisabled);
    EXPECT_EQ(names(reg.enabled_tools(opts.disabled)).size(), reg.size() - reg.tools_for(Capability::Logic).size());
}

TEST(Registry, ParamTypeConformance) {
    EXPECT_TRUE(conforms(json::array({1, 2}), ParamType::Point));
    EXPECT_FALSE(conforms(json::array({1, 2, 3}), ParamType::Point));
    EXPECT_TRUE(conforms(json::array({json::array({1, 2})}), ParamType::PointList));
    EXPECT_TRUE(conforms(json{{"x", 0}, {"y", 0}, {"w", 2}, {"h", 2}}, ParamType::Rect));
    EXPECT_TRUE(conforms(json::array({0, 0, 2, 2}), ParamType::Rect));
    EXPECT_TRUE(conforms(json::array({"#S", ".G"}), ParamType::Grid));
    EXPECT_TRUE(conforms("red", ParamType::Color));
    EXPECT_TRUE(conforms(json::array({255, 0, 0}), ParamType::Color));
    EXPECT_TRUE(conforms(3, ParamType::Integer));
    EXPECT_FALSE(conforms(3.5, ParamType::Integer));
    EXPECT_FALSE(conforms("3", ParamType::Number));
}

TEST(Registry, BackendParse) {
    EXPECT_EQ(Backend::parse("local"), Backend::local());
    EXPECT_EQ(Backend::parse("remote:vision"), Backend::remote("vision"));
    EXPECT_EQ(Backend::parse("model"), Backend::model());
    EXPECT_FALSE(Backend::parse("remote:").has_value());
    EXPECT_FALSE(Backend::parse("cloud").has_value());
    EXPECT_EQ(Backend::remote("vision").to_string(), "remote:vision");
}

TEST(RunConfig, Defaults) {
    const RunConfig c;
    EXPECT_EQ(c.max_turn, 10);
    EXPECT_DOUBLE_EQ(c.temperature, 0.3);
    EXPECT_DOUBLE_EQ(c.top_p, 1.0);
    EXPECT_DOUBLE_EQ(c.budget_fraction, 0.6);
    EXPECT_EQ(RunConfig::from_json(json::object()), c);
}

TEST(RunConfig, RoundTripAndValidation) {
    RunConfig c;
    c.max_turn = 4;
    c.mode = RunMode::without({Capability::Logic, Capability::Spatial});
    EXPECT_EQ(RunConfig::from_json(c.to_json()), c);
    EXPECT_THROW(RunConfig::from_json(json{{"max_turn", 0}}), std::invalid_argument);
    EXPECT_THROW(RunConfig::from_json(json{{"budget_fraction", 1.5}}), std::invalid_argument);
    EXPECT_THROW(RunConfig::from_json(json{{"top_p", 0.0}}), std::invalid_argument);
}

TEST(RunMode, LabelsRoundTrip) {
    for (const auto& m : {RunMode::full(), RunMode::flat(), RunMode::without({Capability::Logic}),
                          RunMode::without({Capability::Spatial, Capability::Logic})}) {
        EXPECT_EQ(RunMode::parse(m.label()), m) << m.label();
    }
    EXPECT_EQ(RunMode::without({Capability::Logic}).label(), "drop:Logic");
    EXPECT_EQ(RunMode::parse("drop:logic"), RunMode::without({Capability::Logic}));
    EXPECT_THROW(RunMode::parse("drop:Telepathy"), std::invalid_argument);
    EXPECT_THROW(RunMode::parse("bogus"), std::invalid_argument);
}

TEST(Messages, DigestIsStableAndSensitive) {
    ProviderMessages a{{{Role::System, "sys", {}}, {Role::User, "hi", {"img1"}}}};
    ProviderMessages b = a;
    EXPECT_EQ(a.digest(), b.digest());
    b.messages[1].image_ids[0] = "img2";
    EXPECT_NE(a.digest(), b.digest());
}
