// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <random>

#include "caporch/config.hpp"

using namespace caporch;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        std::random_device rd;
        path = fs::temp_directory_path() / ("caporch-config-" + std::to_string(rd()));
        fs::create_directories(path);
        std::ofstream(path / "transcripts.jsonl") << "";
    }
    ~TempDir() { fs::remove_all(path); }
};

json minimal() {
    return {{"providers", {{"scripted", {{"kind", "scripted"}, {"transcripts", "transcripts.jsonl"}}}}}};
}

json two_providers() {
    json j = minimal();
    j["providers"]["remote"] = {{"kind", "openai_chat"},
                                {"base_url", "http://localhost:9/v1"},
                                {"model", "m"},
                                {"api_key", "${CAPORCH_TEST_KEY}"}};
    j["routing"] = {{"global", "scripted"}};
    return j;
}

ConfigErrorKind config_error_of(const std::function<void()>& f, std::string* where = nullptr) {
    try {
        f();
    } catch (const ConfigError& e) {
        if (where) *where = e.where();
        return e.kind();
    }
    ADD_FAILURE() << "no ConfigError thrown";
    return ConfigErrorKind::ConfigParseError;
}

}  // namespace

TEST(Config, DefaultsFilledIn) {
    TempDir dir;
    const auto cfg = config_from_json(minimal(), dir.path);
    EXPECT_EQ(cfg.global_provider, "scripted");
    EXPECT_EQ(cfg.run, RunConfig{});
    EXPECT_EQ(cfg.run_dir, dir.path / "runs");
    EXPECT_EQ(cfg.log_level, "info");
    EXPECT_TRUE(cfg.endpoints.empty());
    EXPECT_EQ(cfg.provider("scripted").transcripts, dir.path / "transcripts.jsonl");
    EXPECT_EQ(cfg.provider("scripted").max_context_tokens, 128000u);
    EXPECT_EQ(cfg.routing.size(), 16u);
    for (const auto& [tool, route] : cfg.routing) EXPECT_EQ(route, (Route{"scripted", "global"})) << tool;
}

TEST(Config, CanonicalRoundTrip) {
    TempDir dir;
    ::setenv("CAPORCH_TEST_KEY", "sk-round-trip", 1);
    json j = two_providers();
    j["routing"]["overrides"] = json::array({{{"capability", "Perception"}, {"provider", "remote"}}});
    j["endpoints"] = json::array({{{"name", "vision"}, {"base_url", "http://127.0.0.1:8765"}, {"auth_env", "VISION_TOKEN"}}});
    const auto a = config_from_json(j, dir.path);
    const auto b = config_from_json(a.canonical, dir.path);
    EXPECT_EQ(a.canonical, b.canonical);
    EXPECT_EQ(a.resolved_json(true), b.resolved_json(true));
    // Env references stay verbatim in the canonical form.
    EXPECT_EQ(a.canonical["providers"]["remote"]["api_key"], "${CAPORCH_TEST_KEY}");
    EXPECT_EQ(a.canonical["endpoints"][0]["timeout_ms"], 30000);
}

TEST(Config, MissingEnvVar) {
    TempDir dir;
    ::unsetenv("CAPORCH_TEST_KEY");
    std::string where;
    EXPECT_EQ(config_error_of([&] { config_from_json(two_providers(), dir.path); }, &where), ConfigErrorKind::MissingEnvVar);
    EXPECT_EQ(where, "CAPORCH_TEST_KEY");
    EXPECT_EQ(config_error_of([] { interpolate_env("x ${CAPORCH_SURELY_UNSET_VAR} y"); }), ConfigErrorKind::MissingEnvVar);
    ::setenv("CAPORCH_TEST_KEY", "v", 1);
    EXPECT_EQ(interpolate_env("a${CAPORCH_TEST_KEY}b${CAPORCH_TEST_KEY}"), "avbv");
    EXPECT_EQ(interpolate_env("no refs"), "no refs");
}

TEST(Config, ToolOverrideBeatsCapabilityOverride) {
    TempDir dir;
    ::setenv("CAPORCH_TEST_KEY", "k", 1);
    json j = two_providers();
    j["providers"]["third"] = {{"kind", "scripted"}, {"transcripts", "transcripts.jsonl"}};
    j["routing"]["overrides"] = json::array({{{"capability", "Perception"}, {"provider", "remote"}},
                                             {{"tool", "ocr"}, {"provider", "third"}}});
    const auto cfg = config_from_json(j, dir.path);
    EXPECT_EQ(cfg.routing.at("ocr"), (Route{"third", "tool"}));
    EXPECT_EQ(cfg.routing.at("region_caption"), (Route{"remote", "capability"}));
    EXPECT_EQ(cfg.routing.at("crop"), (Route{"scripted", "global"}));
}

TEST(Config, PrecedenceConflicts) {
    TempDir dir;
    ::setenv("CAPORCH_TEST_KEY", "k", 1);
    json dup = two_providers();
    dup["routing"]["overrides"] = json::array({{{"tool", "ocr"}, {"provider", "remote"}},
                                               {{"tool", "ocr"}, {"provider", "scripted"}}});
    EXPECT_EQ(config_error_of([&] { config_from_json(dup, dir.path); }), ConfigErrorKind::PrecedenceConflict);
    json cap = two_providers();
    cap["routing"]["overrides"] = json::array({{{"capability", "Logic"}, {"provider", "remote"}},
                                               {{"capability", "logic"}, {"provider", "scripted"}}});
    EXPECT_EQ(config_error_of([&] { config_from_json(cap, dir.path); }), ConfigErrorKind::PrecedenceConflict);
    json unknown = two_providers();
    unknown["routing"]["overrides"] = json::array({{{"tool", "ocr"}, {"provider", "nobody"}}});
    EXPECT_EQ(config_error_of([&] { config_from_json(unknown, dir.path); }), ConfigErrorKind::PrecedenceConflict);
}

TEST(Config, ParseErrors) {
    TempDir dir;
    auto kind_of = [&](json j) { return config_error_of([&] { config_from_json(j, dir.path); }); };
    EXPECT_EQ(kind_of(json::array()), ConfigErrorKind::ConfigParseError);
    EXPECT_EQ(kind_of({{"providers", json::object()}}), ConfigErrorKind::ConfigParseError);
    json bad_kind = minimal();
    bad_kind["providers"]["scripted"]["kind"] = "carrier-pigeon";
    EXPECT_EQ(kind_of(bad_kind), ConfigErrorKind::ConfigParseError);
    json missing_file = minimal();
    missing_file["providers"]["scripted"]["transcripts"] = "absent.jsonl";
    EXPECT_EQ(kind_of(missing_file), ConfigErrorKind::ConfigParseError);
    json bad_run = minimal();
    bad_run["run"] = {{"max_turn", 0}};
    EXPECT_EQ(kind_of(bad_run), ConfigErrorKind::ConfigParseError);
    json bad_level = minimal();
    bad_level["log_level"] = "loud";
    EXPECT_EQ(kind_of(bad_level), ConfigErrorKind::ConfigParseError);
    json both = minimal();
    both["routing"] = {{"global", "scripted"}, {"overrides", json::array({{{"tool", "ocr"}, {"capability", "Logic"}, {"provider", "scripted"}}})}};
    EXPECT_EQ(kind_of(both), ConfigErrorKind::ConfigParseError);
    json no_global = two_providers();
    no_global["routing"].erase("global");
    ::setenv("CAPORCH_TEST_KEY", "k", 1);
    EXPECT_EQ(kind_of(no_global), ConfigErrorKind::ConfigParseError);
}

TEST(Config, CommentsAllowedInFiles) {
    TempDir dir;
    std::ofstream(dir.path / "config.json") << "// leading comment\n{\n  \"providers\": {\n"
                                               "    // the only provider\n"
                                               "    \"scripted\": {\"kind\": \"scripted\", \"transcripts\": \"transcripts.jsonl\"}\n"
                                               "  },\n  \"run\": {\"max_turn\": 4} /* trailing */\n}\n";
    const auto cfg = load_config(dir.path / "config.json");
    EXPECT_EQ(cfg.run.max_turn, 4);
    EXPECT_EQ(cfg.base_dir, fs::absolute(dir.path));

    std::ofstream(dir.path / "broken.json") << "{ \"providers\": ";
    EXPECT_EQ(config_error_of([&] { load_config(dir.path / "broken.json"); }), ConfigErrorKind::ConfigParseError);
    EXPECT_EQ(config_error_of([&] { load_config(dir.path / "absent.json"); }), ConfigErrorKind::ConfigParseError);
}

TEST(Config, ShippedConfigsLoad) {
    for (const auto* name : {"starter", "ablation", "fixtures/maze_case"}) {
        const auto cfg = load_config(fs::path(CAPORCH_DATA_DIR) / name / "config.json");
        EXPECT_FALSE(cfg.providers.empty()) << name;
        EXPECT_NO_THROW(cfg.run.validate()) << name;
    }
}

TEST(Config, SecretsHiddenInResolvedView) {
    TempDir dir;
    ::setenv("CAPORCH_TEST_KEY", "sk-very-secret", 1);
    const auto cfg = config_from_json(two_providers(), dir.path);
    EXPECT_EQ(cfg.provider("remote").http.api_key, "sk-very-secret");
    EXPECT_EQ(cfg.resolved_json().dump().find("sk-very-secret"), std::string::npos);
    EXPECT_EQ(cfg.canonical.dump().find("sk-very-secret"), std::string::npos);
    EXPECT_NE(cfg.resolved_json(true).dump().find("sk-very-secret"), std::string::npos);
}

TEST(Config, RunDirAndSnapshot) {
    TempDir dir;
    const auto cfg = config_from_json(minimal(), dir.path);
    const auto a = create_run_dir(dir.path / "runs");
    const auto b = create_run_dir(dir.path / "runs");
    EXPECT_NE(a, b);
    EXPECT_TRUE(fs::is_directory(a / "traces"));
    EXPECT_TRUE(fs::is_directory(a / "images"));
    write_snapshot(cfg, a);
    std::ifstream in(a / "config.snapshot");
    const json snap = json::parse(in);
    EXPECT_EQ(snap, cfg.canonical);
    EXPECT_EQ(config_from_json(snap, dir.path).canonical, cfg.canonical);
}

TEST(ProviderSet, ScriptedPerTask) {
    TempDir dir;
    std::ofstream(dir.path / "transcripts.jsonl") << R"({"task_id": "a", "entries": [{"response": "<answer>1</answer>"}]})"
                                                  << "\n";
    const auto cfg = config_from_json(minimal(), dir.path);
    ProviderSet set(cfg, nullptr);
    TaskInstance t;
    t.id = "a";
    auto p = set.for_task("scripted", t);
    ASSERT_NE(p, nullptr);
    EXPECT_EQ(p->complete({{{Role::System, "s", {}}}}, {}), "<answer>1</answer>");
    EXPECT_EQ(set.shared("scripted"), nullptr);
    t.id = "unknown";
    EXPECT_THROW(set.for_task("scripted", t), std::runtime_error);
}
