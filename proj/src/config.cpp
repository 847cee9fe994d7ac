// SPDX-License-Identifier: Apache-2.0
#include "caporch/config.hpp"

#include <cstdlib>
#include <fstream>
#include <random>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "caporch/util.hpp"

namespace caporch {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(ConfigErrorKind k) {
    switch (k) {
        case ConfigErrorKind::ConfigParseError: return "ConfigParseError";
        case ConfigErrorKind::MissingEnvVar: return "MissingEnvVar";
        case ConfigErrorKind::PrecedenceConflict: return "PrecedenceConflict";
    }
    return "?";
}

std::string interpolate_env(const std::string& text) {
    std::string out;
    std::size_t i = 0;
    while (i < text.size()) {
        const std::size_t open = text.find("${", i);
        if (open == std::string::npos) break;
        const std::size_t close = text.find('}', open + 2);
        if (close == std::string::npos) break;
        out.append(text, i, open - i);
        const std::string name = text.substr(open + 2, close - open - 2);
        const char* value = std::getenv(name.c_str());
        if (value == nullptr) {
            throw ConfigError(ConfigErrorKind::MissingEnvVar, name, "environment variable '" + name + "' is not set");
        }
        out += value;
        i = close + 1;
    }
    out.append(text, i, std::string::npos);
    return out;
}

namespace {

[[noreturn]] void parse_error(const std::string& where, const std::string& detail) {
    throw ConfigError(ConfigErrorKind::ConfigParseError, where, detail);
}

std::string raw_string(const json& doc, const std::string& key, const std::string& where) {
    if (!doc.contains(key) || !doc[key].is_string()) parse_error(where + "/" + key, "expected a string");
    return doc[key].get<std::string>();
}

std::string env_string(const json& doc, const std::string& key, const std::string& where) {
    return interpolate_env(raw_string(doc, key, where));
}

template <typename T>
T number_or(json& doc, const std::string& key, T fallback, const std::string& where) {
    if (!doc.contains(key)) {
        doc[key] = fallback;
        return fallback;
    }
    if (!doc[key].is_number()) parse_error(where + "/" + key, "expected a number");
    return doc[key].get<T>();
}

fs::path resolve_path(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

fs::path existing_file(const fs::path& base, const std::string& p, const std::string& where) {
    const fs::path path = resolve_path(base, p);
    if (!fs::exists(path)) parse_error(where, "file not found: " + path.string());
    return path;
}

ProviderConfig provider_from_json(const std::string& name, json& doc, const fs::path& base, const std::string& where) {
    if (!doc.is_object()) parse_error(where, "expected an object");
    ProviderConfig p;
    p.name = name;
    const std::string kind = raw_string(doc, "kind", where);
    if (kind == "scripted") {
        p.kind = ProviderConfig::Kind::Scripted;
        p.transcripts = existing_file(base, env_string(doc, "transcripts", where), where + "/transcripts");
        p.max_context_tokens = number_or<std::size_t>(doc, "max_context_tokens", kDefaultMaxContextTokens, where);
    } else if (kind == "openai_chat") {
        p.kind = ProviderConfig::Kind::OpenAIChat;
        auto& h = p.http;
        h.name = name;
        h.base_url = env_string(doc, "base_url", where);
        h.model = env_string(doc, "model", where);
        if (doc.contains("api_key")) {
            const std::string raw = raw_string(doc, "api_key", where);
            if (raw.find("${") == std::string::npos) {
                spdlog::warn("{}/api_key holds a literal secret; use an ${{ENV_VAR}} reference instead", where);
            }
            h.api_key = interpolate_env(raw);
        }
        h.max_context_tokens = number_or<std::size_t>(doc, "max_context_tokens", kDefaultMaxContextTokens, where);
        p.max_context_tokens = h.max_context_tokens;
        if (!doc.contains("image_transport")) doc["image_transport"] = "inline";
        const std::string transport = raw_string(doc, "image_transport", where);
        if (transport == "inline") {
            h.image_transport = HttpProviderConfig::ImageTransport::Inline;
        } else if (transport == "url") {
            h.image_transport = HttpProviderConfig::ImageTransport::Url;
            h.image_url_prefix = env_string(doc, "image_url_prefix", where);
        } else {
            parse_error(where + "/image_transport", "expected \"inline\" or \"url\"");
        }
        h.timeout_ms = number_or<int>(doc, "timeout_ms", 120000, where);
    } else {
        parse_error(where + "/kind", "unknown provider kind '" + kind + "' (scripted, openai_chat)");
    }
    return p;
}

void check_provider(const AppConfig& cfg, const std::string& name, const std::string& where) {
    if (!cfg.providers.contains(name)) {
        throw ConfigError(ConfigErrorKind::PrecedenceConflict, where, "override names unknown provider '" + name + "'");
    }
}

void build_routing(AppConfig& cfg, const json& routing, const Registry& registry) {
    std::map<std::string, std::string> tool_level;
    std::map<Capability, std::string> cap_level;
    const json overrides = routing.value("overrides", json::array());
    if (!overrides.is_array()) parse_error("/routing/overrides", "expected an array");
    for (std::size_t i = 0; i < overrides.size(); ++i) {
        const std::string where = "/routing/overrides/" + std::to_string(i);
        const json& o = overrides[i];
        if (!o.is_object()) parse_error(where, "expected an object");
        const std::string provider = raw_string(o, "provider", where);
        check_provider(cfg, provider, where);
        const bool has_tool = o.contains("tool");
        const bool has_cap = o.contains("capability");
        if (has_tool == has_cap) parse_error(where, "an override names exactly one of \"tool\" or \"capability\"");
        if (has_tool) {
            const std::string tool = raw_string(o, "tool", where);
            if (!registry.find(tool)) parse_error(where + "/tool", "unknown tool '" + tool + "'");
            if (tool_level.contains(tool)) {
                throw ConfigError(ConfigErrorKind::PrecedenceConflict, where,
                                  "tool '" + tool + "' is overridden more than once");
            }
            tool_level[tool] = provider;
        } else {
            const std::string name = raw_string(o, "capability", where);
            const auto cap = capability_from_short_name(name);
            if (!cap) parse_error(where + "/capability", "unknown capability '" + name + "'");
            if (cap_level.contains(*cap)) {
                throw ConfigError(ConfigErrorKind::PrecedenceConflict, where,
                                  "capability '" + name + "' is overridden more than once");
            }
            cap_level[*cap] = provider;
        }
    }
    for (const auto& tool : registry.flat_toolset()) {
        const auto t = tool_level.find(tool.name);
        const auto c = cap_level.find(tool.capability);
        if (t != tool_level.end()) {
            if (c != cap_level.end() && c->second != t->second) {
                spdlog::info("routing: tool override '{}' -> {} wins over capability override {} -> {}", tool.name,
                             t->second, short_name(tool.capability), c->second);
            }
            cfg.routing[tool.name] = {t->second, "tool"};
        } else if (c != cap_level.end()) {
            cfg.routing[tool.name] = {c->second, "capability"};
        } else {
            cfg.routing[tool.name] = {cfg.global_provider, "global"};
        }
    }
}

}  // namespace

AppConfig config_from_json(const json& raw_in, const fs::path& base_dir) {
    if (!raw_in.is_object()) parse_error("/", "config must be a JSON object");
    json raw = raw_in;
    AppConfig cfg;
    cfg.base_dir = base_dir;

    json& providers = raw["providers"];
    if (!providers.is_object() || providers.empty()) parse_error("/providers", "at least one provider is required");
    for (auto it = providers.begin(); it != providers.end(); ++it) {
        cfg.providers[it.key()] = provider_from_json(it.key(), it.value(), base_dir, "/providers/" + it.key());
    }

    if (!raw.contains("registry")) raw["registry"] = (fs::path(CAPORCH_DATA_DIR) / "registry.json").string();
    cfg.registry_path = existing_file(base_dir, env_string(raw, "registry", ""), "/registry");
    Registry registry;
    try {
        registry = Registry::load(cfg.registry_path);
    } catch (const std::exception& e) {
        parse_error("/registry", e.what());
    }
    if (raw.contains("aliases")) cfg.aliases_path = existing_file(base_dir, env_string(raw, "aliases", ""), "/aliases");

    if (!raw.contains("routing")) {
        if (cfg.providers.size() != 1) parse_error("/routing", "routing.global is required with several providers");
        raw["routing"] = {{"global", cfg.providers.begin()->first}};
    }
    json& routing = raw["routing"];
    if (!routing.is_object()) parse_error("/routing", "expected an object");
    if (!routing.contains("global")) {
        if (cfg.providers.size() != 1) parse_error("/routing/global", "required with several providers");
        routing["global"] = cfg.providers.begin()->first;
    }
    cfg.global_provider = raw_string(routing, "global", "/routing");
    if (!cfg.providers.contains(cfg.global_provider)) {
        parse_error("/routing/global", "unknown provider '" + cfg.global_provider + "'");
    }
    if (!routing.contains("overrides")) routing["overrides"] = json::array();
    build_routing(cfg, routing, registry);

    if (!raw.contains("endpoints")) raw["endpoints"] = json::array();
    if (!raw["endpoints"].is_array()) parse_error("/endpoints", "expected an array");
    for (std::size_t i = 0; i < raw["endpoints"].size(); ++i) {
        json& e = raw["endpoints"][i];
        const std::string where = "/endpoints/" + std::to_string(i);
        if (!e.is_object()) parse_error(where, "expected an object");
        EndpointConfig ep;
        ep.name = raw_string(e, "name", where);
        ep.base_url = env_string(e, "base_url", where);
        ep.timeout_ms = number_or<int>(e, "timeout_ms", ep.timeout_ms, where);
        ep.max_payload_bytes = number_or<std::size_t>(e, "max_payload_bytes", ep.max_payload_bytes, where);
        if (e.contains("auth_env")) ep.auth_env = raw_string(e, "auth_env", where);
        cfg.endpoints.push_back(std::move(ep));
    }

    if (!raw.contains("run")) raw["run"] = json::object();
    try {
        cfg.run = RunConfig::from_json(raw["run"]);
    } catch (const std::exception& e) {
        parse_error("/run", e.what());
    }
    raw["run"] = cfg.run.to_json();

    if (!raw.contains("run_dir")) raw["run_dir"] = "runs";
    cfg.run_dir = resolve_path(base_dir, env_string(raw, "run_dir", ""));
    if (!raw.contains("log_level")) raw["log_level"] = "info";
    cfg.log_level = raw_string(raw, "log_level", "");
    if (spdlog::level::from_str(cfg.log_level) == spdlog::level::off && cfg.log_level != "off") {
        parse_error("/log_level", "unknown log level '" + cfg.log_level + "'");
    }

    cfg.canonical = std::move(raw);
    return cfg;
}

AppConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) parse_error(path.string(), "cannot open config file");
    json raw;
    try {
        raw = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        parse_error(path.string() + " (byte " + std::to_string(e.byte) + ")", e.what());
    }
    return config_from_json(raw, fs::absolute(path).parent_path());
}

const ProviderConfig& AppConfig::provider(const std::string& name) const {
    const auto it = providers.find(name);
    if (it == providers.end()) throw std::out_of_range("unknown provider '" + name + "'");
    return it->second;
}

json AppConfig::resolved_json(bool include_secrets) const {
    json provs = json::object();
    for (const auto& [name, p] : providers) {
        if (p.kind == ProviderConfig::Kind::Scripted) {
            provs[name] = {{"kind", "scripted"}, {"transcripts", p.transcripts.string()},
                           {"max_context_tokens", p.max_context_tokens}};
        } else {
            provs[name] = {
                {"kind", "openai_chat"},
                {"base_url", p.http.base_url},
                {"model", p.http.model},
                {"api_key", include_secrets ? p.http.api_key : (p.http.api_key.empty() ? "" : "<redacted>")},
                {"max_context_tokens", p.http.max_context_tokens},
                {"image_transport",
                 p.http.image_transport == HttpProviderConfig::ImageTransport::Inline ? "inline" : "url"},
                {"image_url_prefix", p.http.image_url_prefix},
                {"timeout_ms", p.http.timeout_ms},
            };
        }
    }
    json routes = json::object();
    for (const auto& [tool, r] : routing) routes[tool] = {{"provider", r.provider}, {"level", r.level}};
    json eps = json::array();
    for (const auto& e : endpoints) {
        eps.push_back({{"name", e.name}, {"base_url", e.base_url}, {"timeout_ms", e.timeout_ms},
                       {"max_payload_bytes", e.max_payload_bytes},
                       {"auth_env", e.auth_env ? json(*e.auth_env) : json(nullptr)}});
    }
    return {
        {"providers", provs},
        {"global_provider", global_provider},
        {"routing", routes},
        {"registry", registry_path.string()},
        {"aliases", aliases_path ? json(aliases_path->string()) : json(nullptr)},
        {"endpoints", eps},
        {"run", run.to_json()},
        {"run_dir", run_dir.string()},
        {"log_level", log_level},
    };
}

fs::path create_run_dir(const fs::path& root) {
    std::random_device rd;
    const std::string stamp = utc_timestamp();
    std::string compact;
    for (char c : stamp) {
        if (c != '-' && c != ':') compact += c;
    }
    for (int attempt = 0; attempt < 16; ++attempt) {
        const fs::path dir = root / fmt::format("{}-{:06x}", compact, rd() & 0xffffff);
        if (fs::exists(dir)) continue;
        fs::create_directories(dir / "traces");
        fs::create_directories(dir / "images");
        return dir;
    }
    throw std::runtime_error("cannot create a fresh run directory under " + root.string());
}

void write_snapshot(const AppConfig& config, const fs::path& run_dir) {
    std::ofstream out(run_dir / "config.snapshot", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write config snapshot in " + run_dir.string());
    out << config.canonical.dump(2) << '\n';
}

ProviderSet::ProviderSet(const AppConfig& config, std::shared_ptr<const ImageStore> images)
    : config_(config), images_(std::move(images)) {
    for (const auto& [name, p] : config.providers) {
        if (p.kind == ProviderConfig::Kind::Scripted) {
            transcripts_[name] = load_transcripts(p.transcripts);
        } else {
            live_[name] = std::make_shared<HttpChatProvider>(p.http, images_);
        }
    }
}

std::shared_ptr<ModelProvider> ProviderSet::for_task(const std::string& provider, const TaskInstance& task) const {
    const ProviderConfig& p = config_.provider(provider);
    if (p.kind == ProviderConfig::Kind::OpenAIChat) return live_.at(provider);
    const auto& scripts = transcripts_.at(provider);
    const auto it = scripts.find(task.id);
    if (it == scripts.end()) {
        throw std::runtime_error("provider '" + provider + "' has no transcript for task '" + task.id + "'");
    }
    return std::make_shared<ScriptedProvider>(it->second, ProviderInfo{provider, p.max_context_tokens});
}

std::shared_ptr<ModelProvider> ProviderSet::shared(const std::string& provider) const {
    const auto it = live_.find(provider);
    return it == live_.end() ? nullptr : it->second;
}

}  // namespace caporch
