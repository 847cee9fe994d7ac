// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "caporch/error.hpp"
#include "caporch/model_provider.hpp"
#include "caporch/registry.hpp"
#include "caporch/remote_tools.hpp"
#include "caporch/run_config.hpp"
#include "caporch/task.hpp"

namespace caporch {

enum class ConfigErrorKind { ConfigParseError, MissingEnvVar, PrecedenceConflict };
std::string_view to_string(ConfigErrorKind k);

class ConfigError : public KindedError<ConfigErrorKind> {
public:
    // `where` is a JSON-pointer-like location or the env var name.
    ConfigError(ConfigErrorKind kind, std::string where, const std::string& detail)
        : KindedError(kind, where.empty() ? detail : where + ": " + detail), where_(std::move(where)) {}
    const std::string& where() const { return where_; }

private:
    std::string where_;
};

struct ProviderConfig {
    enum class Kind { Scripted, OpenAIChat };
    std::string name;
    Kind kind = Kind::Scripted;
    std::filesystem::path transcripts;  // Scripted
    HttpProviderConfig http;            // OpenAIChat (api_key resolved)
    std::size_t max_context_tokens = kDefaultMaxContextTokens;
};

struct Route {
    std::string provider;
    std::string level;  // "tool", "capability" or "global"

    bool operator==(const Route&) const = default;
};

struct AppConfig {
    std::filesystem::path base_dir;
    std::map<std::string, ProviderConfig> providers;
    std::string global_provider;
    // Every registry tool -> provider, precedence tool > capability > global.
    std::map<std::string, Route> routing;
    std::filesystem::path registry_path;
    std::optional<std::filesystem::path> aliases_path;
    std::vector<EndpointConfig> endpoints;
    RunConfig run;
    std::filesystem::path run_dir;
    std::string log_level = "info";

    // The file as written (env references kept verbatim) with defaults filled in.
    // Loading it from the same base directory yields an identical config.
    nlohmann::json canonical;

    // Fully resolved view; secrets are replaced unless asked for.
    nlohmann::json resolved_json(bool include_secrets = false) const;

    const ProviderConfig& provider(const std::string& name) const;
};

// JSON with // comments allowed. Relative paths are resolved against the file's directory.
AppConfig load_config(const std::filesystem::path& path);
AppConfig config_from_json(const nlohmann::json& raw, const std::filesystem::path& base_dir);

// Replaces ${NAME} with the environment value. Throws ConfigError(MissingEnvVar).
std::string interpolate_env(const std::string& text);

// Creates runs/<timestamp-id>/{traces,images} under `root`.
std::filesystem::path create_run_dir(const std::filesystem::path& root);

// Writes config.snapshot into a run directory.
void write_snapshot(const AppConfig& config, const std::filesystem::path& run_dir);

// Builds provider instances for a loaded config.
class ProviderSet {
public:
    ProviderSet(const AppConfig& config, std::shared_ptr<const ImageStore> images);

    // A fresh adapter for one session (scripted providers pick the task's transcript).
    // Throws std::runtime_error when a scripted provider has no transcript for the task.
    std::shared_ptr<ModelProvider> for_task(const std::string& provider, const TaskInstance& task) const;
    // Shared adapter for model-backed tools; null for scripted providers.
    std::shared_ptr<ModelProvider> shared(const std::string& provider) const;

private:
    const AppConfig& config_;
    std::shared_ptr<const ImageStore> images_;
    std::map<std::string, std::map<std::string, ScriptedTranscript>> transcripts_;
    std::map<std::string, std::shared_ptr<ModelProvider>> live_;
};

}  // namespace caporch
