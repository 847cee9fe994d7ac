// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "caporch/error.hpp"
#include "caporch/image.hpp"
#include "caporch/messages.hpp"

namespace caporch {

struct DecodingParams {
    double temperature = 0.3;
    double top_p = 1.0;
    int max_output = 4096;
};

struct ProviderInfo {
    std::string name;
    std::size_t max_context_tokens = 0;
};

inline constexpr std::size_t kDefaultMaxContextTokens = 128000;

// floor(fraction * max_context_tokens)
std::size_t context_budget(const ProviderInfo& info, double fraction);

enum class ProviderErrorKind { Transport, AuthFailure, ScriptExhausted, ScriptMismatch, BadResponse };
std::string_view to_string(ProviderErrorKind k);
using ProviderError = KindedError<ProviderErrorKind>;

// The reasoning model M: one completion per turn.
class ModelProvider {
public:
    virtual ~ModelProvider() = default;
    virtual std::string complete(const ProviderMessages& messages, const DecodingParams& decoding) = 0;
    virtual ProviderInfo info() const = 0;
};

struct TranscriptEntry {
    std::optional<std::string> expected_context_digest;
    std::string response;
};

struct ScriptedTranscript {
    std::vector<TranscriptEntry> entries;

    // {"entries": [{"response": "...", "expected_context_digest": "..."}]} or a
    // bare array of response strings.
    static ScriptedTranscript from_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;
};

// JSON-lines file of {"task_id": ..., "entries": [...]}.
std::map<std::string, ScriptedTranscript> load_transcripts(const std::filesystem::path& path);

// Replaces {{obs:key}} with the value of the "key: value" line in the most recent
// observation or protocol-error message of `messages` (empty when absent).
std::string resolve_placeholders(std::string_view response, const ProviderMessages& messages);

// Deterministic stand-in for M replaying a transcript strictly in order.
class ScriptedProvider : public ModelProvider {
public:
    explicit ScriptedProvider(ScriptedTranscript transcript,
                              ProviderInfo info = {"scripted", kDefaultMaxContextTokens});

    std::string complete(const ProviderMessages& messages, const DecodingParams& decoding) override;
    ProviderInfo info() const override { return info_; }

    std::size_t consumed() const;

private:
    ScriptedTranscript transcript_;
    ProviderInfo info_;
    mutable std::mutex mutex_;
    std::size_t cursor_ = 0;
};

struct HttpProviderConfig {
    std::string name = "openai";
    std::string base_url;  // e.g. https://api.openai.com/v1
    std::string model;
    std::string api_key;   // resolved secret, never serialized
    std::size_t max_context_tokens = kDefaultMaxContextTokens;
    enum class ImageTransport { Inline, Url } image_transport = ImageTransport::Inline;
    std::string image_url_prefix;  // Url transport: prefix + id + ".png"
    int timeout_ms = 120000;
};

// Chat-completions style adapter.
class HttpChatProvider : public ModelProvider {
public:
    HttpChatProvider(HttpProviderConfig config, std::shared_ptr<const ImageStore> images);

    std::string complete(const ProviderMessages& messages, const DecodingParams& decoding) override;
    ProviderInfo info() const override;

    nlohmann::json build_request(const ProviderMessages& messages, const DecodingParams& decoding) const;

private:
    std::string redact(std::string text) const;

    HttpProviderConfig config_;
    std::shared_ptr<const ImageStore> images_;
};

}  // namespace caporch
