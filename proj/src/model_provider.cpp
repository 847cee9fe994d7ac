// SPDX-License-Identifier: Apache-2.0
#include "caporch/model_provider.hpp"

#include <cmath>
#include <fstream>

#include <spdlog/spdlog.h>

#include "caporch/http_client.hpp"
#include "caporch/util.hpp"

namespace caporch {

using nlohmann::json;

std::size_t context_budget(const ProviderInfo& info, double fraction) {
    return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(info.max_context_tokens)));
}

std::string_view to_string(ProviderErrorKind k) {
    switch (k) {
        case ProviderErrorKind::Transport: return "Transport";
        case ProviderErrorKind::AuthFailure: return "AuthFailure";
        case ProviderErrorKind::ScriptExhausted: return "ScriptExhausted";
        case ProviderErrorKind::ScriptMismatch: return "ScriptMismatch";
        case ProviderErrorKind::BadResponse: return "BadResponse";
    }
    return "?";
}

ScriptedTranscript ScriptedTranscript::from_json(const json& doc) {
    ScriptedTranscript t;
    const json& entries = doc.is_array() ? doc : doc.at("entries");
    for (const auto& e : entries) {
        if (e.is_string()) {
            t.entries.push_back({std::nullopt, e.get<std::string>()});
            continue;
        }
        TranscriptEntry entry;
        entry.response = e.at("response").get<std::string>();
        if (e.contains("expected_context_digest") && !e["expected_context_digest"].is_null()) {
            entry.expected_context_digest = e["expected_context_digest"].get<std::string>();
        }
        t.entries.push_back(std::move(entry));
    }
    return t;
}

json ScriptedTranscript::to_json() const {
    json out = json::array();
    for (const auto& e : entries) {
        json entry = {{"response", e.response}};
        if (e.expected_context_digest) entry["expected_context_digest"] = *e.expected_context_digest;
        out.push_back(std::move(entry));
    }
    return {{"entries", out}};
}

std::map<std::string, ScriptedTranscript> load_transcripts(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open transcripts " + path.string());
    std::map<std::string, ScriptedTranscript> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        try {
            const auto doc = json::parse(line);
            out[doc.at("task_id").get<std::string>()] = ScriptedTranscript::from_json(doc);
        } catch (const json::exception& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

std::string resolve_placeholders(std::string_view response, const ProviderMessages& messages) {
    if (response.find("{{obs:") == std::string_view::npos) return std::string(response);
    const Message* latest = nullptr;
    for (auto it = messages.messages.rbegin(); it != messages.messages.rend(); ++it) {
        if (it->role != Role::User) continue;
        if (it->text.starts_with("[observation ") || it->text.starts_with("[protocol-error ")) {
            latest = &*it;
            break;
        }
    }
    auto lookup = [&](std::string_view key) -> std::string {
        if (latest == nullptr) return {};
        for (const auto& line : split(latest->text, '\n')) {
            const auto colon = line.find(": ");
            if (colon != std::string::npos && line.substr(0, colon) == key) return line.substr(colon + 2);
        }
        return {};
    };
    std::string out;
    std::size_t pos = 0;
    while (true) {
        const auto open = response.find("{{obs:", pos);
        if (open == std::string_view::npos) break;
        const auto close = response.find("}}", open);
        if (close == std::string_view::npos) break;
        out.append(response.substr(pos, open - pos));
        out += lookup(response.substr(open + 6, close - open - 6));
        pos = close + 2;
    }
    out.append(response.substr(pos));
    return out;
}

ScriptedProvider::ScriptedProvider(ScriptedTranscript transcript, ProviderInfo info)
    : transcript_(std::move(transcript)), info_(std::move(info)) {}

std::string ScriptedProvider::complete(const ProviderMessages& messages, const DecodingParams&) {
    std::lock_guard lock(mutex_);
    if (cursor_ >= transcript_.entries.size()) {
        throw ProviderError(ProviderErrorKind::ScriptExhausted,
                            "transcript exhausted after " + std::to_string(cursor_) + " entries");
    }
    const auto& entry = transcript_.entries[cursor_];
    if (entry.expected_context_digest) {
        const auto actual = messages.digest();
        if (actual != *entry.expected_context_digest) {
            throw ProviderError(ProviderErrorKind::ScriptMismatch,
                                "context digest mismatch at entry " + std::to_string(cursor_ + 1) +
                                    ": expected " + *entry.expected_context_digest + ", got " + actual);
        }
    }
    ++cursor_;
    return resolve_placeholders(entry.response, messages);
}

std::size_t ScriptedProvider::consumed() const {
    std::lock_guard lock(mutex_);
    return cursor_;
}

HttpChatProvider::HttpChatProvider(HttpProviderConfig config, std::shared_ptr<const ImageStore> images)
    : config_(std::move(config)), images_(std::move(images)) {}

ProviderInfo HttpChatProvider::info() const { return {config_.name, config_.max_context_tokens}; }

json HttpChatProvider::build_request(const ProviderMessages& messages, const DecodingParams& decoding) const {
    json msgs = json::array();
    for (const auto& m : messages.messages) {
        if (m.image_ids.empty()) {
            msgs.push_back({{"role", std::string(to_string(m.role))}, {"content", m.text}});
            continue;
        }
        json parts = json::array();
        if (!m.text.empty()) parts.push_back({{"type", "text"}, {"text", m.text}});
        for (const auto& id : m.image_ids) {
            std::string url;
            if (config_.image_transport == HttpProviderConfig::ImageTransport::Url) {
                url = config_.image_url_prefix + id + ".png";
            } else {
                if (!images_) throw ProviderError(ProviderErrorKind::Transport, "no image store for inline images");
                url = "data:image/png;base64," + base64_encode(images_->bytes(id));
            }
            parts.push_back({{"type", "image_url"}, {"image_url", {{"url", url}}}});
        }
        msgs.push_back({{"role", std::string(to_string(m.role))}, {"content", parts}});
    }
    return {{"model", config_.model},
            {"messages", msgs},
            {"temperature", decoding.temperature},
            {"top_p", decoding.top_p},
            {"max_tokens", decoding.max_output}};
}

std::string HttpChatProvider::redact(std::string text) const {
    if (config_.api_key.empty()) return text;
    std::size_t pos = 0;
    while ((pos = text.find(config_.api_key, pos)) != std::string::npos) {
        text.replace(pos, config_.api_key.size(), "[redacted]");
        pos += 10;
    }
    return text;
}

std::string HttpChatProvider::complete(const ProviderMessages& messages, const DecodingParams& decoding) {
    http::Request req;
    req.method = "POST";
    req.base_url = config_.base_url;
    req.path = "/chat/completions";
    req.body = build_request(messages, decoding).dump();
    req.timeout_ms = config_.timeout_ms;
    if (!config_.api_key.empty()) req.headers["Authorization"] = "Bearer " + config_.api_key;
    spdlog::debug("{} request: {}", config_.name, redact(req.body.substr(0, 2000)));

    http::Response resp;
    try {
        resp = http::send(req);
    } catch (const http::HttpError& e) {
        throw ProviderError(ProviderErrorKind::Transport, redact(e.what()));
    }
    spdlog::debug("{} response {}: {}", config_.name, resp.status, redact(resp.body.substr(0, 2000)));
    if (resp.status == 401 || resp.status == 403) {
        throw ProviderError(ProviderErrorKind::AuthFailure,
                            "provider rejected credentials (HTTP " + std::to_string(resp.status) + ")");
    }
    if (resp.status == 429 || resp.status >= 500) {
        throw ProviderError(ProviderErrorKind::Transport, "HTTP " + std::to_string(resp.status));
    }
    if (resp.status < 200 || resp.status >= 300) {
        throw ProviderError(ProviderErrorKind::BadResponse,
                            "HTTP " + std::to_string(resp.status) + ": " + redact(resp.body.substr(0, 200)));
    }
    const auto doc = json::parse(resp.body, nullptr, false);
    if (doc.is_discarded() || !doc.contains("choices") || !doc["choices"].is_array() ||
        doc["choices"].empty()) {
        throw ProviderError(ProviderErrorKind::BadResponse, "response has no choices");
    }
    const auto& choice = doc["choices"][0];
    const json msg = choice.is_object() ? choice.value("message", json::object()) : json::object();
    if (!msg.is_object() || !msg.contains("content") || !msg["content"].is_string()) {
        throw ProviderError(ProviderErrorKind::BadResponse, "response has no text content");
    }
    return msg["content"].get<std::string>();
}

}  // namespace caporch
