// SPDX-License-Identifier: Apache-2.0
#include "caporch/remote_tools.hpp"

#include <cstdlib>

#include <spdlog/spdlog.h>

#include "caporch/http_client.hpp"
#include "caporch/util.hpp"

namespace caporch {

using nlohmann::json;

std::string_view to_string(RemoteErrorKind k) {
    switch (k) {
        case RemoteErrorKind::Timeout: return "Timeout";
        case RemoteErrorKind::Unreachable: return "Unreachable";
        case RemoteErrorKind::HttpStatus: return "HttpStatus";
        case RemoteErrorKind::MalformedResponse: return "MalformedResponse";
        case RemoteErrorKind::PayloadTooLarge: return "PayloadTooLarge";
    }
    return "?";
}

namespace {

http::Response send(const EndpointConfig& endpoint, http::Request req) {
    req.base_url = endpoint.base_url;
    req.timeout_ms = endpoint.timeout_ms;
    if (endpoint.auth_env) {
        if (const char* token = std::getenv(endpoint.auth_env->c_str())) {
            req.headers["Authorization"] = std::string("Bearer ") + token;
        }
    }
    try {
        return http::send(req);
    } catch (const http::HttpError& e) {
        switch (e.kind()) {
            case http::FailureKind::Timeout: throw RemoteError(RemoteErrorKind::Timeout, e.what());
            default: throw RemoteError(RemoteErrorKind::Unreachable, e.what());
        }
    }
}

void check_status(const http::Response& resp) {
    if (resp.status < 200 || resp.status >= 300) {
        throw RemoteError(RemoteErrorKind::HttpStatus,
                          "HTTP " + std::to_string(resp.status) + ": " + resp.body.substr(0, 200), resp.status);
    }
}

}  // namespace

json build_tool_request(const json& arguments, std::span<const std::string> image_ids, const ImageStore& store) {
    json images = json::array();
    for (const auto& id : image_ids) images.push_back({{"id", id}, {"data", base64_encode(store.bytes(id))}});
    return {{"arguments", arguments.is_null() ? json::object() : arguments}, {"images", images}};
}

ToolOutput call_remote_tool(const EndpointConfig& endpoint, const std::string& tool, const json& arguments,
                            std::span<const std::string> image_ids, ImageStore& store) {
    http::Request req;
    req.method = "POST";
    req.path = "/tools/" + tool;
    req.body = build_tool_request(arguments, image_ids, store).dump();
    if (req.body.size() > endpoint.max_payload_bytes) {
        throw RemoteError(RemoteErrorKind::PayloadTooLarge,
                          "request of " + std::to_string(req.body.size()) + " bytes exceeds limit of " +
                              std::to_string(endpoint.max_payload_bytes));
    }
    const auto resp = send(endpoint, std::move(req));
    check_status(resp);
    const auto doc = json::parse(resp.body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("text") || !doc["text"].is_string()) {
        throw RemoteError(RemoteErrorKind::MalformedResponse, "response lacks a string 'text' field");
    }
    ToolOutput out;
    out.text = doc["text"].get<std::string>();
    if (doc.contains("images")) {
        if (!doc["images"].is_array()) throw RemoteError(RemoteErrorKind::MalformedResponse, "'images' is not an array");
        for (const auto& img : doc["images"]) {
            if (!img.is_object() || !img.contains("data") || !img["data"].is_string()) {
                throw RemoteError(RemoteErrorKind::MalformedResponse, "image entry lacks base64 'data'");
            }
            try {
                out.image_ids.push_back(store.put_encoded(base64_decode(img["data"].get<std::string>())).id);
            } catch (const std::exception& e) {
                throw RemoteError(RemoteErrorKind::MalformedResponse, std::string("bad image payload: ") + e.what());
            }
        }
    }
    return out;
}

std::vector<RemoteToolInfo> list_remote_tools(const EndpointConfig& endpoint) {
    http::Request req;
    req.path = "/tools";
    const auto resp = send(endpoint, std::move(req));
    check_status(resp);
    const auto doc = json::parse(resp.body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("tools") || !doc["tools"].is_array()) {
        throw RemoteError(RemoteErrorKind::MalformedResponse, "catalog lacks a 'tools' array");
    }
    std::vector<RemoteToolInfo> out;
    for (const auto& t : doc["tools"]) {
        if (!t.is_object() || !t.contains("name") || !t["name"].is_string()) {
            throw RemoteError(RemoteErrorKind::MalformedResponse, "catalog entry lacks a name");
        }
        out.push_back({t["name"].get<std::string>(), t.value("params", json::array())});
    }
    return out;
}

bool RemoteAvailability::is_available(const std::string& tool) const {
    const auto it = available.find(tool);
    return it != available.end() && it->second;
}

RemoteAvailability verify_remote_tools(const Registry& registry, std::span<const EndpointConfig> endpoints) {
    RemoteAvailability out;
    std::map<std::string, std::optional<std::vector<RemoteToolInfo>>> catalogs;
    for (const auto& tool : registry.flat_toolset()) {
        if (tool.backend.kind != Backend::Kind::Remote) continue;
        const EndpointConfig* endpoint = nullptr;
        for (const auto& e : endpoints) {
            if (e.name == tool.backend.endpoint) endpoint = &e;
        }
        if (endpoint == nullptr) {
            out.available[tool.name] = false;
            out.warnings.push_back("tool '" + tool.name + "': endpoint '" + tool.backend.endpoint + "' is not configured");
            continue;
        }
        if (!catalogs.contains(endpoint->name)) {
            try {
                catalogs[endpoint->name] = list_remote_tools(*endpoint);
            } catch (const RemoteError& e) {
                catalogs[endpoint->name] = std::nullopt;
                out.warnings.push_back("endpoint '" + endpoint->name + "': " + std::string(to_string(e.kind())) +
                                       ": " + e.what());
            }
        }
        const auto& catalog = catalogs[endpoint->name];
        bool served = false;
        if (catalog) {
            for (const auto& info : *catalog) served = served || info.name == tool.name;
            if (!served) {
                out.warnings.push_back("tool '" + tool.name + "' is not served by endpoint '" + endpoint->name + "'");
            }
        }
        out.available[tool.name] = served;
    }
    for (const auto& w : out.warnings) spdlog::warn("{}", w);
    return out;
}

}  // namespace caporch
