// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "caporch/error.hpp"
#include "caporch/image.hpp"
#include "caporch/registry.hpp"

namespace caporch {

struct EndpointConfig {
    std::string name;
    std::string base_url;
    int timeout_ms = 30000;
    std::size_t max_payload_bytes = 16u << 20;
    // Environment variable holding a bearer token.
    std::optional<std::string> auth_env;
};

// Text plus any images a tool produced (already registered in the store).
struct ToolOutput {
    std::string text;
    std::vector<std::string> image_ids;

    bool operator==(const ToolOutput&) const = default;
};

enum class RemoteErrorKind { Timeout, Unreachable, HttpStatus, MalformedResponse, PayloadTooLarge };
std::string_view to_string(RemoteErrorKind k);

class RemoteError : public KindedError<RemoteErrorKind> {
public:
    RemoteError(RemoteErrorKind kind, const std::string& detail, int status = 0)
        : KindedError(kind, detail), status_(status) {}
    int status() const { return status_; }

private:
    int status_;
};

// tool-protocol v1 request body for POST {base_url}/tools/{tool}.
nlohmann::json build_tool_request(const nlohmann::json& arguments, std::span<const std::string> image_ids,
                                  const ImageStore& store);

// POST {base_url}/tools/{tool}. Produced images are registered in `store`.
ToolOutput call_remote_tool(const EndpointConfig& endpoint, const std::string& tool,
                            const nlohmann::json& arguments, std::span<const std::string> image_ids,
                            ImageStore& store);

struct RemoteToolInfo {
    std::string name;
    nlohmann::json params;
};

// GET {base_url}/tools
std::vector<RemoteToolInfo> list_remote_tools(const EndpointConfig& endpoint);

struct RemoteAvailability {
    std::map<std::string, bool> available;  // remote-backed tool name -> served
    std::vector<std::string> warnings;

    bool is_available(const std::string& tool) const;
};

// Checks that every remote-backed tool in `registry` is served by its endpoint.
RemoteAvailability verify_remote_tools(const Registry& registry, std::span<const EndpointConfig> endpoints);

}  // namespace caporch
