// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace caporch {

enum class Role { System, User, Assistant };
std::string_view to_string(Role r);

struct Message {
    Role role = Role::User;
    std::string text;
    std::vector<std::string> image_ids;

    bool operator==(const Message&) const = default;
};

// Input to the reasoning model; the first message is always the system prompt.
struct ProviderMessages {
    std::vector<Message> messages;

    nlohmann::json to_json() const;
    // SHA-256 over the canonical JSON form (image ids only, never pixels).
    std::string digest() const;

    bool operator==(const ProviderMessages&) const = default;
};

}  // namespace caporch
