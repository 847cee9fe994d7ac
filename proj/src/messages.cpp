// SPDX-License-Identifier: Apache-2.0
#include "caporch/messages.hpp"

#include "caporch/util.hpp"

namespace caporch {

std::string_view to_string(Role r) {
    switch (r) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
    }
    return "user";
}

nlohmann::json ProviderMessages::to_json() const {
    auto out = nlohmann::json::array();
    for (const auto& m : messages) {
        out.push_back({{"role", std::string(to_string(m.role))}, {"text", m.text}, {"images", m.image_ids}});
    }
    return out;
}

std::string ProviderMessages::digest() const { return sha256_hex(to_json().dump()); }

}  // namespace caporch
