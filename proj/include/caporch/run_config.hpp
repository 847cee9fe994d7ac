// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <set>
#include <string>
#include <string_view>

#include <json.hpp>

#include "caporch/capability.hpp"

namespace caporch {

struct RunMode {
    enum class Kind { Full, FlatSelection, CapabilityDisabled };
    Kind kind = Kind::Full;
    std::set<Capability> disabled;  // CapabilityDisabled only

    static RunMode full() { return {}; }
    static RunMode flat() { return {Kind::FlatSelection, {}}; }
    static RunMode without(std::set<Capability> caps) { return {Kind::CapabilityDisabled, std::move(caps)}; }

    // "full", "flat", "drop:Logic" or "drop:Logic+Spatial"
    std::string label() const;
    // Inverse of label(); capability names are case-insensitive.
    // Throws std::invalid_argument.
    static RunMode parse(std::string_view text);

    bool operator==(const RunMode&) const = default;
};

struct RunConfig {
    int max_turn = 10;
    double temperature = 0.3;
    double top_p = 1.0;
    double budget_fraction = 0.6;
    int max_output = 4096;
    RunMode mode;
    // Retries on transport failures before the session ends with ProviderError.
    int provider_retries = 2;
    int retry_backoff_ms = 250;

    // Throws std::invalid_argument on out-of-range values.
    void validate() const;

    nlohmann::json to_json() const;
    // Missing fields take the defaults above.
    static RunConfig from_json(const nlohmann::json& doc);

    bool operator==(const RunConfig&) const = default;
};

}  // namespace caporch
