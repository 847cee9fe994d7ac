// SPDX-License-Identifier: Apache-2.0
#include "caporch/run_config.hpp"

#include <stdexcept>

#include "caporch/util.hpp"

namespace caporch {

std::string RunMode::label() const {
    switch (kind) {
        case Kind::Full: return "full";
        case Kind::FlatSelection: return "flat";
        case Kind::CapabilityDisabled: {
            std::string out = "drop:";
            bool first = true;
            for (Capability c : disabled) {
                if (!first) out += '+';
                out += short_name(c);
                first = false;
            }
            return out;
        }
    }
    return "full";
}

RunMode RunMode::parse(std::string_view text) {
    const std::string t = trim(text);
    if (t == "full") return full();
    if (t == "flat") return flat();
    if (t.starts_with("drop:")) {
        std::set<Capability> caps;
        for (const auto& part : split(t.substr(5), '+')) {
            const auto c = capability_from_short_name(trim(part));
            if (!c) throw std::invalid_argument("unknown capability '" + part + "' in mode '" + t + "'");
            caps.insert(*c);
        }
        if (caps.empty()) throw std::invalid_argument("mode '" + t + "' names no capability");
        return without(std::move(caps));
    }
    throw std::invalid_argument("unknown mode '" + t + "' (full, flat, drop:<capability>)");
}

void RunConfig::validate() const {
    if (max_turn < 1) throw std::invalid_argument("max_turn must be >= 1");
    if (!(temperature >= 0.0)) throw std::invalid_argument("temperature must be >= 0");
    if (!(top_p > 0.0 && top_p <= 1.0)) throw std::invalid_argument("top_p must be in (0, 1]");
    if (!(budget_fraction > 0.0 && budget_fraction <= 1.0)) {
        throw std::invalid_argument("budget_fraction must be in (0, 1]");
    }
    if (max_output < 1) throw std::invalid_argument("max_output must be >= 1");
    if (provider_retries < 0) throw std::invalid_argument("provider_retries must be >= 0");
    if (retry_backoff_ms < 0) throw std::invalid_argument("retry_backoff_ms must be >= 0");
    if (mode.kind == RunMode::Kind::CapabilityDisabled && mode.disabled.empty()) {
        throw std::invalid_argument("capability-disabled mode needs at least one capability");
    }
}

nlohmann::json RunConfig::to_json() const {
    return {
        {"max_turn", max_turn},
        {"temperature", temperature},
        {"top_p", top_p},
        {"budget_fraction", budget_fraction},
        {"max_output", max_output},
        {"mode", mode.label()},
        {"provider_retries", provider_retries},
        {"retry_backoff_ms", retry_backoff_ms},
    };
}

RunConfig RunConfig::from_json(const nlohmann::json& doc) {
    RunConfig c;
    if (!doc.is_object()) throw std::invalid_argument("run settings must be an object");
    c.max_turn = doc.value("max_turn", c.max_turn);
    c.temperature = doc.value("temperature", c.temperature);
    c.top_p = doc.value("top_p", c.top_p);
    c.budget_fraction = doc.value("budget_fraction", c.budget_fraction);
    c.max_output = doc.value("max_output", c.max_output);
    if (doc.contains("mode")) c.mode = RunMode::parse(doc["mode"].get<std::string>());
    c.provider_retries = doc.value("provider_retries", c.provider_retries);
    c.retry_backoff_ms = doc.value("retry_backoff_ms", c.retry_backoff_ms);
    c.validate();
    return c;
}

}  // namespace caporch
