// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "caporch/error.hpp"

namespace caporch {

// The closed set of six reasoning capabilities.
enum class Capability : std::uint8_t {
    Perception,
    Augmentation,
    Spatial,
    Logic,
    Transform,
    Generation,
};

inline constexpr std::array<Capability, 6> kAllCapabilities = {
    Capability::Perception, Capability::Augmentation, Capability::Spatial,
    Capability::Logic,      Capability::Transform,    Capability::Generation,
};

struct CapabilitySpec {
    Capability id;
    std::string display_name;
    std::string description;
};

// Specs of all six capabilities, in enum order.
const std::vector<CapabilitySpec>& capability_specs();
const CapabilitySpec& spec_of(Capability c);

std::string_view display_name(Capability c);
// Short identifier used in config files and reports ("Perception", "Logic", ...).
std::string_view short_name(Capability c);
// Case-insensitive lookup by short name.
std::optional<Capability> capability_from_short_name(std::string_view name);

enum class CapabilityErrorKind { UnknownCapability, UnknownCapabilityBinding, AliasTableError };
std::string_view to_string(CapabilityErrorKind k);
using CapabilityError = KindedError<CapabilityErrorKind>;

// Lowercase, alphanumerics only: "Spatial & Geometric" -> "spatialgeometric".
std::string normalize_label(std::string_view raw);

// Versioned alias table mapping free-form phrasings to capabilities.
class AliasTable {
public:
    AliasTable() = default;

    static AliasTable from_json(const nlohmann::json& doc);
    static AliasTable load(const std::filesystem::path& path);
    // data/capability_aliases.json from the source tree.
    static AliasTable load_default();

    int version() const { return version_; }
    std::optional<Capability> lookup(std::string_view raw) const;
    std::size_t size() const { return entries_.size(); }

private:
    int version_ = 0;
    std::map<std::string, Capability, std::less<>> entries_;  // normalized key
};

// Exact display name, then normalized display/short name, then alias table.
// Throws CapabilityError(UnknownCapability).
Capability canonicalize_capability(std::string_view raw, const AliasTable& aliases);

}  // namespace caporch
