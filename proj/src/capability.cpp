// SPDX-License-Identifier: Apache-2.0
#include "caporch/capability.hpp"

#include <cctype>
#include <fstream>

#include "caporch/util.hpp"

namespace caporch {

const std::vector<CapabilitySpec>& capability_specs() {
    static const std::vector<CapabilitySpec> specs = {
        {Capability::Perception, "Fine-grained Visual Perception",
         "Read facts off an image: text, where objects sit, their colors and counts, "
         "and other local properties."},
        {Capability::Augmentation, "Visual Augmentation & Marking",
         "Draw boxes, arrows or highlights on an image so that the evidence for a step is "
         "visible in the next observation."},
        {Capability::Spatial, "Spatial & Geometric Understanding",
         "Work with coordinates and shapes: distances, areas, perimeters, projections and "
         "intersections."},
        {Capability::Logic, "Logical Programming Reasoning",
         "Run exact computations as code, for example evaluating arithmetic or searching a "
         "grid for a shortest route."},
        {Capability::Transform, "Visual Transformation & Editing",
         "Change an existing image, for example cropping it to the part that matters."},
        {Capability::Generation, "Visual Creation & Generation",
         "Render a new image, such as a clean schematic of a cluttered scene, for later "
         "steps to inspect."},
    };
    return specs;
}

const CapabilitySpec& spec_of(Capability c) {
    return capability_specs().at(static_cast<std::size_t>(c));
}

std::string_view display_name(Capability c) { return spec_of(c).display_name; }

std::string_view short_name(Capability c) {
    switch (c) {
        case Capability::Perception: return "Perception";
        case Capability::Augmentation: return "Augmentation";
        case Capability::Spatial: return "Spatial";
        case Capability::Logic: return "Logic";
        case Capability::Transform: return "Transform";
        case Capability::Generation: return "Generation";
    }
    return "?";
}

std::optional<Capability> capability_from_short_name(std::string_view name) {
    const auto key = to_lower(name);
    for (auto c : kAllCapabilities) {
        if (to_lower(short_name(c)) == key) return c;
    }
    return std::nullopt;
}

std::string_view to_string(CapabilityErrorKind k) {
    switch (k) {
        case CapabilityErrorKind::UnknownCapability: return "UnknownCapability";
        case CapabilityErrorKind::UnknownCapabilityBinding: return "UnknownCapabilityBinding";
        case CapabilityErrorKind::AliasTableError: return "AliasTableError";
    }
    return "?";
}

std::string normalize_label(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (unsigned char c : raw) {
        if (std::isalnum(c)) out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

AliasTable AliasTable::from_json(const nlohmann::json& doc) {
    AliasTable table;
    try {
        table.version_ = doc.at("version").get<int>();
        for (const auto& [alias, target] : doc.at("aliases").items()) {
            const auto cap = capability_from_short_name(target.get<std::string>());
            if (!cap) {
                throw CapabilityError(CapabilityErrorKind::AliasTableError,
                                      "alias '" + alias + "' targets unknown capability '" +
                                          target.get<std::string>() + "'");
            }
            table.entries_[normalize_label(alias)] = *cap;
        }
    } catch (const nlohmann::json::exception& e) {
        throw CapabilityError(CapabilityErrorKind::AliasTableError,
                              std::string("malformed alias table: ") + e.what());
    }
    return table;
}

AliasTable AliasTable::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw CapabilityError(CapabilityErrorKind::AliasTableError,
                              "cannot open alias table " + path.string());
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw CapabilityError(CapabilityErrorKind::AliasTableError,
                              path.string() + ": " + e.what());
    }
    return from_json(doc);
}

AliasTable AliasTable::load_default() {
    return load(std::filesystem::path(CAPORCH_DATA_DIR) / "capability_aliases.json");
}

std::optional<Capability> AliasTable::lookup(std::string_view raw) const {
    const auto it = entries_.find(normalize_label(raw));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

Capability canonicalize_capability(std::string_view raw, const AliasTable& aliases) {
    const auto trimmed = trim(raw);
    for (const auto& spec : capability_specs()) {
        if (spec.display_name == trimmed) return spec.id;
    }
    const auto key = normalize_label(trimmed);
    if (!key.empty()) {
        for (const auto& spec : capability_specs()) {
            if (normalize_label(spec.display_name) == key ||
                normalize_label(short_name(spec.id)) == key) {
                return spec.id;
            }
        }
        if (auto hit = aliases.lookup(key)) return *hit;
    }
    throw CapabilityError(CapabilityErrorKind::UnknownCapability,
                          "unknown capability '" + trimmed + "'");
}

}  // namespace caporch
