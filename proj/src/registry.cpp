// SPDX-License-Identifier: Apache-2.0
#include "caporch/registry.hpp"

#include <algorithm>
#include <fstream>

namespace caporch {

using nlohmann::json;

namespace {

bool is_point(const json& v) {
    return v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number();
}

bool is_rect(const json& v) {
    if (v.is_array()) {
        return v.size() == 4 &&
               std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); });
    }
    if (v.is_object()) {
        for (const char* k : {"x", "y", "w", "h"}) {
            if (!v.contains(k) || !v[k].is_number()) return false;
        }
        return true;
    }
    return false;
}

bool is_grid(const json& v) {
    if (!v.is_array() || v.empty()) return false;
    return std::all_of(v.begin(), v.end(), [](const json& row) {
        if (row.is_string()) return true;
        return row.is_array() && std::all_of(row.begin(), row.end(), [](const json& cell) {
                   return cell.is_string() && cell.get<std::string>().size() == 1;
               });
    });
}

bool is_color(const json& v) {
    if (v.is_string()) return true;
    return v.is_array() && v.size() == 3 && std::all_of(v.begin(), v.end(), [](const json& e) {
               return e.is_number_integer() && e.get<int>() >= 0 && e.get<int>() <= 255;
           });
}

}  // namespace

std::string_view to_string(ParamType t) {
    switch (t) {
        case ParamType::String: return "string";
        case ParamType::Number: return "number";
        case ParamType::Integer: return "integer";
        case ParamType::Boolean: return "boolean";
        case ParamType::Point: return "point";
        case ParamType::PointList: return "point_list";
        case ParamType::Rect: return "rect";
        case ParamType::Grid: return "grid";
        case ParamType::Color: return "color";
        case ParamType::Object: return "object";
        case ParamType::Array: return "array";
        case ParamType::Any: return "any";
    }
    return "any";
}

std::optional<ParamType> param_type_from_string(std::string_view s) {
    for (auto t : {ParamType::String, ParamType::Number, ParamType::Integer, ParamType::Boolean,
                   ParamType::Point, ParamType::PointList, ParamType::Rect, ParamType::Grid,
                   ParamType::Color, ParamType::Object, ParamType::Array, ParamType::Any}) {
        if (to_string(t) == s) return t;
    }
    return std::nullopt;
}

bool conforms(const json& value, ParamType type) {
    switch (type) {
        case ParamType::String: return value.is_string();
        case ParamType::Number: return value.is_number();
        case ParamType::Integer: return value.is_number_integer();
        case ParamType::Boolean: return value.is_boolean();
        case ParamType::Point: return is_point(value);
        case ParamType::PointList:
            return value.is_array() && std::all_of(value.begin(), value.end(), is_point);
        case ParamType::Rect: return is_rect(value);
        case ParamType::Grid: return is_grid(value);
        case ParamType::Color: return is_color(value);
        case ParamType::Object: return value.is_object();
        case ParamType::Array: return value.is_array();
        case ParamType::Any: return true;
    }
    return false;
}

std::string Backend::to_string() const {
    switch (kind) {
        case Kind::Local: return "local";
        case Kind::Remote: return "remote:" + endpoint;
        case Kind::Model: return "model";
    }
    return "local";
}

std::optional<Backend> Backend::parse(std::string_view s) {
    if (s == "local") return Backend::local();
    if (s == "model") return Backend::model();
    constexpr std::string_view prefix = "remote:";
    if (s.substr(0, prefix.size()) == prefix && s.size() > prefix.size()) {
        return Backend::remote(std::string(s.substr(prefix.size())));
    }
    return std::nullopt;
}

json ToolInvocation::to_json() const {
    json out = {{"tool", tool}, {"arguments", arguments}, {"images", image_refs}};
    out["declared_capability"] =
        declared_capability ? json(std::string(short_name(*declared_capability))) : json(nullptr);
    return out;
}

std::string_view to_string(RejectionKind k) {
    switch (k) {
        case RejectionKind::UnknownTool: return "UnknownTool";
        case RejectionKind::CapabilityMismatch: return "CapabilityMismatch";
        case RejectionKind::CapabilityDisabled: return "CapabilityDisabled";
        case RejectionKind::MissingArgument: return "MissingArgument";
        case RejectionKind::ArgumentTypeError: return "ArgumentTypeError";
    }
    return "?";
}

std::string Rejection::message() const {
    switch (kind) {
        case RejectionKind::UnknownTool: return "unknown tool '" + tool + "'";
        case RejectionKind::CapabilityMismatch:
            return "tool '" + tool + "' belongs to " + std::string(display_name(*expected)) +
                   ", not " +
                   (declared ? std::string(display_name(*declared)) : std::string("(none)"));
        case RejectionKind::CapabilityDisabled:
            return "capability " + std::string(display_name(*expected)) +
                   " is disabled in this run (tool '" + tool + "')";
        case RejectionKind::MissingArgument:
            return "tool '" + tool + "' requires argument '" + argument + "'";
        case RejectionKind::ArgumentTypeError:
            return "argument '" + argument + "' of tool '" + tool + "' has the wrong type";
    }
    return "rejected";
}

std::string_view to_string(RegistryErrorKind k) {
    switch (k) {
        case RegistryErrorKind::DuplicateTool: return "DuplicateTool";
        case RegistryErrorKind::SchemaError: return "SchemaError";
        case RegistryErrorKind::Io: return "Io";
    }
    return "?";
}

void Registry::add(ToolSpec spec) {
    if (find(spec.name) != nullptr) {
        throw RegistryError(RegistryErrorKind::DuplicateTool, "duplicate tool '" + spec.name + "'");
    }
    tools_.push_back(std::move(spec));
}

Registry Registry::from_json(const json& doc) {
    Registry reg;
    try {
        for (const auto& entry : doc.at("tools")) {
            ToolSpec spec;
            spec.name = entry.at("name").get<std::string>();
            const auto cap_name = entry.at("capability").get<std::string>();
            const auto cap = capability_from_short_name(cap_name);
            if (!cap) {
                throw RegistryError(RegistryErrorKind::SchemaError,
                                    "tool '" + spec.name + "' has unknown capability '" +
                                        cap_name + "'");
            }
            spec.capability = *cap;
            spec.description = entry.value("description", "");
            spec.produces_images = entry.value("produces_images", false);
            const auto backend_name = entry.value("backend", "local");
            const auto backend = Backend::parse(backend_name);
            if (!backend) {
                throw RegistryError(RegistryErrorKind::SchemaError,
                                    "tool '" + spec.name + "' has invalid backend '" +
                                        backend_name + "'");
            }
            spec.backend = *backend;
            for (const auto& p : entry.value("params", json::array())) {
                ParamSpec param;
                param.name = p.at("name").get<std::string>();
                const auto type_name = p.value("type", "any");
                const auto type = param_type_from_string(type_name);
                if (!type) {
                    throw RegistryError(RegistryErrorKind::SchemaError,
                                        "param '" + param.name + "' has unknown type '" +
                                            type_name + "'");
                }
                param.type = *type;
                param.required = p.value("required", false);
                param.description = p.value("description", "");
                spec.params.push_back(std::move(param));
            }
            reg.add(std::move(spec));
        }
    } catch (const json::exception& e) {
        throw RegistryError(RegistryErrorKind::SchemaError, std::string("registry: ") + e.what());
    }
    return reg;
}

Registry Registry::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw RegistryError(RegistryErrorKind::Io, "cannot open registry " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw RegistryError(RegistryErrorKind::SchemaError, path.string() + ": " + e.what());
    }
    return from_json(doc);
}

Registry Registry::load_default() {
    return load(std::filesystem::path(CAPORCH_DATA_DIR) / "registry.json");
}

json Registry::to_json() const {
    json tools = json::array();
    for (const auto& t : tools_) {
        json params = json::array();
        for (const auto& p : t.params) {
            params.push_back({{"name", p.name},
                              {"type", std::string(to_string(p.type))},
                              {"required", p.required},
                              {"description", p.description}});
        }
        tools.push_back({{"name", t.name},
                         {"capability", std::string(short_name(t.capability))},
                         {"description", t.description},
                         {"params", params},
                         {"produces_images", t.produces_images},
                         {"backend", t.backend.to_string()}});
    }
    return {{"version", 1}, {"tools", tools}};
}

const ToolSpec* Registry::find(std::string_view name) const {
    for (const auto& t : tools_) {
        if (t.name == name) return &t;
    }
    return nullptr;
}

std::vector<ToolSpec> Registry::tools_for(Capability c) const {
    std::vector<ToolSpec> out;
    for (const auto& t : tools_) {
        if (t.capability == c) out.push_back(t);
    }
    return out;
}

std::vector<ToolSpec> Registry::flat_toolset() const { return tools_; }

std::vector<ToolSpec> Registry::enabled_tools(const std::set<Capability>& disabled) const {
    std::vector<ToolSpec> out;
    for (const auto& t : tools_) {
        if (!disabled.contains(t.capability)) out.push_back(t);
    }
    return out;
}

ValidationResult Registry::validate_binding(const ToolInvocation& inv,
                                            const ValidationOptions& options) const {
    const ToolSpec* spec = find(inv.tool);
    if (spec == nullptr) {
        return ValidationResult(Rejection{RejectionKind::UnknownTool, inv.tool, {}, {}, {}});
    }
    if (options.disabled.contains(spec->capability)) {
        return ValidationResult(Rejection{RejectionKind::CapabilityDisabled, inv.tool,
                                          spec->capability, inv.declared_capability, {}});
    }
    if (options.enforce_capability) {
        if (!inv.declared_capability || *inv.declared_capability != spec->capability) {
            return ValidationResult(Rejection{RejectionKind::CapabilityMismatch, inv.tool,
                                              spec->capability, inv.declared_capability, {}});
        }
    }
    const json& args = inv.arguments;
    for (const auto& p : spec->params) {
        const bool present = args.is_object() && args.contains(p.name) && !args[p.name].is_null();
        if (!present) {
            if (p.required) {
                return ValidationResult(
                    Rejection{RejectionKind::MissingArgument, inv.tool, {}, {}, p.name});
            }
            continue;
        }
        if (!conforms(args[p.name], p.type)) {
            return ValidationResult(
                Rejection{RejectionKind::ArgumentTypeError, inv.tool, {}, {}, p.name});
        }
    }
    return {};
}

}  // namespace caporch
