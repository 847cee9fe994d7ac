// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "caporch/capability.hpp"
#include "caporch/error.hpp"

namespace caporch {

// Semantic argument types understood by validate_binding.
enum class ParamType {
    String,
    Number,
    Integer,
    Boolean,
    Point,      // [x, y]
    PointList,  // [[x, y], ...]
    Rect,       // {"x","y","w","h"} or [x, y, w, h]
    Grid,       // ["#S..", ...] or [["#","S"], ...]
    Color,      // "red" or [r, g, b]
    Object,
    Array,
    Any,
};

std::string_view to_string(ParamType t);
std::optional<ParamType> param_type_from_string(std::string_view s);
bool conforms(const nlohmann::json& value, ParamType type);

struct ParamSpec {
    std::string name;
    ParamType type = ParamType::Any;
    bool required = false;
    std::string description;
};

struct Backend {
    enum class Kind { Local, Remote, Model };
    Kind kind = Kind::Local;
    std::string endpoint;  // Remote only

    static Backend local() { return {}; }
    static Backend remote(std::string endpoint) { return {Kind::Remote, std::move(endpoint)}; }
    static Backend model() { return {Kind::Model, {}}; }

    // "local", "remote:<endpoint>", "model"
    std::string to_string() const;
    static std::optional<Backend> parse(std::string_view s);

    bool operator==(const Backend&) const = default;
};

struct ToolSpec {
    std::string name;
    Capability capability = Capability::Perception;
    std::string description;
    std::vector<ParamSpec> params;
    bool produces_images = false;
    Backend backend;
};

// A concrete tool call a_i extracted from a model turn.
struct ToolInvocation {
    std::string tool;
    nlohmann::json arguments = nlohmann::json::object();
    std::vector<std::string> image_refs;
    // Absent when the capability stage is disabled (flat selection).
    std::optional<Capability> declared_capability;

    nlohmann::json to_json() const;
};

enum class RejectionKind {
    UnknownTool,
    CapabilityMismatch,
    CapabilityDisabled,
    MissingArgument,
    ArgumentTypeError,
};
std::string_view to_string(RejectionKind k);

struct Rejection {
    RejectionKind kind;
    std::string tool;
    std::optional<Capability> expected;
    std::optional<Capability> declared;
    std::string argument;

    std::string message() const;
};

class ValidationResult {
public:
    ValidationResult() = default;
    explicit ValidationResult(Rejection r) : rejection_(std::move(r)) {}

    bool ok() const { return !rejection_.has_value(); }
    explicit operator bool() const { return ok(); }
    const std::optional<Rejection>& rejection() const { return rejection_; }

private:
    std::optional<Rejection> rejection_;
};

struct ValidationOptions {
    // False in flat-selection mode: the capability/tool match is not checked.
    bool enforce_capability = true;
    std::set<Capability> disabled;
};

enum class RegistryErrorKind { DuplicateTool, SchemaError, Io };
std::string_view to_string(RegistryErrorKind k);
using RegistryError = KindedError<RegistryErrorKind>;

// Tool catalog partitioned by capability. Built once, then read-only.
class Registry {
public:
    Registry() = default;

    void add(ToolSpec spec);

    static Registry from_json(const nlohmann::json& doc);
    static Registry load(const std::filesystem::path& path);
    // data/registry.json from the source tree.
    static Registry load_default();
    nlohmann::json to_json() const;

    const ToolSpec* find(std::string_view name) const;
    std::vector<ToolSpec> tools_for(Capability c) const;
    std::vector<ToolSpec> flat_toolset() const;
    // Tools whose capability is not in `disabled`, registration order.
    std::vector<ToolSpec> enabled_tools(const std::set<Capability>& disabled) const;

    ValidationResult validate_binding(const ToolInvocation& invocation,
                                      const ValidationOptions& options = {}) const;

    bool empty() const { return tools_.empty(); }
    std::size_t size() const { return tools_.size(); }

private:
    std::vector<ToolSpec> tools_;
};

}  // namespace caporch
