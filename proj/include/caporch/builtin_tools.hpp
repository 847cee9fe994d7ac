// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>

#include <json.hpp>

#include "caporch/image.hpp"
#include "caporch/remote_tools.hpp"

namespace caporch {

// In-process tool implementation. Throws on invalid input; the executor turns
// any exception into ToolExecutionFailed.
using LocalHandler =
    std::function<ToolOutput(const nlohmann::json& arguments, std::span<const std::string> image_ids, ImageStore& store)>;

// Deterministic handlers for every local tool of the default registry.
const std::map<std::string, LocalHandler>& builtin_local_handlers();

}  // namespace caporch
