// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace caporch {

// Exception carrying a module-specific error kind. Each module defines its own
// Kind enum and a `to_string(Kind)` overload.
template <typename Kind>
class KindedError : public std::runtime_error {
public:
    KindedError(Kind kind, const std::string& detail)
        : std::runtime_error(detail), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

}  // namespace caporch
