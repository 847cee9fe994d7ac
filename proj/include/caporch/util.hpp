// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace caporch {

std::string sha256_hex(std::string_view data);

std::string base64_encode(std::string_view bytes);
// Throws std::invalid_argument on malformed input.
std::string base64_decode(std::string_view text);

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);

// Shortest round-trip decimal form; integral values keep a trailing ".0".
std::string format_number(double value);

std::vector<std::string> split(std::string_view s, char sep);

// Replaces each ill-formed UTF-8 sequence with U+FFFD; valid input is returned unchanged.
std::string sanitize_utf8(std::string_view s);

// UTC timestamp, e.g. 2026-10-16T12:00:00Z.
std::string utc_timestamp();

}  // namespace caporch
