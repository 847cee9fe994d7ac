// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <string_view>

#include "caporch/error.hpp"

namespace caporch::http {

struct Response {
    int status = 0;
    std::string body;
};

enum class FailureKind { Unreachable, Timeout, Transport, InvalidUrl };
std::string_view to_string(FailureKind k);
using HttpError = KindedError<FailureKind>;

struct Request {
    std::string method = "GET";  // GET or POST
    std::string base_url;        // scheme://host[:port][/prefix]
    std::string path;            // appended to the base URL prefix
    std::string body;
    std::string content_type = "application/json";
    std::map<std::string, std::string> headers;
    int timeout_ms = 30000;
};

// Blocking request on a fresh connection. Non-2xx statuses are returned, not
// thrown; transport failures throw HttpError.
Response send(const Request& request);

}  // namespace caporch::http
