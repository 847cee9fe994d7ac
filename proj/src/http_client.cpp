// SPDX-License-Identifier: Apache-2.0
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "caporch/http_client.hpp"

#include <chrono>

namespace caporch::http {

std::string_view to_string(FailureKind k) {
    switch (k) {
        case FailureKind::Unreachable: return "Unreachable";
        case FailureKind::Timeout: return "Timeout";
        case FailureKind::Transport: return "Transport";
        case FailureKind::InvalidUrl: return "InvalidUrl";
    }
    return "?";
}

namespace {

struct SplitUrl {
    std::string origin;  // scheme://host:port
    std::string prefix;  // path prefix without trailing slash
};

SplitUrl split_url(std::string_view url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string_view::npos) {
        throw HttpError(FailureKind::InvalidUrl, "URL lacks a scheme: " + std::string(url));
    }
    const auto path_start = url.find('/', scheme_end + 3);
    SplitUrl out;
    if (path_start == std::string_view::npos) {
        out.origin = std::string(url);
    } else {
        out.origin = std::string(url.substr(0, path_start));
        out.prefix = std::string(url.substr(path_start));
        while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
    }
    return out;
}

}  // namespace

Response send(const Request& request) {
    const auto url = split_url(request.base_url);
    httplib::Client client(url.origin);
    if (!client.is_valid()) {
        throw HttpError(FailureKind::InvalidUrl, "unsupported URL: " + request.base_url);
    }
    const auto timeout = std::chrono::milliseconds(request.timeout_ms);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    httplib::Headers headers;
    for (const auto& [k, v] : request.headers) headers.emplace(k, v);
    const std::string path = url.prefix + request.path;

    const auto started = std::chrono::steady_clock::now();
    httplib::Result result;
    if (request.method == "POST") {
        result = client.Post(path, headers, request.body, request.content_type);
    } else {
        result = client.Get(path, headers);
    }
    if (!result) {
        const auto err = result.error();
        const auto elapsed = std::chrono::steady_clock::now() - started;
        const std::string detail = httplib::to_string(err) + " (" + request.base_url + ")";
        if (err == httplib::Error::Connection) {
            throw HttpError(FailureKind::Unreachable, "endpoint unreachable: " + detail);
        }
        if (err == httplib::Error::ConnectionTimeout ||
            ((err == httplib::Error::Read || err == httplib::Error::Write) && elapsed >= timeout)) {
            throw HttpError(FailureKind::Timeout, "timed out after " +
                                                      std::to_string(request.timeout_ms) + " ms: " + detail);
        }
        throw HttpError(FailureKind::Transport, detail);
    }
    return {result->status, result->body};
}

}  // namespace caporch::http
