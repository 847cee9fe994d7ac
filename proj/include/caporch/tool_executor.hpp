// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "caporch/builtin_tools.hpp"
#include "caporch/model_provider.hpp"
#include "caporch/registry.hpp"
#include "caporch/remote_tools.hpp"

namespace caporch {

// Any failure while running a validated invocation. The orchestrator turns it
// into a protocol-error observation.
class ToolExecutionFailed : public std::runtime_error {
public:
    explicit ToolExecutionFailed(const std::string& detail) : std::runtime_error(detail) {}
    std::string detail() const { return what(); }
};

// A recorded non-local result used during replay: either an output or the
// failure detail the original execution produced.
struct RecordedOutput {
    std::optional<ToolOutput> output;
    std::string failure;
};

// Returns the provider that serves a model-backed tool, or null.
using ModelResolver = std::function<std::shared_ptr<ModelProvider>(const ToolSpec&)>;

// Dispatches invocations to local handlers, remote endpoints or routed models.
// Thread-safe once configured.
class ToolExecutor {
public:
    ToolExecutor();

    void set_local(const std::string& tool, LocalHandler handler);
    void set_endpoints(std::vector<EndpointConfig> endpoints);
    // Remote tools marked unavailable fail fast without a network call.
    void set_availability(RemoteAvailability availability);
    void set_model_resolver(ModelResolver resolver);
    DecodingParams& model_decoding() { return model_decoding_; }

    // Replay: non-local invocations are answered from these outputs, in order.
    void set_recorded_outputs(std::vector<RecordedOutput> outputs);

    ToolOutput execute(const ToolInvocation& invocation, const Registry& registry, ImageStore& store) const;

private:
    ToolOutput run_remote(const ToolSpec& spec, const ToolInvocation& inv, ImageStore& store) const;
    ToolOutput run_model(const ToolSpec& spec, const ToolInvocation& inv) const;

    std::map<std::string, LocalHandler> local_;
    std::vector<EndpointConfig> endpoints_;
    std::optional<RemoteAvailability> availability_;
    ModelResolver resolver_;
    DecodingParams model_decoding_;

    mutable std::mutex recorded_mutex_;
    mutable std::optional<std::deque<RecordedOutput>> recorded_;
};

}  // namespace caporch
