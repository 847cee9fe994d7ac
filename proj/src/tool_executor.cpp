// SPDX-License-Identifier: Apache-2.0
#include "caporch/tool_executor.hpp"

#include <algorithm>

#include <spdlog/spdlog.h>

#include "caporch/expression.hpp"
#include "caporch/geometry.hpp"
#include "caporch/maze.hpp"
#include "caporch/raster.hpp"
#include "caporch/util.hpp"

namespace caporch {

namespace {

// "<Kind>: message" for kinded errors, plain message otherwise.
template <typename E>
std::string describe(const E& e) {
    return std::string(to_string(e.kind())) + ": " + e.what();
}

}  // namespace

ToolExecutor::ToolExecutor() : local_(builtin_local_handlers()) {}

void ToolExecutor::set_local(const std::string& tool, LocalHandler handler) { local_[tool] = std::move(handler); }

void ToolExecutor::set_endpoints(std::vector<EndpointConfig> endpoints) { endpoints_ = std::move(endpoints); }

void ToolExecutor::set_availability(RemoteAvailability availability) { availability_ = std::move(availability); }

void ToolExecutor::set_model_resolver(ModelResolver resolver) { resolver_ = std::move(resolver); }

void ToolExecutor::set_recorded_outputs(std::vector<RecordedOutput> outputs) {
    std::lock_guard lock(recorded_mutex_);
    recorded_.emplace(outputs.begin(), outputs.end());
}

ToolOutput ToolExecutor::execute(const ToolInvocation& inv, const Registry& registry, ImageStore& store) const {
    const ToolSpec* spec = registry.find(inv.tool);
    if (!spec) throw ToolExecutionFailed("tool '" + inv.tool + "' is not registered");

    if (spec->backend.kind != Backend::Kind::Local) {
        std::lock_guard lock(recorded_mutex_);
        if (recorded_) {
            if (recorded_->empty()) throw ToolExecutionFailed("no recorded output left for '" + inv.tool + "'");
            RecordedOutput rec = std::move(recorded_->front());
            recorded_->pop_front();
            if (!rec.output) throw ToolExecutionFailed(rec.failure);
            return std::move(*rec.output);
        }
    }

    switch (spec->backend.kind) {
        case Backend::Kind::Local: {
            const auto it = local_.find(inv.tool);
            if (it == local_.end()) throw ToolExecutionFailed("no local implementation for '" + inv.tool + "'");
            try {
                return it->second(inv.arguments, inv.image_refs, store);
            } catch (const ToolExecutionFailed&) {
                throw;
            } catch (const raster::RasterError& e) {
                throw ToolExecutionFailed(describe(e));
            } catch (const geometry::GeometryError& e) {
                throw ToolExecutionFailed(describe(e));
            } catch (const maze::MazeError& e) {
                throw ToolExecutionFailed(describe(e));
            } catch (const ExpressionError& e) {
                throw ToolExecutionFailed(describe(e));
            } catch (const ImageError& e) {
                throw ToolExecutionFailed(describe(e));
            } catch (const nlohmann::json::exception& e) {
                throw ToolExecutionFailed(std::string("ArgumentError: ") + e.what());
            } catch (const std::exception& e) {
                throw ToolExecutionFailed(e.what());
            }
        }
        case Backend::Kind::Remote: return run_remote(*spec, inv, store);
        case Backend::Kind::Model: return run_model(*spec, inv);
    }
    throw ToolExecutionFailed("unsupported backend");
}

ToolOutput ToolExecutor::run_remote(const ToolSpec& spec, const ToolInvocation& inv, ImageStore& store) const {
    const auto ep = std::find_if(endpoints_.begin(), endpoints_.end(),
                                 [&](const EndpointConfig& e) { return e.name == spec.backend.endpoint; });
    if (ep == endpoints_.end()) {
        throw ToolExecutionFailed("endpoint unreachable: no endpoint named '" + spec.backend.endpoint + "' configured");
    }
    if (availability_ && !availability_->is_available(spec.name)) {
        throw ToolExecutionFailed("endpoint unreachable: '" + spec.name + "' is not served by " + ep->base_url);
    }
    try {
        return call_remote_tool(*ep, spec.name, inv.arguments, inv.image_refs, store);
    } catch (const RemoteError& e) {
        if (e.kind() == RemoteErrorKind::Unreachable) throw ToolExecutionFailed(std::string("endpoint unreachable: ") + e.what());
        throw ToolExecutionFailed(describe(e));
    } catch (const ImageError& e) {
        throw ToolExecutionFailed(describe(e));
    }
}

ToolOutput ToolExecutor::run_model(const ToolSpec& spec, const ToolInvocation& inv) const {
    std::shared_ptr<ModelProvider> provider = resolver_ ? resolver_(spec) : nullptr;
    if (!provider) throw ToolExecutionFailed("no provider routed for model-backed tool '" + spec.name + "'");
    ProviderMessages msgs;
    msgs.messages.push_back({Role::System,
                             "You are the tool '" + spec.name + "'. " + spec.description +
                                 "\nReply with the tool result only.",
                             {}});
    msgs.messages.push_back({Role::User, inv.arguments.dump(), inv.image_refs});
    try {
        return {sanitize_utf8(provider->complete(msgs, model_decoding_)), {}};
    } catch (const ProviderError& e) {
        spdlog::warn("model-backed tool {} failed: {}", spec.name, e.what());
        throw ToolExecutionFailed(describe(e));
    }
}

}  // namespace caporch
