#pragma once

#include <memory>
#include <string>

#include "ratas/gateway.hpp"
#include "ratas/prompt_templates.hpp"

namespace ratas {

struct RemoteOptions {
    std::string base_url;    // e.g. https://api.example.com/v1
    std::string api_key;     // bearer credential
    std::string model;       // model identifier sent in the request body
    std::chrono::milliseconds timeout{30000};
};

/// Chat-completion backend speaking the common HTTP JSON protocol:
/// POST {base_url}/chat/completions with a model id, a message list and a
/// JSON response-format directive. Each task call is stateless. Connection
/// failures, timeouts, 429 and 5xx raise retryable TransportError; 401/403
/// are non-retryable.
class RemoteBackend : public Backend {
public:
    RemoteBackend(RemoteOptions options, TemplateSet templates = TemplateSet::builtin());

    std::string id() const override;
    bool rate_limited() const override { return true; }
    nlohmann::json complete(const GatewayRequest& request) override;

    /// Request body for a task, exposed for tests.
    nlohmann::json build_body(const GatewayRequest& request) const;

private:
    RemoteOptions options_;
    TemplateSet templates_;
};

} // namespace ratas
