#include "ratas/remote_backend.hpp"

#include <httplib.h>

#include "ratas/text.hpp"

namespace ratas {

namespace {

nlohmann::json subconditions_json(const std::vector<SubCondition>& subs) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& sc : subs) {
        arr.push_back({{"quality", sc.quality}, {"score", sc.score}});
    }
    return arr;
}

/// Split "https://host[:port]/base/path" into (scheme://host[:port], /base/path).
std::pair<std::string, std::string> split_url(const std::string& url) {
    auto scheme_end = url.find("//");
    std::size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 2;
    auto path_start = url.find('/', host_start);
    if (path_start == std::string::npos) return {url, ""};
    return {url.substr(0, path_start), url.substr(path_start)};
}

} // namespace

RemoteBackend::RemoteBackend(RemoteOptions options, TemplateSet templates)
    : options_(std::move(options)), templates_(std::move(templates)) {
    if (options_.base_url.empty()) {
        throw std::invalid_argument("remote backend requires a base URL");
    }
    if (options_.model.empty()) {
        throw std::invalid_argument("remote backend requires a model name");
    }
}

std::string RemoteBackend::id() const { return "remote:" + options_.model; }

nlohmann::json RemoteBackend::build_body(const GatewayRequest& request) const {
    std::map<std::string, std::string> vars;
    switch (request.kind()) {
    case TaskKind::Ctm: {
        const auto& req = std::get<CtmRequest>(request.payload);
        vars["criteria"] = req.criteria;
        break;
    }
    case TaskKind::Csc: {
        const auto& req = std::get<CscRequest>(request.payload);
        vars["child_rules"] = nlohmann::json(req.child_rules).dump();
        vars["subconditions"] = subconditions_json(req.parent_subconditions).dump();
        break;
    }
    case TaskKind::Ssr: {
        const auto& req = std::get<SsrRequest>(request.payload);
        vars["criteria"] = req.criteria;
        vars["answer_segment"] = req.answer_segment;
        vars["subconditions"] = subconditions_json(req.subconditions).dump();
        vars["fulfilled_domain"] = request.continuous_sp
                                       ? "a fraction between 0 and 1"
                                       : "1 when met, 0 when unmet";
        break;
    }
    case TaskKind::Segment: {
        const auto& req = std::get<SegmentRequest>(request.payload);
        vars["row_rule"] = req.row_rule;
        vars["answer"] = req.answer;
        break;
    }
    }

    nlohmann::json body;
    body["model"] = options_.model;
    body["messages"] = nlohmann::json::array(
        {{{"role", "system"}, {"content", templates_.system}},
         {{"role", "user"}, {"content", templates_.render(request.kind(), vars)}}});
    body["response_format"] = {{"type", "json_object"}};
    body["temperature"] = 0.0;
    return body;
}

nlohmann::json RemoteBackend::complete(const GatewayRequest& request) {
    auto [host, base_path] = split_url(options_.base_url);
    while (!base_path.empty() && base_path.back() == '/') base_path.pop_back();
    const std::string path = base_path + "/chat/completions";

    httplib::Client client(host);
    const auto timeout = request.timeout.count() > 0 ? request.timeout : options_.timeout;
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout));
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    client.set_bearer_token_auth(options_.api_key);

    auto result = client.Post(path, build_body(request).dump(), "application/json");
    if (!result) {
        throw TransportError("connection failed: " + httplib::to_string(result.error()));
    }
    if (result->status == 401 || result->status == 403) {
        throw TransportError("authentication rejected (HTTP " +
                                 std::to_string(result->status) + ")",
                             /*retryable_failure=*/false);
    }
    if (result->status == 429 || result->status >= 500) {
        throw TransportError("HTTP " + std::to_string(result->status));
    }
    if (result->status != 200) {
        throw TransportError("unexpected HTTP " + std::to_string(result->status),
                             /*retryable_failure=*/false);
    }

    nlohmann::json envelope;
    try {
        envelope = nlohmann::json::parse(result->body);
    } catch (const nlohmann::json::parse_error&) {
        throw TransportError("response body is not JSON");
    }
    if (!envelope.contains("choices") || !envelope.at("choices").is_array() ||
        envelope.at("choices").empty()) {
        throw TransportError("response has no choices");
    }
    const auto& message = envelope.at("choices").at(0).value("message", nlohmann::json());
    if (!message.contains("content") || !message.at("content").is_string()) {
        throw TransportError("response message has no content");
    }

    std::string content = text::trim(message.at("content").get<std::string>());
    // Some models wrap JSON in a code fence despite instructions.
    if (content.rfind("```", 0) == 0) {
        auto first_newline = content.find('\n');
        auto last_fence = content.rfind("```");
        if (first_newline != std::string::npos && last_fence > first_newline) {
            content = text::trim(content.substr(first_newline + 1, last_fence - first_newline - 1));
        }
    }
    try {
        return nlohmann::json::parse(content);
    } catch (const nlohmann::json::parse_error&) {
        throw TransportError("model output is not a JSON object");
    }
}

} // namespace ratas
