#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ratas/errors.hpp"

namespace ratas {

/// The downstream NLP tasks routed through the gateway:
///   Ctm     - split a criterion into simpler rules,
///   Csc     - distribute a parent's sub-conditions over child rules,
///   Ssr     - decide fulfillment of an atomic rule and explain it,
///   Segment - pick the answer portion relevant to a row's rule.
enum class TaskKind { Ctm, Csc, Ssr, Segment };

const char* task_name(TaskKind kind);

/// Constraints applied when splitting a criterion into simpler rules.
struct RuleDivisionPolicy {
    std::size_t atomic_below_chars = 40; // shorter criteria stay atomic
    std::size_t min_clause_chars = 25;   // minimum clause size for conjunction splits

    bool operator==(const RuleDivisionPolicy&) const = default;
};

/// A quality level attached to a tree node: description plus the score
/// fraction it awards.
struct SubCondition {
    std::string quality;
    double score = 0.0; // fraction in [0, 1]

    bool operator==(const SubCondition&) const = default;
};

/// Outcome of the SSR task for one atomic rule.
struct SrVerdict {
    double fulfilled = 0.0; // {0,1} in binary mode, [0,1] in continuous mode
    std::optional<int> matched_level_index;
    double lqap = 0.0; // alignment with the matched level, [0, 1]
    std::string related_content;
    std::string reason_text;

    bool operator==(const SrVerdict&) const = default;
};

struct CtmRequest {
    std::string criteria;
    RuleDivisionPolicy policy;
};

struct CscRequest {
    std::vector<std::string> child_rules;
    std::vector<SubCondition> parent_subconditions;
};

struct SsrRequest {
    std::string answer_segment;
    std::string criteria;
    std::vector<SubCondition> subconditions;
};

struct SegmentRequest {
    std::string answer;
    std::string row_rule;
};

using TaskPayload = std::variant<CtmRequest, CscRequest, SsrRequest, SegmentRequest>;

struct GatewayRequest {
    TaskPayload payload;
    int attempt_budget = 3;
    std::chrono::milliseconds timeout{30000};
    bool continuous_sp = false;

    TaskKind kind() const;
};

struct GatewayResponse {
    nlohmann::json payload;
    std::string backend_id;
    std::chrono::milliseconds latency{0};
    int attempts = 1;
};

/// Transport-level failure inside a backend. Retryable unless flagged.
class TransportError : public RatasError {
public:
    explicit TransportError(const std::string& what, bool retryable_failure = true)
        : RatasError(what), retryable(retryable_failure) {}

    bool retryable;
};

/// A backend produces one candidate payload per call; the gateway owns
/// validation and retries.
class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string id() const = 0;
    virtual bool rate_limited() const { return false; }
    virtual nlohmann::json complete(const GatewayRequest& request) = 0;
};

struct GatewayOptions {
    int attempt_budget = 3;
    std::chrono::milliseconds timeout{30000};
    std::chrono::milliseconds backoff_base{500};
    double backoff_factor = 2.0;
    double backoff_jitter = 0.2; // +/- fraction of the delay
    int max_in_flight = 8;
    double bucket_capacity = 8.0;
    double bucket_refill_per_sec = 4.0;
    bool continuous_sp = false;
    std::uint64_t jitter_seed = 0; // 0 = seeded from entropy
};

/// Validate a candidate payload against its task's output schema, in the
/// context of the request that produced it. Returns an error description,
/// empty when valid. Exposed for tests.
std::string validate_task_payload(const GatewayRequest& request,
                                  const nlohmann::json& payload);

/// Exponential backoff delay for a (1-based) failed attempt; `unit` is a
/// jitter sample in [-1, 1].
std::chrono::milliseconds backoff_delay(const GatewayOptions& options, int attempt,
                                        double unit);

/// Single choke point for model calls. Typed task methods build requests,
/// route them through call_backend, and convert validated payloads.
/// Thread-safe: concurrent calls are bounded by an in-flight limiter and,
/// for rate-limited backends, a token bucket.
class Gateway {
public:
    explicit Gateway(std::shared_ptr<Backend> backend, GatewayOptions options = {});
    ~Gateway();

    Gateway(const Gateway&) = delete;
    Gateway& operator=(const Gateway&) = delete;

    /// Split a criterion into simplified rules. Returns the input itself
    /// (length-1 list) when the rule is atomic.
    std::vector<std::string> ctm(const std::string& criteria,
                                 const RuleDivisionPolicy& policy = {}) const;

    /// Distribute parent sub-conditions over child rules. Output has one
    /// entry per child rule; every parent sub-condition lands on at least
    /// one child, score fractions unchanged.
    std::vector<std::vector<SubCondition>> csc(
        const std::vector<std::string>& child_rules,
        const std::vector<SubCondition>& parent_subconditions) const;

    /// Decide fulfillment of an atomic rule against an answer segment.
    SrVerdict ssr(const std::string& answer_segment, const std::string& criteria,
                  const std::vector<SubCondition>& subconditions) const;

    /// Pick the answer portion relevant to a row's rule. Returning the whole
    /// answer is an acceptable degenerate result.
    std::string segment_answer(const std::string& answer,
                               const std::string& row_rule) const;

    /// Retry loop around the backend: transport errors, rate-limit signals
    /// and schema-invalid payloads are retried with exponential backoff up
    /// to the attempt budget; throws GatewayError when exhausted.
    GatewayResponse call_backend(const GatewayRequest& request) const;

    std::string backend_id() const;
    const GatewayOptions& options() const { return options_; }

private:
    GatewayRequest make_request(TaskPayload payload) const;

    std::shared_ptr<Backend> backend_;
    GatewayOptions options_;

    struct Limiter;
    std::unique_ptr<Limiter> limiter_;
};

/// Payload conversions (validated payload -> typed result).
std::vector<std::string> ctm_from_payload(const nlohmann::json& payload);
std::vector<std::vector<SubCondition>> csc_from_payload(const nlohmann::json& payload);
SrVerdict ssr_from_payload(const nlohmann::json& payload);

} // namespace ratas
