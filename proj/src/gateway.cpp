#include "ratas/gateway.hpp"

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <mutex>
#include <random>
#include <thread>

#include "ratas/text.hpp"

namespace ratas {

const char* task_name(TaskKind kind) {
    switch (kind) {
    case TaskKind::Ctm: return "ctm";
    case TaskKind::Csc: return "csc";
    case TaskKind::Ssr: return "ssr";
    case TaskKind::Segment: return "segment";
    }
    return "unknown";
}

TaskKind GatewayRequest::kind() const {
    switch (payload.index()) {
    case 0: return TaskKind::Ctm;
    case 1: return TaskKind::Csc;
    case 2: return TaskKind::Ssr;
    default: return TaskKind::Segment;
    }
}

namespace {

bool is_number(const nlohmann::json& v) { return v.is_number(); }

std::string validate_ctm(const nlohmann::json& payload) {
    if (!payload.is_object() || !payload.contains("rules")) return "missing 'rules'";
    const auto& rules = payload.at("rules");
    if (!rules.is_array() || rules.empty()) return "'rules' must be a non-empty array";
    for (const auto& r : rules) {
        if (!r.is_string() || r.get<std::string>().empty()) {
            return "'rules' entries must be non-empty strings";
        }
    }
    return {};
}

std::string validate_csc(const CscRequest& request, const nlohmann::json& payload) {
    if (!payload.is_object() || !payload.contains("assignments")) {
        return "missing 'assignments'";
    }
    const auto& assignments = payload.at("assignments");
    if (!assignments.is_array() || assignments.size() != request.child_rules.size()) {
        return "'assignments' must have one entry per child rule";
    }
    std::vector<bool> covered(request.parent_subconditions.size(), false);
    for (const auto& entry : assignments) {
        if (!entry.is_array()) return "'assignments' entries must be arrays";
        for (const auto& sc : entry) {
            if (!sc.is_object() || !sc.contains("quality") || !sc.contains("score") ||
                !sc.at("quality").is_string() || !is_number(sc.at("score"))) {
                return "assignment items must be {quality, score} objects";
            }
            const std::string quality = sc.at("quality").get<std::string>();
            const double score = sc.at("score").get<double>();
            bool known = false;
            for (std::size_t i = 0; i < request.parent_subconditions.size(); ++i) {
                const auto& parent = request.parent_subconditions[i];
                if (parent.quality == quality && parent.score == score) {
                    covered[i] = true;
                    known = true;
                }
            }
            if (!known) return "assignment item does not match any parent sub-condition";
        }
    }
    for (std::size_t i = 0; i < covered.size(); ++i) {
        if (!covered[i]) {
            return "parent sub-condition " + std::to_string(i) + " assigned to no child";
        }
    }
    return {};
}

std::string validate_ssr(const SsrRequest& request, bool continuous,
                         const nlohmann::json& payload) {
    if (!payload.is_object()) return "payload must be an object";
    for (const char* key : {"fulfilled", "matched_level", "lqap", "related_content", "reason"}) {
        if (!payload.contains(key)) return std::string("missing '") + key + "'";
    }
    if (!is_number(payload.at("fulfilled"))) return "'fulfilled' must be a number";
    const double fulfilled = payload.at("fulfilled").get<double>();
    if (continuous) {
        if (fulfilled < 0.0 || fulfilled > 1.0) return "'fulfilled' outside [0, 1]";
    } else if (fulfilled != 0.0 && fulfilled != 1.0) {
        return "'fulfilled' must be 0 or 1 in binary mode";
    }
    if (!is_number(payload.at("lqap"))) return "'lqap' must be a number";
    const double lqap = payload.at("lqap").get<double>();
    if (lqap < 0.0 || lqap > 1.0) return "'lqap' outside [0, 1]";

    const auto& matched = payload.at("matched_level");
    if (!matched.is_null()) {
        if (!matched.is_number_integer()) return "'matched_level' must be an integer or null";
        const auto idx = matched.get<long long>();
        if (idx < 0 || static_cast<std::size_t>(idx) >= request.subconditions.size()) {
            return "'matched_level' out of range";
        }
    } else if (fulfilled > 0.0 && !request.subconditions.empty()) {
        return "'matched_level' required when fulfilled with sub-conditions present";
    }

    if (!payload.at("reason").is_string() ||
        payload.at("reason").get<std::string>().empty()) {
        return "'reason' must be a non-empty string";
    }
    if (!payload.at("related_content").is_string()) return "'related_content' must be a string";
    const std::string related = payload.at("related_content").get<std::string>();
    if (!related.empty() && !text::contains_normalized(request.answer_segment, related)) {
        return "'related_content' is not an excerpt of the answer segment";
    }
    return {};
}

std::string validate_segment(const SegmentRequest& request, const nlohmann::json& payload) {
    if (!payload.is_object() || !payload.contains("segment") ||
        !payload.at("segment").is_string()) {
        return "missing string 'segment'";
    }
    const std::string segment = payload.at("segment").get<std::string>();
    if (segment.empty() || segment == request.answer) return {};
    if (text::contains_normalized(request.answer, segment)) return {};
    // Concatenated excerpts: every non-blank line must come from the answer.
    for (const auto& line : text::split_paragraphs(segment)) {
        if (!text::contains_normalized(request.answer, line)) {
            return "'segment' is not an excerpt of the answer";
        }
    }
    return {};
}

} // namespace

std::string validate_task_payload(const GatewayRequest& request,
                                  const nlohmann::json& payload) {
    switch (request.kind()) {
    case TaskKind::Ctm:
        return validate_ctm(payload);
    case TaskKind::Csc:
        return validate_csc(std::get<CscRequest>(request.payload), payload);
    case TaskKind::Ssr:
        return validate_ssr(std::get<SsrRequest>(request.payload), request.continuous_sp,
                            payload);
    case TaskKind::Segment:
        return validate_segment(std::get<SegmentRequest>(request.payload), payload);
    }
    return "unknown task";
}

std::chrono::milliseconds backoff_delay(const GatewayOptions& options, int attempt,
                                        double unit) {
    double delay = static_cast<double>(options.backoff_base.count()) *
                   std::pow(options.backoff_factor, attempt - 1);
    delay *= 1.0 + options.backoff_jitter * std::clamp(unit, -1.0, 1.0);
    return std::chrono::milliseconds(static_cast<long long>(std::max(0.0, delay)));
}

std::vector<std::string> ctm_from_payload(const nlohmann::json& payload) {
    return payload.at("rules").get<std::vector<std::string>>();
}

std::vector<std::vector<SubCondition>> csc_from_payload(const nlohmann::json& payload) {
    std::vector<std::vector<SubCondition>> out;
    for (const auto& entry : payload.at("assignments")) {
        std::vector<SubCondition> list;
        for (const auto& sc : entry) {
            list.push_back({sc.at("quality").get<std::string>(),
                            sc.at("score").get<double>()});
        }
        out.push_back(std::move(list));
    }
    return out;
}

SrVerdict ssr_from_payload(const nlohmann::json& payload) {
    SrVerdict verdict;
    verdict.fulfilled = payload.at("fulfilled").get<double>();
    if (!payload.at("matched_level").is_null()) {
        verdict.matched_level_index = payload.at("matched_level").get<int>();
    }
    verdict.lqap = payload.at("lqap").get<double>();
    // Unmet rules carry no level alignment, whatever the backend said.
    if (verdict.fulfilled == 0.0) verdict.lqap = 0.0;
    verdict.related_content = payload.at("related_content").get<std::string>();
    verdict.reason_text = payload.at("reason").get<std::string>();
    return verdict;
}

struct Gateway::Limiter {
    std::mutex mutex;
    std::condition_variable slot_freed;
    int in_flight = 0;

    double tokens;
    std::chrono::steady_clock::time_point last_refill;

    std::mt19937_64 rng;

    explicit Limiter(const GatewayOptions& options)
        : tokens(options.bucket_capacity),
          last_refill(std::chrono::steady_clock::now()),
          rng(options.jitter_seed != 0 ? options.jitter_seed
                                       : std::random_device{}()) {}
};

Gateway::Gateway(std::shared_ptr<Backend> backend, GatewayOptions options)
    : backend_(std::move(backend)), options_(options),
      limiter_(std::make_unique<Limiter>(options_)) {
    if (!backend_) throw std::invalid_argument("gateway requires a backend");
    if (options_.attempt_budget < 1) {
        throw std::invalid_argument("attempt_budget must be >= 1");
    }
    if (options_.max_in_flight < 1) {
        throw std::invalid_argument("max_in_flight must be >= 1");
    }
}

Gateway::~Gateway() = default;

std::string Gateway::backend_id() const { return backend_->id(); }

GatewayRequest Gateway::make_request(TaskPayload payload) const {
    GatewayRequest request;
    request.payload = std::move(payload);
    request.attempt_budget = options_.attempt_budget;
    request.timeout = options_.timeout;
    request.continuous_sp = options_.continuous_sp;
    return request;
}

GatewayResponse Gateway::call_backend(const GatewayRequest& request) const {
    if (request.attempt_budget < 1) {
        throw std::invalid_argument("attempt_budget must be >= 1");
    }

    // Releases an in-flight slot on every exit path.
    struct SlotGuard {
        Limiter* limiter;
        int max_in_flight;
        bool held = false;

        void acquire() {
            std::unique_lock lock(limiter->mutex);
            limiter->slot_freed.wait(lock,
                                     [&] { return limiter->in_flight < max_in_flight; });
            ++limiter->in_flight;
            held = true;
        }
        void release() {
            if (!held) return;
            {
                std::lock_guard lock(limiter->mutex);
                --limiter->in_flight;
            }
            limiter->slot_freed.notify_one();
            held = false;
        }
        ~SlotGuard() { release(); }
    };

    const bool throttle = backend_->rate_limited();
    std::string last_error;
    for (int attempt = 1; attempt <= request.attempt_budget; ++attempt) {
        SlotGuard slot{limiter_.get(), options_.max_in_flight};
        if (throttle) {
            slot.acquire();
            // Token bucket: refill by elapsed time, then take one token or wait.
            std::unique_lock lock(limiter_->mutex);
            for (;;) {
                auto now = std::chrono::steady_clock::now();
                double elapsed = std::chrono::duration<double>(now - limiter_->last_refill).count();
                limiter_->tokens = std::min(options_.bucket_capacity,
                                            limiter_->tokens +
                                                elapsed * options_.bucket_refill_per_sec);
                limiter_->last_refill = now;
                if (limiter_->tokens >= 1.0) {
                    limiter_->tokens -= 1.0;
                    break;
                }
                double wait_s = (1.0 - limiter_->tokens) /
                                std::max(options_.bucket_refill_per_sec, 1e-9);
                lock.unlock();
                std::this_thread::sleep_for(std::chrono::duration<double>(wait_s));
                lock.lock();
            }
        }

        auto start = std::chrono::steady_clock::now();
        bool retryable = true;
        try {
            nlohmann::json payload = backend_->complete(request);
            slot.release();
            std::string problem = validate_task_payload(request, payload);
            if (problem.empty()) {
                GatewayResponse response;
                response.payload = std::move(payload);
                response.backend_id = backend_->id();
                response.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
                    std::chrono::steady_clock::now() - start);
                response.attempts = attempt;
                return response;
            }
            last_error = std::string(task_name(request.kind())) +
                         ": invalid payload: " + problem;
        } catch (const TransportError& e) {
            slot.release();
            last_error = std::string(task_name(request.kind())) + ": " + e.what();
            retryable = e.retryable;
        }

        if (!retryable) break;
        if (attempt < request.attempt_budget && options_.backoff_base.count() > 0) {
            double unit;
            {
                std::lock_guard lock(limiter_->mutex);
                unit = std::uniform_real_distribution<double>(-1.0, 1.0)(limiter_->rng);
            }
            std::this_thread::sleep_for(backoff_delay(options_, attempt, unit));
        }
    }
    throw GatewayError(std::string(task_name(request.kind())) +
                           " failed after retries: " + last_error,
                       request.attempt_budget);
}

std::vector<std::string> Gateway::ctm(const std::string& criteria,
                                      const RuleDivisionPolicy& policy) const {
    if (text::trim(criteria).empty()) {
        throw std::invalid_argument("ctm: criteria must be non-empty");
    }
    auto response = call_backend(make_request(CtmRequest{criteria, policy}));
    return ctm_from_payload(response.payload);
}

std::vector<std::vector<SubCondition>> Gateway::csc(
    const std::vector<std::string>& child_rules,
    const std::vector<SubCondition>& parent_subconditions) const {
    if (child_rules.empty()) {
        throw std::invalid_argument("csc: child_rules must be non-empty");
    }
    if (parent_subconditions.empty()) {
        return std::vector<std::vector<SubCondition>>(child_rules.size());
    }
    if (child_rules.size() == 1) {
        return {parent_subconditions};
    }
    auto response =
        call_backend(make_request(CscRequest{child_rules, parent_subconditions}));
    return csc_from_payload(response.payload);
}

SrVerdict Gateway::ssr(const std::string& answer_segment, const std::string& criteria,
                       const std::vector<SubCondition>& subconditions) const {
    if (text::trim(criteria).empty()) {
        throw std::invalid_argument("ssr: criteria must be non-empty");
    }
    if (text::trim(answer_segment).empty()) {
        SrVerdict verdict;
        verdict.fulfilled = 0.0;
        verdict.lqap = 0.0;
        verdict.reason_text =
            "The relevant answer segment is empty; the criterion is not addressed.";
        return verdict;
    }
    auto response =
        call_backend(make_request(SsrRequest{answer_segment, criteria, subconditions}));
    return ssr_from_payload(response.payload);
}

std::string Gateway::segment_answer(const std::string& answer,
                                    const std::string& row_rule) const {
    if (text::trim(answer).empty()) return {};
    auto response = call_backend(make_request(SegmentRequest{answer, row_rule}));
    return response.payload.at("segment").get<std::string>();
}

} // namespace ratas
