#include "ratas/mock_backend.hpp"

#include <algorithm>
#include <cctype>

#include "ratas/text.hpp"

namespace ratas {

namespace {

constexpr std::size_t kMinSentenceChars = 12;

const std::vector<std::string>& modal_words() {
    static const std::vector<std::string> words = {"must", "should", "shall",
                                                   "will", "can", "may"};
    return words;
}

bool has_modal(const std::string& s) {
    for (const auto& token : text::tokenize(s)) {
        for (const auto& m : modal_words()) {
            if (token == m) return true;
        }
    }
    return false;
}

/// "The response must explain X" -> "The response must ". Empty when the
/// clause has no modal.
std::string subject_modal_prefix(const std::string& clause) {
    std::string lower = text::to_lower(clause);
    std::size_t best = std::string::npos;
    std::size_t best_len = 0;
    for (const auto& m : modal_words()) {
        std::size_t pos = 0;
        while ((pos = lower.find(m, pos)) != std::string::npos) {
            bool left_ok = pos == 0 || !std::isalnum(static_cast<unsigned char>(lower[pos - 1]));
            std::size_t end = pos + m.size();
            bool right_ok =
                end == lower.size() || !std::isalnum(static_cast<unsigned char>(lower[end]));
            if (left_ok && right_ok) {
                if (pos < best) {
                    best = pos;
                    best_len = m.size();
                }
                break;
            }
            pos = end;
        }
    }
    if (best == std::string::npos) return {};
    return clause.substr(0, best + best_len) + " ";
}

std::vector<std::string> split_on_and(const std::string& s, std::size_t min_clause) {
    static const std::string kSep = " and ";
    std::vector<std::string> parts;
    std::size_t start = 0;
    std::size_t pos;
    while ((pos = s.find(kSep, start)) != std::string::npos) {
        parts.push_back(s.substr(start, pos - start));
        start = pos + kSep.size();
    }
    parts.push_back(s.substr(start));
    if (parts.size() < 2) return {};

    auto joined_size = [&](std::size_t from) {
        std::size_t total = 0;
        for (std::size_t i = from; i < parts.size(); ++i) {
            total += parts[i].size() + (i > from ? kSep.size() : 0);
        }
        return total;
    };

    std::vector<std::string> fragments;
    std::string cur;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        cur = cur.empty() ? parts[i] : cur + kSep + parts[i];
        if (cur.size() >= min_clause && joined_size(i + 1) >= min_clause) {
            fragments.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) {
        if (cur.size() >= min_clause) {
            fragments.push_back(cur);
        } else if (!fragments.empty()) {
            fragments.back() += kSep + cur;
        }
    }
    if (fragments.size() < 2) return {};
    return fragments;
}

int best_level_index(const std::vector<SubCondition>& subs, bool partial) {
    int best = 0;
    for (std::size_t i = 1; i < subs.size(); ++i) {
        if (subs[i].score > subs[best].score) best = static_cast<int>(i);
    }
    if (!partial) return best;
    // Partial match: best level strictly below the top one, if any.
    int runner = -1;
    for (std::size_t i = 0; i < subs.size(); ++i) {
        if (subs[i].score < subs[best].score &&
            (runner < 0 || subs[i].score > subs[runner].score)) {
            runner = static_cast<int>(i);
        }
    }
    return runner >= 0 ? runner : best;
}

std::string best_excerpt(const std::string& segment, const std::string& criteria) {
    auto sentences = text::split_sentences(segment);
    if (sentences.empty()) return text::trim(segment);
    std::size_t best = 0;
    double best_cov = -1.0;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        double cov = text::coverage(criteria, sentences[i]);
        if (cov > best_cov) {
            best_cov = cov;
            best = i;
        }
    }
    return sentences[best];
}

} // namespace

std::vector<std::string> MockBackend::split_rules(const std::string& criteria,
                                                  const RuleDivisionPolicy& policy) {
    std::string s = text::trim(criteria);
    if (s.size() < policy.atomic_below_chars) return {criteria};

    auto sentences = text::split_sentences(s);
    if (sentences.size() >= 2) {
        bool all_substantial = std::all_of(sentences.begin(), sentences.end(),
                                           [](const std::string& part) {
                                               return part.size() >= kMinSentenceChars;
                                           });
        if (all_substantial) return sentences;
    }

    auto fragments = split_on_and(s, policy.min_clause_chars);
    if (fragments.size() < 2) return {criteria};

    std::string prefix = subject_modal_prefix(fragments.front());
    for (std::size_t i = 1; i < fragments.size(); ++i) {
        if (!prefix.empty() && !has_modal(fragments[i])) {
            fragments[i] = prefix + fragments[i];
        }
    }
    for (auto& f : fragments) f = text::trim(f);
    return fragments;
}

std::vector<std::vector<SubCondition>> MockBackend::assign_subconditions(
    const std::vector<std::string>& child_rules,
    const std::vector<SubCondition>& parent_subconditions) {
    std::vector<std::vector<SubCondition>> out(child_rules.size());
    for (const auto& sc : parent_subconditions) {
        std::size_t best = 0;
        double best_cov = -1.0;
        for (std::size_t j = 0; j < child_rules.size(); ++j) {
            double cov = text::coverage(child_rules[j], sc.quality);
            if (cov > best_cov) {
                best_cov = cov;
                best = j;
            }
        }
        out[best].push_back(sc);
    }
    return out;
}

SrVerdict MockBackend::verdict(const std::string& answer_segment,
                               const std::string& criteria,
                               const std::vector<SubCondition>& subconditions,
                               bool continuous) {
    const double cov = text::coverage(criteria, answer_segment);
    SrVerdict v;
    if (cov < kPartialCoverage) {
        v.fulfilled = 0.0;
        v.lqap = 0.0;
        v.reason_text = "The answer does not address this criterion (token coverage " +
                        text::format_fixed(cov, 2) + ", below " +
                        text::format_fixed(kPartialCoverage, 2) + ").";
        return v;
    }

    const bool full = cov >= kFullCoverage;
    v.fulfilled = continuous ? cov : 1.0;
    v.lqap = 1.0;
    v.related_content = best_excerpt(answer_segment, criteria);
    if (subconditions.empty()) {
        v.reason_text = std::string("Criterion ") +
                        (full ? "satisfied" : "partially satisfied") +
                        " (token coverage " + text::format_fixed(cov, 2) +
                        "); full credit, no quality levels defined.";
        return v;
    }
    const int idx = best_level_index(subconditions, !full);
    v.matched_level_index = idx;
    v.reason_text = std::string("Criterion ") +
                    (full ? "satisfied" : "partially satisfied") +
                    " (token coverage " + text::format_fixed(cov, 2) +
                    "); matched level " + std::to_string(idx + 1) + " \"" +
                    text::excerpt(subconditions[idx].quality, 60) +
                    "\" (level score " +
                    text::format_fixed(subconditions[idx].score, 4) + ").";
    return v;
}

std::string MockBackend::pick_segment(const std::string& answer,
                                      const std::string& row_rule) {
    if (answer.empty()) return {};
    auto paragraphs = text::split_paragraphs(answer);
    if (paragraphs.size() <= 1) return answer;
    std::size_t best = 0;
    double best_cov = -1.0;
    for (std::size_t i = 0; i < paragraphs.size(); ++i) {
        double cov = text::coverage(row_rule, paragraphs[i]);
        if (cov > best_cov) {
            best_cov = cov;
            best = i;
        }
    }
    if (best_cov >= kSegmentCoverage) return paragraphs[best];
    return answer;
}

nlohmann::json MockBackend::complete(const GatewayRequest& request) {
    nlohmann::json payload;
    switch (request.kind()) {
    case TaskKind::Ctm: {
        const auto& req = std::get<CtmRequest>(request.payload);
        payload["rules"] = split_rules(req.criteria, req.policy);
        break;
    }
    case TaskKind::Csc: {
        const auto& req = std::get<CscRequest>(request.payload);
        auto assignments = assign_subconditions(req.child_rules, req.parent_subconditions);
        payload["assignments"] = nlohmann::json::array();
        for (const auto& list : assignments) {
            nlohmann::json entry = nlohmann::json::array();
            for (const auto& sc : list) {
                entry.push_back({{"quality", sc.quality}, {"score", sc.score}});
            }
            payload["assignments"].push_back(std::move(entry));
        }
        break;
    }
    case TaskKind::Ssr: {
        const auto& req = std::get<SsrRequest>(request.payload);
        SrVerdict v = verdict(req.answer_segment, req.criteria, req.subconditions,
                              request.continuous_sp);
        payload["fulfilled"] = v.fulfilled;
        payload["matched_level"] =
            v.matched_level_index ? nlohmann::json(*v.matched_level_index)
                                  : nlohmann::json(nullptr);
        payload["lqap"] = v.lqap;
        payload["related_content"] = v.related_content;
        payload["reason"] = v.reason_text;
        break;
    }
    case TaskKind::Segment: {
        const auto& req = std::get<SegmentRequest>(request.payload);
        payload["segment"] = pick_segment(req.answer, req.row_rule);
        break;
    }
    }
    return payload;
}

} // namespace ratas
