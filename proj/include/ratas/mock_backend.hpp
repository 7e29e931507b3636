#pragma once

#include <string>
#include <vector>

#include "ratas/gateway.hpp"

namespace ratas {

/// Deterministic backend built on normalized-token-overlap heuristics.
/// A pure function of its inputs: identical requests yield byte-identical
/// payloads across runs and platforms. Never fails.
///
/// Thresholds: coverage >= kFullCoverage counts as a full match,
/// [kPartialCoverage, kFullCoverage) as a partial match, and a paragraph is
/// selected as the relevant segment when its coverage reaches
/// kSegmentCoverage.
class MockBackend : public Backend {
public:
    static constexpr double kFullCoverage = 0.75;
    static constexpr double kPartialCoverage = 0.35;
    static constexpr double kSegmentCoverage = 0.30;

    std::string id() const override { return "mock"; }
    nlohmann::json complete(const GatewayRequest& request) override;

    /// Rule division: sentences first, then coordinating-conjunction ("and")
    /// clauses of at least policy.min_clause_chars. Clauses after the first
    /// are completed with the first clause's subject+modal prefix so each
    /// rule stands alone. Returns the input verbatim when atomic.
    static std::vector<std::string> split_rules(const std::string& criteria,
                                                const RuleDivisionPolicy& policy);

    /// Each sub-condition goes to the child rule with the highest token
    /// coverage; ties pick the lower index.
    static std::vector<std::vector<SubCondition>> assign_subconditions(
        const std::vector<std::string>& child_rules,
        const std::vector<SubCondition>& parent_subconditions);

    /// Coverage-thresholded verdict. A full match selects the level with the
    /// highest score; a partial match selects the best level strictly below
    /// it. In continuous mode `fulfilled` carries the coverage itself.
    static SrVerdict verdict(const std::string& answer_segment,
                             const std::string& criteria,
                             const std::vector<SubCondition>& subconditions,
                             bool continuous);

    /// Paragraph with the highest coverage of the row rule, if it reaches
    /// kSegmentCoverage; otherwise the whole answer.
    static std::string pick_segment(const std::string& answer,
                                    const std::string& row_rule);
};

} // namespace ratas
