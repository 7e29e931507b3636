#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ratas/gateway.hpp"
#include "ratas/report.hpp"
#include "ratas/rkt.hpp"

namespace ratas {

struct ScoreConfig {
    bool partial_ok = false;   // score failed leaves as 0 with a flagged reason
    int concurrency_limit = 8; // bound on concurrent leaf scoring
};

struct RunMeta {
    std::string backend_id;
    std::string config_hash;
    std::optional<std::string> run_id;
    std::optional<std::string> timestamp; // remote runs only; mock output is reproducible
    std::optional<std::uint64_t> answer_words;

    bool operator==(const RunMeta&) const = default;
};

struct GradingResult {
    std::string rubric_id;
    std::string answer_id;
    double total_score = 0.0;  // fraction of max_score
    double scaled_score = 0.0; // total_score * max_score
    double max_score = 1.0;
    std::map<int, double> per_row_scores;          // rubric row id -> earned fraction
    std::map<std::string, double> per_node_scores; // node id -> node score
    Report report;
    RunMeta run_meta;
    std::vector<std::string> warnings; // partial_ok degradations

    RktNode graded_root; // fully annotated tree copy (not persisted)
};

/// Leaf score: fulfilled x lqap x matched level score, with the implicit
/// (1, 1) pair when the leaf has no sub-conditions.
double leaf_score_from_verdict(const SrVerdict& verdict,
                               const std::vector<SubCondition>& subconditions);

/// Obtain a verdict for one leaf from an already-selected answer segment and
/// annotate the leaf (node_score, verdict, reason entry). `within_row_share`
/// is influence_absolute(leaf) / influence_absolute(row child).
SrVerdict score_leaf(RktNode& leaf, const std::string& answer_segment,
                     const Gateway& gateway, double within_row_share);

/// Weighted child sum for an internal node with scored children.
double aggregate(const RktNode& node);

/// The row's contribution to the total: aggregate share x score source.
double row_score(const RktNode& row_node);

/// Grade an answer against a built tree: segment the answer per row, score
/// all leaves (bounded concurrency), aggregate bottom-up, propagate reasons
/// and render the report. The returned tree copy is fully annotated.
GradingResult score_answer(const RktNode& root, const std::string& answer,
                           const Gateway& gateway, const ScoreConfig& config = {},
                           double max_score = 1.0);

/// Persisted result document (the annotated tree is not embedded).
nlohmann::json grading_result_to_json(const GradingResult& result);
GradingResult grading_result_from_json(const nlohmann::json& doc);

} // namespace ratas
