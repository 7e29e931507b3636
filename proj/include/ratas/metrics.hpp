#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace ratas {

/// Error metrics for a batch of (predicted, gold) scores. r2 and pearson_r
/// are absent when the data's variance makes them undefined.
struct EvalMetrics {
    double mae = 0.0;
    double rmse = 0.0;
    std::optional<double> r2;
    std::optional<double> pearson_r;
    std::size_t n = 0;
};

/// ICC(2,1): two-way random effects, absolute agreement, single measurement.
struct ReliabilityResult {
    double icc = 0.0;
    std::size_t runs = 0;
    std::size_t subjects = 0;
    bool degenerate = false; // all-identical grid; icc = 1.0 by convention
};

/// One evaluated answer. word_count overrides counting answer_text when set.
struct EvalRecord {
    std::string answer_id;
    std::string answer_text;
    double predicted = 0.0;
    double gold = 0.0;
    std::string run_id = "run-1";
    std::optional<std::size_t> word_count;

    std::size_t words() const;
};

/// MAE, RMSE, R^2 and Pearson's r over equal-length score vectors in [0, 1].
/// Throws std::invalid_argument on empty or mismatched input.
EvalMetrics compute_metrics(const std::vector<double>& predicted,
                            const std::vector<double>& gold);

/// ICC(2,1) over a complete subjects x runs grid (>= 2 of each).
ReliabilityResult compute_icc(const std::vector<std::vector<double>>& score_matrix);

/// Partition by word count; records at or under the threshold land in the
/// first ("under") bucket.
std::pair<std::vector<EvalRecord>, std::vector<EvalRecord>> split_by_length(
    const std::vector<EvalRecord>& records, std::size_t threshold_words);

struct MetricsRow {
    std::string method;
    std::string dataset;
    EvalMetrics metrics;
};

/// Aligned plain-text table with the columns Method, Dataset, MAE, RMSE,
/// R², Pearson's r. Undefined statistics render as "undef".
std::string render_metrics_table(const std::vector<MetricsRow>& rows);

nlohmann::json metrics_to_json(const EvalMetrics& metrics);

} // namespace ratas
