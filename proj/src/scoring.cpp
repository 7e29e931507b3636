#include "ratas/scoring.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <utility>

#include "ratas/errors.hpp"
#include "ratas/text.hpp"

namespace ratas {

namespace {

/// Run fn(0..n-1) on up to `limit` threads. The first exception wins and is
/// rethrown after all workers finish.
void parallel_for(std::size_t n, int limit, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    const std::size_t workers =
        std::min<std::size_t>(n, static_cast<std::size_t>(std::max(limit, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

void aggregate_upward(RktNode& node) {
    if (node.leaf) {
        if (!node.node_score) {
            throw InvariantError("leaf '" + node.id + "' is unscored");
        }
        return;
    }
    for (auto& child : node.children) aggregate_upward(child);
    node.node_score = aggregate(node);
}

} // namespace

double leaf_score_from_verdict(const SrVerdict& verdict,
                               const std::vector<SubCondition>& subconditions) {
    if (subconditions.empty()) return verdict.fulfilled * 1.0 * 1.0;
    double lqap = verdict.lqap;
    double level_score = 1.0;
    if (verdict.matched_level_index &&
        static_cast<std::size_t>(*verdict.matched_level_index) < subconditions.size()) {
        level_score = subconditions[*verdict.matched_level_index].score;
    }
    return verdict.fulfilled * lqap * level_score;
}

SrVerdict score_leaf(RktNode& leaf, const std::string& answer_segment,
                     const Gateway& gateway, double within_row_share) {
    if (!leaf.leaf) throw InvariantError("score_leaf: node '" + leaf.id + "' is internal");
    SrVerdict verdict = gateway.ssr(answer_segment, leaf.criteria, leaf.sub_conditions);
    const double score = leaf_score_from_verdict(verdict, leaf.sub_conditions);
    const double influence = within_row_share * leaf.score_source;

    leaf.node_score = score;
    leaf.verdict = verdict;
    leaf.reasons = {ReasonEntry{leaf.id, leaf.score_source_id, influence,
                                influence * score, verdict.related_content,
                                verdict.reason_text}};
    return verdict;
}

double aggregate(const RktNode& node) {
    if (node.leaf) throw InvariantError("aggregate: node '" + node.id + "' is a leaf");
    double total = 0.0;
    for (const auto& child : node.children) {
        if (!child.node_score) {
            throw InvariantError("aggregate: child '" + child.id + "' is unscored");
        }
        total += child.influence_relative * *child.node_score;
    }
    return total;
}

double row_score(const RktNode& row_node) {
    if (!row_node.node_score) {
        throw InvariantError("row_score: node '" + row_node.id + "' is unscored");
    }
    return *row_node.node_score * row_node.score_source;
}

GradingResult score_answer(const RktNode& root, const std::string& answer,
                           const Gateway& gateway, const ScoreConfig& config,
                           double max_score) {
    if (root.children.empty()) {
        throw std::invalid_argument("score_answer: tree has no row nodes");
    }

    GradingResult result;
    result.rubric_id = root.id;
    result.max_score = max_score;
    result.graded_root = root;
    RktNode& tree = result.graded_root;

    // One segment per row, shared by every leaf below it. Under partial_ok a
    // failed segmentation degrades to the whole answer, which is always a
    // sound segment.
    std::vector<std::string> segments;
    segments.reserve(tree.children.size());
    for (const auto& row : tree.children) {
        try {
            segments.push_back(gateway.segment_answer(answer, row.criteria));
        } catch (const GatewayError& e) {
            if (!config.partial_ok) throw;
            segments.push_back(answer);
            result.warnings.push_back("segmentation failed for row '" + row.id +
                                      "', using the whole answer: " + e.what());
        }
    }

    struct LeafJob {
        RktNode* leaf;
        const std::string* segment;
        double within_row_share;
    };
    std::vector<LeafJob> jobs;
    for (std::size_t r = 0; r < tree.children.size(); ++r) {
        RktNode& row = tree.children[r];
        const double row_influence = row.influence_absolute;
        for_each_node(row, [&](RktNode& node) {
            if (node.leaf) {
                jobs.push_back({&node, &segments[r],
                                node.influence_absolute / row_influence});
            }
        });
    }

    // Per-job warning slots keep the recorded order deterministic no matter
    // how the workers interleave.
    std::vector<std::string> leaf_warnings(jobs.size());
    parallel_for(jobs.size(), config.concurrency_limit, [&](std::size_t i) {
        LeafJob& job = jobs[i];
        try {
            score_leaf(*job.leaf, *job.segment, gateway, job.within_row_share);
        } catch (const GatewayError& e) {
            if (!config.partial_ok) throw;
            const double influence = job.within_row_share * job.leaf->score_source;
            job.leaf->node_score = 0.0;
            job.leaf->reasons = {ReasonEntry{
                job.leaf->id, job.leaf->score_source_id, influence, 0.0, "",
                std::string("[unscored] gateway failure, counted as 0: ") + e.what()}};
            leaf_warnings[i] = "leaf '" + job.leaf->id + "' unscored: " + e.what();
        }
    });
    for (auto& warning : leaf_warnings) {
        if (!warning.empty()) result.warnings.push_back(std::move(warning));
    }

    aggregate_upward(tree);

    double total = 0.0;
    for (const auto& row : tree.children) {
        const double earned = row_score(row);
        result.per_row_scores[row.score_source_id] = earned;
        total += earned;
    }
    result.total_score = total;
    result.scaled_score = total * max_score;

    for_each_node(std::as_const(tree), [&](const RktNode& node) {
        result.per_node_scores[node.id] = node.node_score.value_or(0.0);
    });

    ReasonMap reasons = propagate_reasons(tree);
    result.report = render_report(tree, reasons, max_score);

    result.run_meta.backend_id = gateway.backend_id();
    result.run_meta.answer_words = text::count_words(answer);
    return result;
}

nlohmann::json grading_result_to_json(const GradingResult& result) {
    nlohmann::json doc;
    doc["schema_version"] = 1;
    doc["rubric_id"] = result.rubric_id;
    doc["answer_id"] = result.answer_id;
    doc["total_score"] = result.total_score;
    doc["scaled_score"] = result.scaled_score;
    doc["max_score"] = result.max_score;

    doc["rows"] = nlohmann::json::array();
    for (const auto& section : result.report.analysis) {
        auto it = result.per_row_scores.find(section.score_source_id);
        doc["rows"].push_back({{"row_id", section.row_node_id},
                               {"score_source_id", section.score_source_id},
                               {"score", it != result.per_row_scores.end() ? it->second : 0.0},
                               {"max", section.row_max}});
    }
    doc["nodes"] = nlohmann::json::object();
    for (const auto& [id, score] : result.per_node_scores) doc["nodes"][id] = score;
    doc["report"] = report_to_json(result.report);

    nlohmann::json meta;
    meta["backend_id"] = result.run_meta.backend_id;
    meta["config_hash"] = result.run_meta.config_hash;
    if (result.run_meta.run_id) meta["run_id"] = *result.run_meta.run_id;
    if (result.run_meta.timestamp) meta["timestamp"] = *result.run_meta.timestamp;
    if (result.run_meta.answer_words) meta["answer_words"] = *result.run_meta.answer_words;
    doc["run_meta"] = std::move(meta);

    if (!result.warnings.empty()) doc["warnings"] = result.warnings;
    return doc;
}

GradingResult grading_result_from_json(const nlohmann::json& doc) {
    GradingResult result;
    try {
        if (doc.value("schema_version", 0) != 1) {
            throw ParseError("grading result: unsupported schema_version");
        }
        result.rubric_id = doc.at("rubric_id").get<std::string>();
        result.answer_id = doc.at("answer_id").get<std::string>();
        result.total_score = doc.at("total_score").get<double>();
        result.scaled_score = doc.at("scaled_score").get<double>();
        result.max_score = doc.at("max_score").get<double>();
        for (const auto& row : doc.at("rows")) {
            result.per_row_scores[row.at("score_source_id").get<int>()] =
                row.at("score").get<double>();
        }
        for (auto it = doc.at("nodes").begin(); it != doc.at("nodes").end(); ++it) {
            result.per_node_scores[it.key()] = it->get<double>();
        }
        result.report = report_from_json(doc.at("report"));
        const auto& meta = doc.at("run_meta");
        result.run_meta.backend_id = meta.at("backend_id").get<std::string>();
        result.run_meta.config_hash = meta.at("config_hash").get<std::string>();
        if (meta.contains("run_id")) {
            result.run_meta.run_id = meta.at("run_id").get<std::string>();
        }
        if (meta.contains("timestamp")) {
            result.run_meta.timestamp = meta.at("timestamp").get<std::string>();
        }
        if (meta.contains("answer_words")) {
            result.run_meta.answer_words = meta.at("answer_words").get<std::uint64_t>();
        }
        if (doc.contains("warnings")) {
            result.warnings = doc.at("warnings").get<std::vector<std::string>>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("grading result: ") + e.what());
    }
    return result;
}

} // namespace ratas
