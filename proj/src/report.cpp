#include "ratas/report.hpp"

#include <cmath>

#include "ratas/errors.hpp"
#include "ratas/text.hpp"

namespace ratas {

namespace {

constexpr double kScoreEps = 1e-12;
constexpr std::size_t kQuoteChars = 80;

const std::vector<ReasonEntry>& propagate(RktNode& node, ReasonMap& out) {
    if (node.leaf) {
        if (node.reasons.empty()) {
            throw InvariantError("leaf '" + node.id + "' carries no verdict entry");
        }
    } else {
        node.reasons.clear();
        for (auto& child : node.children) {
            const auto& child_reasons = propagate(child, out);
            node.reasons.insert(node.reasons.end(), child_reasons.begin(),
                                child_reasons.end());
        }
    }
    out[node.id] = node.reasons;
    return node.reasons;
}

/// The highest level a leaf can match: its best sub-condition, or the
/// implicit full level when it has none.
SubCondition top_level(const RktNode& leaf) {
    if (leaf.sub_conditions.empty()) return {"full completion", 1.0};
    const SubCondition* best = &leaf.sub_conditions.front();
    for (const auto& sc : leaf.sub_conditions) {
        if (sc.score > best->score) best = &sc;
    }
    return *best;
}

SubCondition achieved_level(const RktNode& leaf) {
    if (leaf.verdict && leaf.verdict->matched_level_index &&
        *leaf.verdict->matched_level_index >= 0 &&
        static_cast<std::size_t>(*leaf.verdict->matched_level_index) <
            leaf.sub_conditions.size()) {
        return leaf.sub_conditions[*leaf.verdict->matched_level_index];
    }
    if (leaf.sub_conditions.empty()) return {"full completion", 1.0};
    return {"a lower level", 0.0};
}

std::string quoted(const std::string& s) {
    return "\"" + text::excerpt(s, kQuoteChars) + "\"";
}

std::string level_phrase(const SubCondition& level) {
    return quoted(level.quality) + " (level score " +
           text::format_fixed(level.score, 4) + ")";
}

} // namespace

ReasonMap propagate_reasons(RktNode& graded_root) {
    ReasonMap out;
    propagate(graded_root, out);
    return out;
}

Report render_report(const RktNode& graded_root, const ReasonMap& reasons,
                     double max_score) {
    Report report;
    std::string body = "Answer Analysis:\n";

    double total = 0.0;
    for (const auto& row : graded_root.children) {
        RowAnalysis section;
        section.row_node_id = row.id;
        section.score_source_id = row.score_source_id;
        section.weight = row.score_source;
        section.row_max = row.score_source;
        section.row_score =
            row.node_score ? *row.node_score * row.score_source : 0.0;
        total += section.row_score;

        std::string lines;
        auto it = reasons.find(row.id);
        if (it == reasons.end()) {
            throw InvariantError("no propagated reasons for row node '" + row.id + "'");
        }
        for (const ReasonEntry& entry : it->second) {
            const RktNode* leaf = find_node(row, entry.node_id);
            if (!leaf) {
                throw InvariantError("reason entry for unknown node '" + entry.node_id + "'");
            }
            const SubCondition best = top_level(*leaf);
            const double leaf_max = entry.influence_on_scoring * best.score;
            const std::string earned = "rewarded " +
                                       text::format_fixed(entry.rewarded_score, 4) +
                                       " of " + text::format_fixed(leaf_max, 4) + ".";
            if (entry.rewarded_score <= kScoreEps) {
                section.unmet.push_back(entry.node_id);
                lines += "  - Not addressed: " + quoted(leaf->criteria) +
                         ": maximum attainable level " + level_phrase(best) + "; " +
                         earned + "\n";
                report.improvement_points.push_back(
                    {entry.node_id, "unmet",
                     quoted(leaf->criteria) + ": not addressed; maximum attainable level " +
                         level_phrase(best) + ", worth " +
                         text::format_fixed(leaf_max, 4) + "."});
            } else if (entry.rewarded_score >= leaf_max - kScoreEps) {
                section.full.push_back(entry.node_id);
                lines += "  - Fully satisfied: " + quoted(leaf->criteria) +
                         ": matched level " + level_phrase(achieved_level(*leaf)) + "; " +
                         earned + "\n";
            } else {
                section.partial.push_back(entry.node_id);
                const SubCondition achieved = achieved_level(*leaf);
                lines += "  - Partially met: " + quoted(leaf->criteria) +
                         ": achieved level " + level_phrase(achieved) + " vs maximum " +
                         level_phrase(best) + "; " + earned + "\n";
                report.improvement_points.push_back(
                    {entry.node_id, "partial",
                     quoted(leaf->criteria) + ": close the gap between achieved level " +
                         level_phrase(achieved) + " and maximum level " +
                         level_phrase(best) + "; " +
                         text::format_fixed(entry.rewarded_score, 4) + " of " +
                         text::format_fixed(leaf_max, 4) + " earned."});
            }
        }

        section.text = "For rubric row " + std::to_string(section.score_source_id) +
                       " (node " + section.row_node_id + ", weight " +
                       text::format_fixed(section.weight * 100.0, 4) +
                       "% of the total): awarded " +
                       text::format_fixed(section.row_score, 4) + " of " +
                       text::format_fixed(section.row_max, 4) + ".\n" + lines;
        body += section.text;
        report.analysis.push_back(std::move(section));
    }

    body += "\nImprovement Points:\n";
    if (report.improvement_points.empty()) {
        body += "  (none)\n";
    } else {
        for (std::size_t i = 0; i < report.improvement_points.size(); ++i) {
            body += std::to_string(i + 1) + ". " + report.improvement_points[i].text + "\n";
        }
    }

    report.totals.total_score = total;
    report.totals.scaled_score = total * max_score;
    report.totals.max_score = max_score;
    body += "\nTotal score: " + text::format_fixed(total, 4) + " of 1.0000 (scaled " +
            text::format_fixed(report.totals.scaled_score, 4) + ", max score " +
            text::format_fixed(max_score, 4) + ").\n";
    report.text = std::move(body);
    return report;
}

nlohmann::json report_to_json(const Report& report) {
    nlohmann::json doc;
    doc["analysis"] = nlohmann::json::array();
    for (const auto& section : report.analysis) {
        doc["analysis"].push_back({{"row_node_id", section.row_node_id},
                                   {"score_source_id", section.score_source_id},
                                   {"weight", section.weight},
                                   {"row_score", section.row_score},
                                   {"row_max", section.row_max},
                                   {"full", section.full},
                                   {"partial", section.partial},
                                   {"unmet", section.unmet},
                                   {"text", section.text}});
    }
    doc["improvement_points"] = nlohmann::json::array();
    for (const auto& point : report.improvement_points) {
        doc["improvement_points"].push_back(
            {{"node_id", point.node_id}, {"kind", point.kind}, {"text", point.text}});
    }
    doc["totals"] = {{"total_score", report.totals.total_score},
                     {"scaled_score", report.totals.scaled_score},
                     {"max_score", report.totals.max_score}};
    doc["text"] = report.text;
    return doc;
}

Report report_from_json(const nlohmann::json& doc) {
    Report report;
    try {
        for (const auto& section_doc : doc.at("analysis")) {
            RowAnalysis section;
            section.row_node_id = section_doc.at("row_node_id").get<std::string>();
            section.score_source_id = section_doc.at("score_source_id").get<int>();
            section.weight = section_doc.at("weight").get<double>();
            section.row_score = section_doc.at("row_score").get<double>();
            section.row_max = section_doc.at("row_max").get<double>();
            section.full = section_doc.at("full").get<std::vector<std::string>>();
            section.partial = section_doc.at("partial").get<std::vector<std::string>>();
            section.unmet = section_doc.at("unmet").get<std::vector<std::string>>();
            section.text = section_doc.at("text").get<std::string>();
            report.analysis.push_back(std::move(section));
        }
        for (const auto& point_doc : doc.at("improvement_points")) {
            report.improvement_points.push_back(
                {point_doc.at("node_id").get<std::string>(),
                 point_doc.at("kind").get<std::string>(),
                 point_doc.at("text").get<std::string>()});
        }
        report.totals.total_score = doc.at("totals").at("total_score").get<double>();
        report.totals.scaled_score = doc.at("totals").at("scaled_score").get<double>();
        report.totals.max_score = doc.at("totals").at("max_score").get<double>();
        report.text = doc.at("text").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("report: ") + e.what());
    }
    return report;
}

} // namespace ratas
