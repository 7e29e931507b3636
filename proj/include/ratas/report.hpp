#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "ratas/rkt.hpp"

namespace ratas {

/// One rubric row's analysis: which of its atomic rules were fully met,
/// partially met or unmet, with a rendered text block.
struct RowAnalysis {
    std::string row_node_id;
    int score_source_id = 0;
    double weight = 0.0;    // the row's score source
    double row_score = 0.0; // earned share of the total
    double row_max = 0.0;   // = weight
    std::vector<std::string> full;    // leaf node ids
    std::vector<std::string> partial;
    std::vector<std::string> unmet;
    std::string text;

    bool operator==(const RowAnalysis&) const = default;
};

struct ImprovementPoint {
    std::string node_id;
    std::string kind; // "partial" | "unmet"
    std::string text;

    bool operator==(const ImprovementPoint&) const = default;
};

struct ReportTotals {
    double total_score = 0.0;
    double scaled_score = 0.0;
    double max_score = 1.0;

    bool operator==(const ReportTotals&) const = default;
};

/// The two-part structured report: per-row answer analysis plus improvement
/// points for partially met and unmet rules. `text` is the plain rendering.
struct Report {
    std::vector<RowAnalysis> analysis;
    std::vector<ImprovementPoint> improvement_points;
    ReportTotals totals;
    std::string text;

    bool operator==(const Report&) const = default;
};

using ReasonMap = std::map<std::string, std::vector<ReasonEntry>>;

/// Bottom-up reason propagation: every internal node's reason list becomes
/// the ordered concatenation of its children's lists (child-index order),
/// so the root holds every leaf entry. Fills node.reasons and returns the
/// full node-id -> entries map. Requires every leaf to carry its entry.
ReasonMap propagate_reasons(RktNode& graded_root);

/// Render the report from a graded tree. Numbers are formatted to 4
/// decimals; regeneration from the same tree is byte-identical.
Report render_report(const RktNode& graded_root, const ReasonMap& reasons,
                     double max_score = 1.0);

nlohmann::json report_to_json(const Report& report);
Report report_from_json(const nlohmann::json& doc);

} // namespace ratas
