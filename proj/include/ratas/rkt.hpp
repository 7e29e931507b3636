#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ratas/gateway.hpp"

namespace ratas {

/// One leaf's contribution to the graded result: where it sits, how much of
/// the total score it controls, and what it earned, with the backing text.
struct ReasonEntry {
    std::string node_id;
    int score_source_id = 0;
    double influence_on_scoring = 0.0; // max share of the total score this leaf controls
    double rewarded_score = 0.0;       // share actually earned, in [0, influence_on_scoring]
    std::string related_content;
    std::string reason_text;

    bool operator==(const ReasonEntry&) const = default;
};

/// A rubric-knowledge-tree node.
///
/// Contextual attributes are fixed at construction; node_score, verdict and
/// reasons are scoring attributes, unset until an answer is graded.
/// influence_relative is the node's weight among its siblings (siblings sum
/// to 1); influence_absolute is the product of influence_relative along the
/// path from the root. Cross-row weighting is carried by score_source, not
/// by influence.
struct RktNode {
    std::string id; // root id = rubric id; child ids append ".<index>"
    bool leaf = true;
    std::string criteria;
    std::vector<std::string> criteria_simplified_version;
    int separate_rule_number = 0; // always |criteria_simplified_version|
    double score_source = 0.0;    // owning row's share of the total score
    int score_source_id = 0;      // rubric row id; 0 at the root
    double influence_relative = 1.0;
    double influence_absolute = 1.0;
    std::vector<SubCondition> sub_conditions;
    std::vector<RktNode> children;
    bool cap_forced = false; // leaf forced at the depth cap before reaching an SR

    // Scoring attributes.
    std::optional<double> node_score;
    std::optional<SrVerdict> verdict;  // leaves only
    std::vector<ReasonEntry> reasons;  // subtree's leaf entries, child-index order

    bool operator==(const RktNode&) const = default;
};

struct RktDocument {
    double max_score = 1.0;
    RktNode root;
};

/// Document mirroring the node fields (snake_case keys), with top-level
/// schema_version and max_score. Scoring attributes appear when present.
nlohmann::json serialize_rkt(const RktNode& root, double max_score = 1.0);

/// Inverse of serialize_rkt. Runs check_rkt_invariants on the loaded tree.
RktDocument deserialize_rkt(const nlohmann::json& document);

/// Structural checks: unique parent-prefixed ids, leaf <=> no children,
/// separate_rule_number consistency, sibling influence sums of 1 (1e-9) and
/// influence_absolute products. Throws InvariantError.
void check_rkt_invariants(const RktNode& root);

void for_each_node(const RktNode& root, const std::function<void(const RktNode&)>& fn);
void for_each_node(RktNode& root, const std::function<void(RktNode&)>& fn);

const RktNode* find_node(const RktNode& root, std::string_view id);

std::vector<const RktNode*> collect_leaves(const RktNode& root);

} // namespace ratas
