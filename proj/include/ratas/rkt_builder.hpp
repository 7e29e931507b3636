#pragma once

#include <string>
#include <vector>

#include "ratas/gateway.hpp"
#include "ratas/rkt.hpp"
#include "ratas/rubric.hpp"

namespace ratas {

struct BuildConfig {
    int depth_cap = 4; // rows sit at depth 1; nodes at the cap are not expanded
    RuleDivisionPolicy policy;
};

struct BuildResult {
    RktNode root;
    std::vector<std::string> warnings;
};

/// Construct the rubric knowledge tree for a validated rubric.
///
/// The root gets one child per rubric row (criteria = the row's basic rule,
/// score_source / score_source_id / sub_conditions from the row; rows with no
/// levels get the implicit level (basic rule, 1.0)). Children split their
/// parent's influence equally. Expansion continues until every leaf is
/// atomic or the depth cap forces it (recorded as a warning and flagged on
/// the node). Gateway failures surface as GatewayError naming the node.
BuildResult build_rkt(const Rubric& rubric, const Gateway& gateway,
                      const BuildConfig& config = {});

/// Expand one non-atomic leaf a single level: one child per simplified rule,
/// each with its own ctm split, influence_relative = 1/parent rule count,
/// inherited score source, and sub-conditions distributed via csc.
void expand_node(RktNode& node, const Gateway& gateway, const BuildConfig& config);

/// Content hash key for tree caching: rubric document + build-relevant
/// configuration + backend identity.
std::string tree_cache_key(const Rubric& rubric, const BuildConfig& config,
                           const std::string& backend_id,
                           const std::string& template_version);

} // namespace ratas
