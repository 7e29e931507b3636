#include "ratas/rkt_builder.hpp"

#include "ratas/config.hpp"
#include "ratas/errors.hpp"

namespace ratas {

namespace {

/// Wrap gateway failures with the node being built.
template <typename Fn>
auto at_node(const std::string& node_id, Fn&& fn) {
    try {
        return fn();
    } catch (const GatewayError& e) {
        throw GatewayError("while building node '" + node_id + "': " + e.what(),
                           e.attempts);
    }
}

void expand_subtree(RktNode& node, const Gateway& gateway, const BuildConfig& config,
                    int depth, std::vector<std::string>& warnings) {
    if (node.separate_rule_number <= 1) return; // already an SR
    if (depth >= config.depth_cap) {
        node.cap_forced = true;
        warnings.push_back("depth cap " + std::to_string(config.depth_cap) +
                           " reached at node '" + node.id +
                           "'; treating it as a simplified rule");
        return;
    }
    expand_node(node, gateway, config);
    for (auto& child : node.children) {
        expand_subtree(child, gateway, config, depth + 1, warnings);
    }
}

} // namespace

void expand_node(RktNode& node, const Gateway& gateway, const BuildConfig& config) {
    if (!node.leaf) throw InvariantError("expand_node: node '" + node.id + "' already expanded");
    if (node.separate_rule_number <= 1) {
        throw InvariantError("expand_node: node '" + node.id + "' is already atomic");
    }

    auto assignments = at_node(node.id, [&] {
        return gateway.csc(node.criteria_simplified_version, node.sub_conditions);
    });

    // Built aside and committed only once every gateway call has succeeded,
    // so a failure leaves the node unexpanded.
    std::vector<RktNode> children;
    const double share = 1.0 / static_cast<double>(node.separate_rule_number);
    for (std::size_t i = 0; i < node.criteria_simplified_version.size(); ++i) {
        RktNode child;
        child.id = node.id + "." + std::to_string(i);
        child.leaf = true;
        child.criteria = node.criteria_simplified_version[i];
        child.criteria_simplified_version =
            at_node(child.id, [&] { return gateway.ctm(child.criteria, config.policy); });
        child.separate_rule_number =
            static_cast<int>(child.criteria_simplified_version.size());
        child.influence_relative = share;
        child.influence_absolute = node.influence_absolute * share;
        child.score_source = node.score_source;
        child.score_source_id = node.score_source_id;
        child.sub_conditions = assignments[i];
        children.push_back(std::move(child));
    }
    node.leaf = false;
    node.children = std::move(children);
}

BuildResult build_rkt(const Rubric& rubric, const Gateway& gateway,
                      const BuildConfig& config) {
    if (rubric.rows.empty()) throw std::invalid_argument("build_rkt: rubric has no rows");
    if (config.depth_cap < 1) throw std::invalid_argument("build_rkt: depth_cap must be >= 1");

    BuildResult result;
    RktNode& root = result.root;
    root.id = rubric.rubric_id;
    root.leaf = false;
    root.separate_rule_number = static_cast<int>(rubric.rows.size());
    root.score_source = 1.0;
    root.score_source_id = 0;
    root.influence_relative = 1.0;
    root.influence_absolute = 1.0;

    std::string all_rules;
    for (const auto& row : rubric.rows) {
        if (!all_rules.empty()) all_rules += "\n";
        all_rules += row.basic_rule;
        root.criteria_simplified_version.push_back(row.basic_rule);
    }
    root.criteria = all_rules;

    const double share = 1.0 / static_cast<double>(rubric.rows.size());
    for (std::size_t i = 0; i < rubric.rows.size(); ++i) {
        const auto& row = rubric.rows[i];
        RktNode child;
        child.id = root.id + "." + std::to_string(i);
        child.leaf = true;
        child.criteria = row.basic_rule;
        child.criteria_simplified_version =
            at_node(child.id, [&] { return gateway.ctm(child.criteria, config.policy); });
        child.separate_rule_number =
            static_cast<int>(child.criteria_simplified_version.size());
        child.influence_relative = share;
        child.influence_absolute = share;
        child.score_source = row.score_source;
        child.score_source_id = row.row_id;
        if (row.levels.empty()) {
            // A row without levels behaves as a single implicit full level.
            child.sub_conditions.push_back({row.basic_rule, 1.0});
        } else {
            for (const auto& level : row.levels) {
                child.sub_conditions.push_back({level.quality_description, level.score_level});
            }
        }
        root.children.push_back(std::move(child));
    }

    for (auto& child : root.children) {
        expand_subtree(child, gateway, config, 1, result.warnings);
    }

    check_rkt_invariants(root);
    return result;
}

std::string tree_cache_key(const Rubric& rubric, const BuildConfig& config,
                           const std::string& backend_id,
                           const std::string& template_version) {
    std::string blob = serialize_rubric(rubric).dump();
    blob += "|depth_cap=" + std::to_string(config.depth_cap);
    blob += "|atomic_below=" + std::to_string(config.policy.atomic_below_chars);
    blob += "|min_clause=" + std::to_string(config.policy.min_clause_chars);
    blob += "|backend=" + backend_id;
    blob += "|templates=" + template_version;
    return fnv1a_hex(blob);
}

} // namespace ratas
