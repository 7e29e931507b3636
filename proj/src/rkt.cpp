#include "ratas/rkt.hpp"

#include <cmath>
#include <unordered_set>

#include "ratas/errors.hpp"

namespace ratas {

namespace {

constexpr double kInfluenceTolerance = 1e-9;

nlohmann::json subconditions_to_json(const std::vector<SubCondition>& subs) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& sc : subs) {
        arr.push_back({{"quality", sc.quality}, {"score", sc.score}});
    }
    return arr;
}

std::vector<SubCondition> subconditions_from_json(const nlohmann::json& arr,
                                                  const std::string& where) {
    if (!arr.is_array()) throw ParseError(where + ": expected an array");
    std::vector<SubCondition> subs;
    for (const auto& sc : arr) {
        if (!sc.is_object() || !sc.contains("quality") || !sc.contains("score")) {
            throw ParseError(where + ": entries must be {quality, score} objects");
        }
        subs.push_back({sc.at("quality").get<std::string>(), sc.at("score").get<double>()});
    }
    return subs;
}

nlohmann::json verdict_to_json(const SrVerdict& v) {
    nlohmann::json obj;
    obj["fulfilled"] = v.fulfilled;
    obj["matched_level"] = v.matched_level_index ? nlohmann::json(*v.matched_level_index)
                                                 : nlohmann::json(nullptr);
    obj["lqap"] = v.lqap;
    obj["related_content"] = v.related_content;
    obj["reason"] = v.reason_text;
    return obj;
}

SrVerdict verdict_from_json(const nlohmann::json& obj) {
    SrVerdict v;
    v.fulfilled = obj.at("fulfilled").get<double>();
    if (!obj.at("matched_level").is_null()) {
        v.matched_level_index = obj.at("matched_level").get<int>();
    }
    v.lqap = obj.at("lqap").get<double>();
    v.related_content = obj.at("related_content").get<std::string>();
    v.reason_text = obj.at("reason").get<std::string>();
    return v;
}

nlohmann::json reason_to_json(const ReasonEntry& entry) {
    return {{"node_id", entry.node_id},
            {"score_source_id", entry.score_source_id},
            {"influence_on_scoring", entry.influence_on_scoring},
            {"rewarded_score", entry.rewarded_score},
            {"related_content", entry.related_content},
            {"reason_text", entry.reason_text}};
}

ReasonEntry reason_from_json(const nlohmann::json& obj) {
    ReasonEntry entry;
    entry.node_id = obj.at("node_id").get<std::string>();
    entry.score_source_id = obj.at("score_source_id").get<int>();
    entry.influence_on_scoring = obj.at("influence_on_scoring").get<double>();
    entry.rewarded_score = obj.at("rewarded_score").get<double>();
    entry.related_content = obj.at("related_content").get<std::string>();
    entry.reason_text = obj.at("reason_text").get<std::string>();
    return entry;
}

nlohmann::json node_to_json(const RktNode& node) {
    nlohmann::json obj;
    obj["id"] = node.id;
    obj["leaf"] = node.leaf;
    obj["criteria"] = node.criteria;
    obj["criteria_simplified_version"] = node.criteria_simplified_version;
    obj["separate_rule_number"] = node.separate_rule_number;
    obj["score_source"] = node.score_source;
    obj["score_source_id"] = node.score_source_id;
    obj["influence_relative"] = node.influence_relative;
    obj["influence_absolute"] = node.influence_absolute;
    obj["sub_conditions"] = subconditions_to_json(node.sub_conditions);
    obj["cap_forced"] = node.cap_forced;
    if (node.node_score) obj["node_score"] = *node.node_score;
    if (node.verdict) obj["verdict"] = verdict_to_json(*node.verdict);
    if (!node.reasons.empty()) {
        nlohmann::json reasons = nlohmann::json::array();
        for (const auto& entry : node.reasons) reasons.push_back(reason_to_json(entry));
        obj["reasons"] = std::move(reasons);
    }
    nlohmann::json children = nlohmann::json::array();
    for (const auto& child : node.children) children.push_back(node_to_json(child));
    obj["children"] = std::move(children);
    return obj;
}

RktNode node_from_json(const nlohmann::json& obj) {
    if (!obj.is_object()) throw ParseError("rkt node: expected an object");
    RktNode node;
    try {
        node.id = obj.at("id").get<std::string>();
        node.leaf = obj.at("leaf").get<bool>();
        node.criteria = obj.at("criteria").get<std::string>();
        node.criteria_simplified_version =
            obj.at("criteria_simplified_version").get<std::vector<std::string>>();
        node.separate_rule_number = obj.at("separate_rule_number").get<int>();
        node.score_source = obj.at("score_source").get<double>();
        node.score_source_id = obj.at("score_source_id").get<int>();
        node.influence_relative = obj.at("influence_relative").get<double>();
        node.influence_absolute = obj.at("influence_absolute").get<double>();
        node.sub_conditions =
            subconditions_from_json(obj.at("sub_conditions"), "sub_conditions");
        node.cap_forced = obj.value("cap_forced", false);
        if (obj.contains("node_score")) node.node_score = obj.at("node_score").get<double>();
        if (obj.contains("verdict")) node.verdict = verdict_from_json(obj.at("verdict"));
        if (obj.contains("reasons")) {
            for (const auto& entry : obj.at("reasons")) {
                node.reasons.push_back(reason_from_json(entry));
            }
        }
        for (const auto& child : obj.at("children")) {
            node.children.push_back(node_from_json(child));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("rkt node '") + node.id + "': " + e.what());
    }
    return node;
}

void check_node(const RktNode& node, const RktNode* parent,
                std::unordered_set<std::string>& ids) {
    if (!ids.insert(node.id).second) {
        throw InvariantError("duplicate node id '" + node.id + "'");
    }
    if (node.leaf != node.children.empty()) {
        throw InvariantError("node '" + node.id + "': leaf flag disagrees with children");
    }
    if (node.separate_rule_number !=
        static_cast<int>(node.criteria_simplified_version.size())) {
        throw InvariantError("node '" + node.id +
                             "': separate_rule_number != simplified rule count");
    }
    if (node.leaf && node.separate_rule_number != 1 && !node.cap_forced) {
        throw InvariantError("node '" + node.id + "': non-atomic leaf not cap-forced");
    }
    if (parent) {
        const std::string expected_prefix = parent->id + ".";
        if (node.id.rfind(expected_prefix, 0) != 0) {
            throw InvariantError("node '" + node.id + "': id not derived from parent '" +
                                 parent->id + "'");
        }
        const double expected_abs = parent->influence_absolute * node.influence_relative;
        if (std::abs(node.influence_absolute - expected_abs) > kInfluenceTolerance) {
            throw InvariantError("node '" + node.id +
                                 "': influence_absolute != parent product");
        }
    }
    if (!node.children.empty()) {
        double sum = 0.0;
        for (std::size_t i = 0; i < node.children.size(); ++i) {
            const auto& child = node.children[i];
            const std::string expected_id = node.id + "." + std::to_string(i);
            if (child.id != expected_id) {
                throw InvariantError("node '" + child.id + "': expected id '" +
                                     expected_id + "'");
            }
            sum += child.influence_relative;
        }
        if (std::abs(sum - 1.0) > kInfluenceTolerance) {
            throw InvariantError("node '" + node.id +
                                 "': child influence_relative sums to " +
                                 std::to_string(sum));
        }
        for (const auto& child : node.children) check_node(child, &node, ids);
    }
}

} // namespace

nlohmann::json serialize_rkt(const RktNode& root, double max_score) {
    nlohmann::json doc = node_to_json(root);
    doc["schema_version"] = 1;
    doc["max_score"] = max_score;
    return doc;
}

RktDocument deserialize_rkt(const nlohmann::json& document) {
    if (!document.is_object()) throw ParseError("rkt: document is not an object");
    if (document.value("schema_version", 0) != 1) {
        throw ParseError("rkt: unsupported schema_version");
    }
    RktDocument doc;
    doc.max_score = document.value("max_score", 1.0);
    doc.root = node_from_json(document);
    check_rkt_invariants(doc.root);
    return doc;
}

void check_rkt_invariants(const RktNode& root) {
    std::unordered_set<std::string> ids;
    check_node(root, nullptr, ids);
}

void for_each_node(const RktNode& root, const std::function<void(const RktNode&)>& fn) {
    fn(root);
    for (const auto& child : root.children) for_each_node(child, fn);
}

void for_each_node(RktNode& root, const std::function<void(RktNode&)>& fn) {
    fn(root);
    for (auto& child : root.children) for_each_node(child, fn);
}

const RktNode* find_node(const RktNode& root, std::string_view id) {
    if (root.id == id) return &root;
    for (const auto& child : root.children) {
        if (const RktNode* hit = find_node(child, id)) return hit;
    }
    return nullptr;
}

std::vector<const RktNode*> collect_leaves(const RktNode& root) {
    std::vector<const RktNode*> leaves;
    for_each_node(root, [&](const RktNode& node) {
        if (node.leaf) leaves.push_back(&node);
    });
    return leaves;
}

} // namespace ratas
