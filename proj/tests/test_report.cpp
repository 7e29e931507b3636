#include <doctest.h>

#include <set>

#include "ratas/errors.hpp"
#include "ratas/report.hpp"

#include "support/tree_gen.hpp"

using namespace ratas;

namespace {

/// Single-row tree with four atomic rules: two fully met, one matched at the
/// lower of two levels, one unmet.
RktNode mixed_fixture() {
    RktNode root;
    root.id = "m";
    root.criteria = "all";
    root.leaf = false;
    root.separate_rule_number = 1;
    root.score_source = 1.0;
    root.influence_relative = 1.0;
    root.influence_absolute = 1.0;
    root.criteria_simplified_version = {"row rule"};

    RktNode row;
    row.id = "m.0";
    row.criteria = "row rule";
    row.leaf = false;
    row.separate_rule_number = 4;
    row.score_source = 1.0;
    row.score_source_id = 1;
    row.influence_relative = 1.0;
    row.influence_absolute = 1.0;

    struct LeafSpec {
        const char* criteria;
        std::vector<SubCondition> levels;
        std::optional<int> matched;
        double fulfilled;
    };
    const std::vector<LeafSpec> specs = {
        {"Explain the allocator design.", {}, std::nullopt, 1.0},
        {"List the page sizes.", {{"exact list", 1.0}}, 0, 1.0},
        {"Justify the eviction choice.", {{"full justification", 1.0}, {"partial sketch", 0.5}}, 1, 1.0},
        {"Measure fragmentation.", {{"numbers given", 1.0}}, std::nullopt, 0.0},
    };
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const auto& spec = specs[i];
        RktNode leaf;
        leaf.id = row.id + "." + std::to_string(i);
        leaf.criteria = spec.criteria;
        leaf.criteria_simplified_version = {spec.criteria};
        leaf.separate_rule_number = 1;
        leaf.influence_relative = 0.25;
        leaf.influence_absolute = 0.25;
        leaf.score_source = 1.0;
        leaf.score_source_id = 1;
        leaf.sub_conditions = spec.levels;

        SrVerdict verdict;
        verdict.fulfilled = spec.fulfilled;
        verdict.matched_level_index = spec.matched;
        verdict.lqap = spec.fulfilled > 0 ? 1.0 : 0.0;
        verdict.reason_text = spec.fulfilled > 0 ? "covered" : "missing";
        const double score = leaf_score_from_verdict(verdict, leaf.sub_conditions);
        leaf.verdict = verdict;
        leaf.node_score = score;
        leaf.reasons = {ReasonEntry{leaf.id, 1, 0.25, 0.25 * score, "", verdict.reason_text}};
        row.children.push_back(std::move(leaf));
    }
    row.node_score = aggregate(row);
    root.children.push_back(std::move(row));
    root.node_score = aggregate(root);
    return root;
}

} // namespace

TEST_CASE("propagate_reasons concatenates leaf entries in child-index order") {
    RktNode tree = mixed_fixture();
    ReasonMap reasons = propagate_reasons(tree);

    const auto& root_entries = reasons.at("m");
    REQUIRE(root_entries.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(root_entries[i].node_id == "m.0." + std::to_string(i));
    }
    CHECK(reasons.at("m.0").size() == 4);
    CHECK(reasons.at("m.0.2").size() == 1);
    CHECK(tree.reasons.size() == 4); // annotated in place as well
}

TEST_CASE("propagate_reasons on a single-leaf tree is the identity") {
    RktNode root;
    root.id = "s";
    root.leaf = false;
    root.criteria = "all";
    root.separate_rule_number = 1;
    root.influence_absolute = 1.0;
    RktNode leaf;
    leaf.id = "s.0";
    leaf.criteria = "only rule";
    leaf.criteria_simplified_version = {"only rule"};
    leaf.separate_rule_number = 1;
    leaf.influence_relative = 1.0;
    leaf.influence_absolute = 1.0;
    leaf.score_source = 1.0;
    leaf.score_source_id = 1;
    leaf.node_score = 1.0;
    leaf.reasons = {ReasonEntry{"s.0", 1, 1.0, 1.0, "", "met"}};
    root.children.push_back(leaf);

    ReasonMap reasons = propagate_reasons(root);
    CHECK(reasons.at("s") == leaf.reasons);
}

TEST_CASE("propagate_reasons fails on a leaf without a verdict") {
    RktNode tree = mixed_fixture();
    tree.children[0].children[1].reasons.clear();
    CHECK_THROWS_AS(propagate_reasons(tree), InvariantError);
}

TEST_CASE("rewarded scores on random trees add up to the total") {
    std::mt19937_64 rng(808);
    for (int trial = 0; trial < 30; ++trial) {
        RktNode tree = testsupport::random_tree(rng);
        testsupport::assign_random_verdicts(tree, rng);
        const double total = testsupport::recursive_total(tree);
        ReasonMap reasons = propagate_reasons(tree);
        double rewarded = 0.0;
        for (const auto& entry : reasons.at(tree.id)) rewarded += entry.rewarded_score;
        CHECK(rewarded == doctest::Approx(total).epsilon(1e-9));
    }
}

TEST_CASE("render_report sorts rules into the three categories") {
    RktNode tree = mixed_fixture();
    ReasonMap reasons = propagate_reasons(tree);
    Report report = render_report(tree, reasons);

    REQUIRE(report.analysis.size() == 1);
    const RowAnalysis& row = report.analysis[0];
    CHECK(row.full == std::vector<std::string>{"m.0.0", "m.0.1"});
    CHECK(row.partial == std::vector<std::string>{"m.0.2"});
    CHECK(row.unmet == std::vector<std::string>{"m.0.3"});
    CHECK(row.row_score == doctest::Approx(0.625)); // (1 + 1 + 0.5 + 0) / 4

    REQUIRE(report.improvement_points.size() == 2);
    CHECK(report.improvement_points[0].kind == "partial");
    CHECK(report.improvement_points[0].node_id == "m.0.2");
    CHECK(report.improvement_points[0].text.find("partial sketch") != std::string::npos);
    CHECK(report.improvement_points[0].text.find("full justification") != std::string::npos);
    CHECK(report.improvement_points[1].kind == "unmet");
    CHECK(report.improvement_points[1].node_id == "m.0.3");
    CHECK(report.improvement_points[1].text.find("numbers given") != std::string::npos);

    CHECK(report.totals.total_score == doctest::Approx(0.625));
    CHECK(report.text.find("Answer Analysis:") != std::string::npos);
    CHECK(report.text.find("Improvement Points:") != std::string::npos);
    CHECK(report.text.find("0.6250") != std::string::npos);
}

TEST_CASE("fully satisfied answers produce no improvement points") {
    RktNode tree = mixed_fixture();
    // Raise every leaf to its top level.
    for (auto* leaf : testsupport::mutable_leaves(tree)) {
        leaf->verdict->fulfilled = 1.0;
        leaf->verdict->lqap = 1.0;
        leaf->verdict->matched_level_index =
            leaf->sub_conditions.empty() ? std::optional<int>() : std::optional<int>(0);
        const double score = leaf_score_from_verdict(*leaf->verdict, leaf->sub_conditions);
        leaf->node_score = score;
        leaf->reasons[0].rewarded_score = leaf->reasons[0].influence_on_scoring * score;
    }
    ReasonMap reasons = propagate_reasons(tree);
    Report report = render_report(tree, reasons);
    CHECK(report.improvement_points.empty());
    CHECK(report.text.find("(none)") != std::string::npos);
}

TEST_CASE("one unmet rule yields exactly one improvement point naming it") {
    RktNode tree = mixed_fixture();
    for (auto* leaf : testsupport::mutable_leaves(tree)) {
        if (leaf->id == "m.0.2") { // promote the partial leaf to full
            leaf->verdict->matched_level_index = 0;
            leaf->node_score = 1.0;
            leaf->reasons[0].rewarded_score = leaf->reasons[0].influence_on_scoring;
        }
    }
    ReasonMap reasons = propagate_reasons(tree);
    Report report = render_report(tree, reasons);
    REQUIRE(report.improvement_points.size() == 1);
    CHECK(report.improvement_points[0].node_id == "m.0.3");
    CHECK(report.improvement_points[0].kind == "unmet");
    CHECK(report.improvement_points[0].text.find("Measure fragmentation.") !=
          std::string::npos);
}

TEST_CASE("every leaf lands in exactly one category") {
    std::mt19937_64 rng(31337);
    for (int trial = 0; trial < 20; ++trial) {
        RktNode tree = testsupport::random_tree(rng);
        testsupport::assign_random_verdicts(tree, rng);
        ReasonMap reasons = propagate_reasons(tree);
        Report report = render_report(tree, reasons);

        std::set<std::string> seen;
        std::size_t listed = 0;
        for (const auto& section : report.analysis) {
            for (const auto& bucket : {section.full, section.partial, section.unmet}) {
                for (const auto& id : bucket) {
                    seen.insert(id);
                    ++listed;
                }
            }
        }
        const auto leaves = collect_leaves(tree);
        CHECK(listed == leaves.size());
        CHECK(seen.size() == leaves.size());
        CHECK(report.analysis.size() == tree.children.size());
    }
}

TEST_CASE("report regeneration is byte-identical") {
    RktNode tree = mixed_fixture();
    ReasonMap reasons = propagate_reasons(tree);
    Report a = render_report(tree, reasons);
    Report b = render_report(tree, reasons);
    CHECK(a.text == b.text);
    CHECK(report_to_json(a).dump() == report_to_json(b).dump());
    CHECK(a == b);
}

TEST_CASE("report JSON round-trips") {
    RktNode tree = mixed_fixture();
    ReasonMap reasons = propagate_reasons(tree);
    Report report = render_report(tree, reasons);
    Report loaded = report_from_json(report_to_json(report));
    CHECK(loaded == report);
}
