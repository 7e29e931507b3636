#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace ratas {

/// How rubric-level invariants are enforced.
///   Strict    - any deviation is an error; unknown document fields rejected.
///   Normalize - score sources rescaled to sum 1.0 (with a warning);
///               unknown document fields ignored.
enum class RubricPolicy { Strict, Normalize };

/// One quality level of a rubric row: a description and the fraction of the
/// row's score it awards.
struct AchievementLevel {
    std::string quality_description;
    double score_level = 0.0; // fraction in [0, 1]

    bool operator==(const AchievementLevel&) const = default;
};

struct RubricRow {
    int row_id = 0;
    std::string basic_rule;
    double score_source = 0.0; // fraction of the total score, (0, 1]
    std::vector<AchievementLevel> levels; // may be empty

    bool operator==(const RubricRow&) const = default;
};

struct Rubric {
    std::string rubric_id;
    double max_score = 1.0;
    std::vector<RubricRow> rows;

    bool operator==(const Rubric&) const = default;
};

struct ValidatedRubric {
    Rubric rubric;
    std::vector<std::string> warnings;
};

/// Parse the canonical rubric document. Percentages (0-100 in the file)
/// are stored as fractions. Unknown fields are rejected under Strict.
/// Throws ParseError / SchemaError naming the offending row or field.
Rubric parse_rubric(const nlohmann::json& document,
                    RubricPolicy policy = RubricPolicy::Strict);
Rubric parse_rubric_text(std::string_view text,
                         RubricPolicy policy = RubricPolicy::Strict);

/// Inverse of parse_rubric: fractions written back as 0-100 percentages.
nlohmann::json serialize_rubric(const Rubric& rubric);

/// Enforce rubric invariants. Under Normalize, a score-source sum other
/// than 1.0 is rescaled and reported as a warning; under Strict any
/// deviation beyond 1e-6 is an error. Throws ValidationError.
ValidatedRubric validate_rubric(const Rubric& rubric,
                                RubricPolicy policy = RubricPolicy::Strict);

} // namespace ratas
