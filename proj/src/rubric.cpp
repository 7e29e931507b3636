#include "ratas/rubric.hpp"

#include <cmath>
#include <set>
#include <unordered_set>

#include "ratas/errors.hpp"
#include "ratas/text.hpp"

namespace ratas {

namespace {

constexpr double kStrictSumTolerance = 1e-6;

void reject_unknown_keys(const nlohmann::json& obj,
                         const std::set<std::string>& known,
                         const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!known.count(it.key())) {
            throw SchemaError(where + ": unknown field '" + it.key() + "'");
        }
    }
}

double require_number(const nlohmann::json& obj, const std::string& key,
                      const std::string& where) {
    if (!obj.contains(key)) {
        throw SchemaError(where + ": missing required field '" + key + "'");
    }
    if (!obj.at(key).is_number()) {
        throw ParseError(where + "." + key + ": expected a number");
    }
    return obj.at(key).get<double>();
}

std::string require_string(const nlohmann::json& obj, const std::string& key,
                           const std::string& where) {
    if (!obj.contains(key)) {
        throw SchemaError(where + ": missing required field '" + key + "'");
    }
    if (!obj.at(key).is_string()) {
        throw ParseError(where + "." + key + ": expected a string");
    }
    return obj.at(key).get<std::string>();
}

} // namespace

Rubric parse_rubric(const nlohmann::json& document, RubricPolicy policy) {
    if (!document.is_object()) throw ParseError("rubric: document is not an object");
    const bool strict = policy == RubricPolicy::Strict;
    if (strict) {
        reject_unknown_keys(document, {"rubric_id", "max_score", "rows"}, "rubric");
    }

    Rubric rubric;
    rubric.rubric_id = require_string(document, "rubric_id", "rubric");
    if (text::trim(rubric.rubric_id).empty()) {
        throw ParseError("rubric.rubric_id: must be non-empty");
    }
    if (document.contains("max_score")) {
        if (!document.at("max_score").is_number()) {
            throw ParseError("rubric.max_score: expected a number");
        }
        rubric.max_score = document.at("max_score").get<double>();
        if (!(rubric.max_score > 0.0)) {
            throw ParseError("rubric.max_score: must be positive");
        }
    }

    if (!document.contains("rows")) throw SchemaError("rubric: missing required field 'rows'");
    const auto& rows = document.at("rows");
    if (!rows.is_array()) throw ParseError("rubric.rows: expected an array");

    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::string where = "rows[" + std::to_string(i) + "]";
        const auto& row_doc = rows[i];
        if (!row_doc.is_object()) throw ParseError(where + ": expected an object");
        if (strict) {
            reject_unknown_keys(row_doc, {"id", "basic_rule", "score_source", "levels"}, where);
        }

        RubricRow row;
        if (!row_doc.contains("id")) {
            throw SchemaError(where + ": missing required field 'id'");
        }
        if (!row_doc.at("id").is_number_integer()) {
            throw ParseError(where + ".id: expected an integer");
        }
        row.row_id = row_doc.at("id").get<int>();
        row.basic_rule = require_string(row_doc, "basic_rule", where);
        row.score_source = require_number(row_doc, "score_source", where) / 100.0;

        if (row_doc.contains("levels")) {
            const auto& levels = row_doc.at("levels");
            if (!levels.is_array()) throw ParseError(where + ".levels: expected an array");
            for (std::size_t j = 0; j < levels.size(); ++j) {
                const std::string lwhere = where + ".levels[" + std::to_string(j) + "]";
                const auto& level_doc = levels[j];
                if (!level_doc.is_object()) throw ParseError(lwhere + ": expected an object");
                if (strict) reject_unknown_keys(level_doc, {"quality", "score"}, lwhere);
                AchievementLevel level;
                level.quality_description = require_string(level_doc, "quality", lwhere);
                level.score_level = require_number(level_doc, "score", lwhere) / 100.0;
                row.levels.push_back(std::move(level));
            }
        }
        rubric.rows.push_back(std::move(row));
    }
    return rubric;
}

Rubric parse_rubric_text(std::string_view document_text, RubricPolicy policy) {
    nlohmann::json document;
    try {
        document = nlohmann::json::parse(document_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("rubric: invalid JSON: ") + e.what());
    }
    return parse_rubric(document, policy);
}

nlohmann::json serialize_rubric(const Rubric& rubric) {
    nlohmann::json doc;
    doc["rubric_id"] = rubric.rubric_id;
    doc["max_score"] = rubric.max_score;
    doc["rows"] = nlohmann::json::array();
    for (const auto& row : rubric.rows) {
        nlohmann::json row_doc;
        row_doc["id"] = row.row_id;
        row_doc["basic_rule"] = row.basic_rule;
        row_doc["score_source"] = row.score_source * 100.0;
        if (!row.levels.empty()) {
            nlohmann::json levels = nlohmann::json::array();
            for (const auto& level : row.levels) {
                levels.push_back({{"quality", level.quality_description},
                                  {"score", level.score_level * 100.0}});
            }
            row_doc["levels"] = std::move(levels);
        }
        doc["rows"].push_back(std::move(row_doc));
    }
    return doc;
}

ValidatedRubric validate_rubric(const Rubric& rubric, RubricPolicy policy) {
    if (rubric.rows.empty()) throw ValidationError("rubric has no rows");
    if (!(rubric.max_score > 0.0)) throw ValidationError("max_score must be positive");
    if (text::trim(rubric.rubric_id).empty()) {
        throw ValidationError("rubric_id must be non-empty");
    }

    std::unordered_set<int> seen_ids;
    double sum = 0.0;
    for (std::size_t i = 0; i < rubric.rows.size(); ++i) {
        const auto& row = rubric.rows[i];
        const std::string where = "row id " + std::to_string(row.row_id);
        if (row.row_id <= 0) {
            throw ValidationError(where + ": row id must be a positive integer");
        }
        if (!seen_ids.insert(row.row_id).second) {
            throw ValidationError("duplicate row id " + std::to_string(row.row_id));
        }
        if (text::trim(row.basic_rule).empty()) {
            throw ValidationError(where + ": basic_rule must be non-empty");
        }
        if (!(row.score_source > 0.0)) {
            throw ValidationError(where + ": score_source must be > 0");
        }
        for (const auto& level : row.levels) {
            if (text::trim(level.quality_description).empty()) {
                throw ValidationError(where + ": level quality must be non-empty");
            }
            if (level.score_level < 0.0 || level.score_level > 1.0) {
                throw ValidationError(where + ": level score " +
                                      text::format_fixed(level.score_level * 100.0, 2) +
                                      "% outside [0, 100]");
            }
        }
        sum += row.score_source;
    }

    ValidatedRubric out{rubric, {}};
    if (std::abs(sum - 1.0) > kStrictSumTolerance) {
        if (policy == RubricPolicy::Strict) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%g", sum);
            throw ValidationError(std::string("score sources sum to ") + buf);
        }
        for (auto& row : out.rubric.rows) row.score_source /= sum;
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%g", sum);
        out.warnings.push_back(std::string("score sources summed to ") + buf +
                               "; rescaled to 1.0");
    }
    for (const auto& row : out.rubric.rows) {
        if (row.score_source > 1.0 + kStrictSumTolerance) {
            throw ValidationError("row id " + std::to_string(row.row_id) +
                                  ": score_source exceeds 100%");
        }
    }
    return out;
}

} // namespace ratas
