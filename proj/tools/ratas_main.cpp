// ratas: rubric-based automated grading over a rubric knowledge tree.
//
// Subcommands: build-tree, grade, evaluate, report.
// Exit codes: 0 success, 1 input/validation error, 2 backend/transport
// error, 3 internal invariant violation.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "ratas/config.hpp"
#include "ratas/errors.hpp"
#include "ratas/metrics.hpp"
#include "ratas/mock_backend.hpp"
#include "ratas/remote_backend.hpp"
#include "ratas/rkt.hpp"
#include "ratas/rkt_builder.hpp"
#include "ratas/rubric.hpp"
#include "ratas/scoring.hpp"
#include "ratas/text.hpp"

namespace fs = std::filesystem;
using namespace ratas;

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file_atomic(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw RatasError("cannot write file: " + tmp.string());
        out << content;
    }
    fs::rename(tmp, path);
}

std::string dump_doc(const nlohmann::json& doc) { return doc.dump(2) + "\n"; }

std::string iso_timestamp_utc() {
    std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

TemplateSet make_templates(const RunConfig& config) {
    if (config.template_set.empty() || config.template_set == "default") {
        return TemplateSet::builtin();
    }
    return TemplateSet::load_dir(config.template_set);
}

std::shared_ptr<Backend> make_backend(const RunConfig& config) {
    if (config.backend == BackendKind::Mock) return std::make_shared<MockBackend>();
    if (config.api_key.empty()) {
        throw ValidationError("remote backend requires RATAS_API_KEY");
    }
    if (config.api_base.empty()) {
        throw ValidationError("remote backend requires RATAS_API_BASE");
    }
    if (config.model.empty()) {
        throw ValidationError("remote backend requires RATAS_MODEL");
    }
    RemoteOptions options;
    options.base_url = config.api_base;
    options.api_key = config.api_key;
    options.model = config.model;
    return std::make_shared<RemoteBackend>(options, make_templates(config));
}

GatewayOptions gateway_options(const RunConfig& config) {
    GatewayOptions options;
    options.max_in_flight = config.concurrency_limit;
    options.continuous_sp = config.continuous_sp;
    return options;
}

struct LoadedTree {
    RktDocument doc;
    fs::path path;
    bool from_cache = false;
};

LoadedTree build_or_load_tree(const Rubric& rubric, const Gateway& gateway,
                              const RunConfig& config) {
    BuildConfig build_config;
    build_config.depth_cap = config.depth_cap;
    const std::string key = tree_cache_key(rubric, build_config, gateway.backend_id(),
                                           config.template_set);
    const fs::path path = fs::path(config.cache_dir) / ("tree-" + key + ".json");

    if (fs::exists(path)) {
        try {
            RktDocument doc = deserialize_rkt(nlohmann::json::parse(read_file(path)));
            return {std::move(doc), path, true};
        } catch (const RatasError&) {
            // stale or damaged cache entry; rebuild below
        } catch (const nlohmann::json::parse_error&) {
        }
    }

    BuildResult built = build_rkt(rubric, gateway, build_config);
    for (const auto& warning : built.warnings) {
        std::cerr << "warning: " << warning << "\n";
    }
    RktDocument doc{rubric.max_score, std::move(built.root)};
    write_file_atomic(path, dump_doc(serialize_rkt(doc.root, doc.max_score)));
    return {std::move(doc), path, false};
}

Rubric load_validated_rubric(const fs::path& path, RubricPolicy policy) {
    Rubric parsed = parse_rubric_text(read_file(path), policy);
    ValidatedRubric validated = validate_rubric(parsed, policy);
    for (const auto& warning : validated.warnings) {
        std::cerr << "warning: " << warning << "\n";
    }
    return validated.rubric;
}

// ---------------------------------------------------------------- build-tree

int cmd_build_tree(const std::string& rubric_path, const std::string& out_path,
                   RubricPolicy policy, const RunConfig& config) {
    Rubric rubric = load_validated_rubric(rubric_path, policy);
    Gateway gateway(make_backend(config), gateway_options(config));
    LoadedTree tree = build_or_load_tree(rubric, gateway, config);
    fs::path printed = tree.path;
    if (!out_path.empty()) {
        write_file_atomic(out_path, dump_doc(serialize_rkt(tree.doc.root, tree.doc.max_score)));
        printed = out_path;
    }
    std::cout << printed.string() << "\n";
    return 0;
}

// --------------------------------------------------------------------- grade

int error_exit_code(const std::exception_ptr& error) {
    try {
        std::rethrow_exception(error);
    } catch (const GatewayError&) {
        return 2;
    } catch (const InvariantError&) {
        return 3;
    } catch (const RatasError&) {
        return 1;
    } catch (const std::invalid_argument&) {
        return 1;
    } catch (...) {
        return 3;
    }
}

int cmd_grade(const std::string& tree_path, const std::string& rubric_path,
              const std::string& input_path, const std::string& out_dir,
              const std::string& run_id, RubricPolicy policy, const RunConfig& config) {
    RktDocument tree_doc;
    if (!tree_path.empty()) {
        tree_doc = deserialize_rkt(nlohmann::json::parse(read_file(tree_path)));
    } else {
        Rubric rubric = load_validated_rubric(rubric_path, policy);
        Gateway build_gateway(make_backend(config), gateway_options(config));
        tree_doc = build_or_load_tree(rubric, build_gateway, config).doc;
    }

    // Answer set: a single file, or every regular file in a directory
    // (sorted by name; the file stem is the answer id).
    std::vector<fs::path> answer_files;
    const bool batch = fs::is_directory(input_path);
    if (batch) {
        for (const auto& entry : fs::directory_iterator(input_path)) {
            if (entry.is_regular_file()) answer_files.push_back(entry.path());
        }
        std::sort(answer_files.begin(), answer_files.end());
        if (answer_files.empty()) throw ParseError("no answer files in " + input_path);
        std::set<std::string> stems;
        for (const auto& file : answer_files) {
            if (!stems.insert(file.stem().string()).second) {
                throw ValidationError("duplicate answer id '" + file.stem().string() + "'");
            }
        }
    } else {
        if (!fs::exists(input_path)) throw ParseError("cannot open file: " + input_path);
        answer_files.push_back(input_path);
    }

    Gateway gateway(make_backend(config), gateway_options(config));
    ScoreConfig score_config;
    score_config.partial_ok = config.partial_ok;
    score_config.concurrency_limit = batch ? 1 : config.concurrency_limit;

    struct Row {
        std::string answer_id;
        bool ok = false;
        double total = 0.0;
        double scaled = 0.0;
        std::string error;
        std::exception_ptr error_ptr;
    };
    std::vector<Row> rows(answer_files.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= answer_files.size()) return;
            Row& row = rows[i];
            row.answer_id = answer_files[i].stem().string();
            try {
                const std::string answer = read_file(answer_files[i]);
                GradingResult result = score_answer(tree_doc.root, answer, gateway,
                                                    score_config, tree_doc.max_score);
                result.answer_id = row.answer_id;
                result.run_meta.config_hash = config.config_hash();
                if (!run_id.empty()) result.run_meta.run_id = run_id;
                if (config.backend == BackendKind::Remote) {
                    result.run_meta.timestamp = iso_timestamp_utc();
                }
                for (const auto& warning : result.warnings) {
                    std::cerr << "warning: " << row.answer_id << ": " << warning << "\n";
                }
                write_file_atomic(fs::path(out_dir) / (row.answer_id + ".result.json"),
                                  dump_doc(grading_result_to_json(result)));
                row.ok = true;
                row.total = result.total_score;
                row.scaled = result.scaled_score;
            } catch (const std::exception& e) {
                row.error = e.what();
                row.error_ptr = std::current_exception();
            }
        }
    };

    const std::size_t workers = batch
        ? std::min<std::size_t>(answer_files.size(),
                                static_cast<std::size_t>(config.concurrency_limit))
        : 1;
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    std::size_t failures = 0;
    for (const auto& row : rows) {
        if (row.ok) {
            std::cout << row.answer_id << "\t" << text::format_fixed(row.total, 4) << "\t"
                      << text::format_fixed(row.scaled, 4) << "\n";
        } else {
            ++failures;
            std::cerr << "error: " << row.answer_id << ": " << row.error << "\n";
        }
    }
    if (failures == 0) return 0;

    auto first_error = std::find_if(rows.begin(), rows.end(),
                                    [](const Row& r) { return !r.ok; });
    if (!batch || failures == rows.size() || !config.partial_ok) {
        return error_exit_code(first_error->error_ptr);
    }
    std::cerr << "warning: " << failures << " of " << rows.size()
              << " answers failed; remaining results were written\n";
    return 0;
}

// ------------------------------------------------------------------ evaluate

std::vector<std::string> parse_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

std::vector<EvalRecord> load_records_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path.string() + ": empty records file");
    auto header = parse_csv_line(line);
    std::map<std::string, std::size_t> columns;
    for (std::size_t i = 0; i < header.size(); ++i) columns[text::trim(header[i])] = i;
    for (const char* required : {"answer_id", "predicted", "gold"}) {
        if (!columns.count(required)) {
            throw SchemaError(path.string() + ": missing column '" + required + "'");
        }
    }

    std::vector<EvalRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        auto fields = parse_csv_line(line);
        auto field = [&](const char* name) -> std::string {
            auto it = columns.find(name);
            if (it == columns.end() || it->second >= fields.size()) return {};
            return fields[it->second];
        };
        EvalRecord record;
        record.answer_id = field("answer_id");
        try {
            record.predicted = std::stod(field("predicted"));
            record.gold = std::stod(field("gold"));
        } catch (const std::exception&) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) +
                             ": predicted/gold must be numbers");
        }
        if (columns.count("run_id") && !field("run_id").empty()) record.run_id = field("run_id");
        if (columns.count("answer_text")) record.answer_text = field("answer_text");
        records.push_back(std::move(record));
    }
    return records;
}

std::vector<EvalRecord> load_records_json(const fs::path& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string() + ": invalid JSON: " + e.what());
    }
    if (!doc.is_array()) throw ParseError(path.string() + ": expected an array of records");
    std::vector<EvalRecord> records;
    for (const auto& entry : doc) {
        EvalRecord record;
        try {
            record.answer_id = entry.at("answer_id").get<std::string>();
            record.predicted = entry.at("predicted").get<double>();
            record.gold = entry.at("gold").get<double>();
            if (entry.contains("run_id")) record.run_id = entry.at("run_id").get<std::string>();
            if (entry.contains("answer_text")) {
                record.answer_text = entry.at("answer_text").get<std::string>();
            }
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path.string() + ": bad record: " + e.what());
        }
        records.push_back(std::move(record));
    }
    return records;
}

std::vector<EvalRecord> load_results_dir(const fs::path& dir, const fs::path& gold_path) {
    nlohmann::json gold_doc;
    try {
        gold_doc = nlohmann::json::parse(read_file(gold_path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(gold_path.string() + ": invalid JSON: " + e.what());
    }
    if (!gold_doc.is_array()) {
        throw ParseError(gold_path.string() + ": expected an array of gold records");
    }
    struct GoldEntry {
        double gold = 0.0;
        std::string answer_text;
    };
    std::map<std::string, GoldEntry> gold;
    for (const auto& entry : gold_doc) {
        GoldEntry g;
        const std::string id = entry.at("answer_id").get<std::string>();
        g.gold = entry.at("gold").get<double>();
        if (entry.contains("answer_text")) g.answer_text = entry.at("answer_text");
        gold[id] = std::move(g);
    }

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().string().ends_with(".result.json")) {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw ParseError("no .result.json files in " + dir.string());

    std::vector<EvalRecord> records;
    std::vector<std::string> unmatched;
    std::set<std::string> seen;
    for (const auto& file : files) {
        GradingResult result = grading_result_from_json(nlohmann::json::parse(read_file(file)));
        auto it = gold.find(result.answer_id);
        if (it == gold.end()) {
            unmatched.push_back(result.answer_id);
            continue;
        }
        seen.insert(result.answer_id);
        EvalRecord record;
        record.answer_id = result.answer_id;
        record.predicted = result.total_score;
        record.gold = it->second.gold;
        record.run_id = result.run_meta.run_id.value_or("run-1");
        if (result.run_meta.answer_words) {
            record.word_count = *result.run_meta.answer_words;
        } else if (!it->second.answer_text.empty()) {
            record.answer_text = it->second.answer_text;
        }
        records.push_back(std::move(record));
    }
    if (!unmatched.empty()) {
        std::string list;
        for (const auto& id : unmatched) list += (list.empty() ? "" : ", ") + id;
        throw ValidationError("results without a gold record: " + list);
    }
    for (const auto& [id, entry] : gold) {
        if (!seen.count(id)) std::cerr << "warning: gold record '" << id << "' has no result\n";
    }
    return records;
}

EvalMetrics slice_metrics(const std::vector<EvalRecord>& records) {
    if (records.empty()) return EvalMetrics{};
    std::vector<double> predicted, gold;
    predicted.reserve(records.size());
    gold.reserve(records.size());
    for (const auto& record : records) {
        predicted.push_back(record.predicted);
        gold.push_back(record.gold);
    }
    return compute_metrics(predicted, gold);
}

std::optional<ReliabilityResult> runs_icc(const std::vector<EvalRecord>& records) {
    std::map<std::string, std::map<std::string, double>> by_run;
    for (const auto& record : records) by_run[record.run_id][record.answer_id] = record.predicted;
    if (by_run.size() < 2) return std::nullopt;

    // Subjects present in every run, in sorted id order.
    std::vector<std::string> subjects;
    for (const auto& [id, value] : by_run.begin()->second) {
        (void)value;
        bool everywhere = true;
        for (const auto& [run, grid] : by_run) {
            if (!grid.count(id)) {
                everywhere = false;
                break;
            }
        }
        if (everywhere) subjects.push_back(id);
    }
    if (subjects.size() < 2) return std::nullopt;

    std::vector<std::vector<double>> matrix;
    for (const auto& id : subjects) {
        std::vector<double> row;
        for (const auto& [run, grid] : by_run) row.push_back(grid.at(id));
        matrix.push_back(std::move(row));
    }
    return compute_icc(matrix);
}

int cmd_evaluate(const std::string& results_dir, const std::string& gold_path,
                 const std::string& records_path, std::size_t threshold,
                 const std::string& method, const std::string& json_out) {
    std::vector<EvalRecord> records;
    if (!records_path.empty()) {
        records = fs::path(records_path).extension() == ".csv"
                      ? load_records_csv(records_path)
                      : load_records_json(records_path);
    } else {
        if (results_dir.empty() || gold_path.empty()) {
            throw ValidationError("evaluate needs a results directory with --gold, or --records");
        }
        records = load_results_dir(results_dir, gold_path);
    }
    if (records.empty()) throw ParseError("no evaluation records");

    auto [under, over] = split_by_length(records, threshold);
    const std::string under_label =
        "Answers with up to " + std::to_string(threshold) + " words";
    const std::string over_label =
        "Answers with more than " + std::to_string(threshold) + " words";

    std::vector<MetricsRow> rows = {
        {method, "Whole dataset", slice_metrics(records)},
        {method, under_label, slice_metrics(under)},
        {method, over_label, slice_metrics(over)},
    };
    std::cout << render_metrics_table(rows);

    auto icc = runs_icc(records);
    if (icc) {
        std::cout << "ICC(2,1): " << text::format_fixed(icc->icc, 4) << " (runs="
                  << icc->runs << ", subjects=" << icc->subjects
                  << (icc->degenerate ? ", degenerate grid" : "") << ")\n";
    } else {
        std::cout << "ICC(2,1): n/a (needs >=2 runs)\n";
    }

    if (!json_out.empty()) {
        nlohmann::json doc;
        doc["method"] = method;
        doc["threshold_words"] = threshold;
        doc["rows"] = nlohmann::json::array();
        for (const auto& row : rows) {
            nlohmann::json row_doc = metrics_to_json(row.metrics);
            row_doc["dataset"] = row.dataset;
            row_doc["method"] = row.method;
            doc["rows"].push_back(std::move(row_doc));
        }
        doc["icc"] = icc ? nlohmann::json({{"icc", icc->icc},
                                           {"runs", icc->runs},
                                           {"subjects", icc->subjects},
                                           {"degenerate", icc->degenerate}})
                         : nlohmann::json(nullptr);
        write_file_atomic(json_out, dump_doc(doc));
    }
    return 0;
}

// -------------------------------------------------------------------- report

int cmd_report(const std::string& result_path, bool as_json) {
    GradingResult result =
        grading_result_from_json(nlohmann::json::parse(read_file(result_path)));
    if (as_json) {
        std::cout << dump_doc(report_to_json(result.report));
    } else {
        std::cout << result.report.text;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rubric-based automated grading over a rubric knowledge tree"};
    app.require_subcommand(1);

    // Shared configuration flags; only flags the user passed override the
    // config file / environment / defaults.
    std::string backend_flag, cache_dir_flag, config_path, template_set_flag;
    int depth_cap_flag = 0, concurrency_flag = 0;
    bool continuous_flag = false, partial_ok_flag = false, normalize_flag = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--backend", backend_flag, "Backend: mock or remote");
        sub->add_option("--depth-cap", depth_cap_flag, "Maximum tree depth (>= 1)");
        sub->add_flag("--continuous-sp", continuous_flag,
                      "Leaf fulfillment as a fraction instead of 0/1");
        sub->add_flag("--partial-ok", partial_ok_flag,
                      "Continue on per-leaf/per-answer failures");
        sub->add_option("--concurrency", concurrency_flag, "Concurrency limit (>= 1)");
        sub->add_option("--cache-dir", cache_dir_flag, "Tree cache directory");
        sub->add_option("--config", config_path, "Config file (JSON)");
        sub->add_option("--template-set", template_set_flag,
                        "Prompt template set: 'default' or a directory");
        sub->add_flag("--normalize", normalize_flag,
                      "Rescale rubric score sources instead of failing");
    };

    auto effective_config = [&](CLI::App* sub) {
        RunConfig config;
        config.apply_env();
        if (!config_path.empty()) {
            config.apply_json(nlohmann::json::parse(read_file(config_path)));
        }
        if (sub->count("--backend")) config.backend = backend_from_name(backend_flag);
        if (sub->count("--depth-cap")) config.depth_cap = depth_cap_flag;
        if (sub->count("--continuous-sp")) config.continuous_sp = continuous_flag;
        if (sub->count("--partial-ok")) config.partial_ok = partial_ok_flag;
        if (sub->count("--concurrency")) config.concurrency_limit = concurrency_flag;
        if (sub->count("--cache-dir")) config.cache_dir = cache_dir_flag;
        if (sub->count("--template-set")) config.template_set = template_set_flag;
        config.validate();
        return config;
    };
    auto policy = [&] {
        return normalize_flag ? RubricPolicy::Normalize : RubricPolicy::Strict;
    };

    int exit_code = 0;

    // build-tree
    std::string bt_rubric, bt_out;
    CLI::App* build_cmd = app.add_subcommand("build-tree", "Build and cache the rubric tree");
    build_cmd->add_option("rubric", bt_rubric, "Rubric file (JSON)")->required();
    build_cmd->add_option("--out", bt_out, "Also write the tree to this path");
    add_common(build_cmd);
    build_cmd->callback([&] {
        exit_code = cmd_build_tree(bt_rubric, bt_out, policy(), effective_config(build_cmd));
    });

    // grade
    std::string g_tree, g_rubric, g_input, g_out_dir = ".", g_run_id;
    CLI::App* grade_cmd = app.add_subcommand("grade", "Grade an answer file or directory");
    grade_cmd->add_option("input", g_input, "Answer file or directory")->required();
    grade_cmd->add_option("--tree", g_tree, "Built tree file (JSON)");
    grade_cmd->add_option("--rubric", g_rubric, "Rubric file (built or cached on demand)");
    grade_cmd->add_option("--out-dir", g_out_dir, "Directory for result documents");
    grade_cmd->add_option("--run-id", g_run_id, "Run label stamped into results");
    add_common(grade_cmd);
    grade_cmd->callback([&] {
        if (g_tree.empty() == g_rubric.empty()) {
            throw ValidationError("grade needs exactly one of --tree or --rubric");
        }
        exit_code = cmd_grade(g_tree, g_rubric, g_input, g_out_dir, g_run_id, policy(),
                              effective_config(grade_cmd));
    });

    // evaluate
    std::string e_results, e_gold, e_records, e_method = "ratas", e_json;
    std::size_t e_threshold = 600;
    CLI::App* eval_cmd = app.add_subcommand("evaluate", "Metrics against gold scores");
    eval_cmd->add_option("results_dir", e_results, "Directory of .result.json files");
    eval_cmd->add_option("--gold", e_gold, "Gold records (JSON array)");
    eval_cmd->add_option("--records", e_records, "Evaluation records (JSON or CSV)");
    eval_cmd->add_option("--threshold", e_threshold, "Word-count split threshold");
    eval_cmd->add_option("--method", e_method, "Method label for the table");
    eval_cmd->add_option("--json", e_json, "Also write metrics as JSON to this path");
    eval_cmd->callback([&] {
        exit_code = cmd_evaluate(e_results, e_gold, e_records, e_threshold, e_method, e_json);
    });

    // report
    std::string r_result;
    bool r_json = false;
    CLI::App* report_cmd = app.add_subcommand("report", "Print the report of a result");
    report_cmd->add_option("result", r_result, "Grading result file")->required();
    report_cmd->add_flag("--json", r_json, "Print the structured report");
    report_cmd->callback([&] { exit_code = cmd_report(r_result, r_json); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const GatewayError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const InvariantError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const RatasError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const nlohmann::json::parse_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return exit_code;
}
