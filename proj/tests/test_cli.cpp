#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string output; // stdout + stderr interleaved
};

CliResult run_cli(const std::string& args) {
    const std::string command = std::string(RATAS_CLI_PATH) + " " + args + " 2>&1";
    std::array<char, 4096> buffer{};
    std::string output;
    FILE* pipe = popen(command.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::size_t got;
    while ((got = fread(buffer.data(), 1, buffer.size(), pipe)) > 0) {
        output.append(buffer.data(), got);
    }
    const int status = pclose(pipe);
    CliResult result;
    result.output = output;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fs::path fresh_dir(const char* name) {
    fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string fixture(const char* name) {
    return std::string(RATAS_FIXTURE_DIR) + "/" + name;
}

} // namespace

TEST_CASE("build-tree writes a deterministic cached tree and prints its path") {
    fs::path dir = fresh_dir("ratas-cli-build");
    const std::string cache = (dir / "cache").string();

    auto first = run_cli("build-tree " + fixture("fix2.rubric.json") + " --cache-dir " + cache);
    REQUIRE(first.exit_code == 0);
    std::string path1 = first.output.substr(0, first.output.find('\n'));
    CHECK(fs::exists(path1));

    auto second = run_cli("build-tree " + fixture("fix2.rubric.json") + " --cache-dir " + cache);
    REQUIRE(second.exit_code == 0);
    std::string path2 = second.output.substr(0, second.output.find('\n'));
    CHECK(path1 == path2); // identical content hash across runs

    auto doc = nlohmann::json::parse(slurp(path1));
    CHECK(doc.at("schema_version") == 1);
    CHECK(doc.at("id") == "fix2");
}

TEST_CASE("build-tree exit codes follow the contract") {
    fs::path dir = fresh_dir("ratas-cli-exit");
    const std::string cache = (dir / "cache").string();

    auto missing = run_cli("build-tree " + (dir / "nope.json").string());
    CHECK(missing.exit_code == 1);
    CHECK(missing.output.find("nope.json") != std::string::npos);

    auto bad_sum = run_cli("build-tree " + fixture("bad_sum.rubric.json") +
                           " --cache-dir " + cache);
    CHECK(bad_sum.exit_code == 1);
    CHECK(bad_sum.output.find("score sources sum to 0.9") != std::string::npos);

    // normalize policy accepts the same rubric
    auto normalized = run_cli("build-tree " + fixture("bad_sum.rubric.json") +
                              " --cache-dir " + cache + " --normalize");
    CHECK(normalized.exit_code == 0);
    CHECK(normalized.output.find("rescaled") != std::string::npos);
}

TEST_CASE("grade produces result documents and batch summaries") {
    fs::path dir = fresh_dir("ratas-cli-grade");
    const std::string cache = (dir / "cache").string();
    fs::path answers = dir / "answers";
    fs::create_directories(answers);
    {
        std::ofstream(answers / "good.txt")
            << "We summarize the training corpus scale and explain the gateway retry "
               "policy in this report.";
        std::ofstream(answers / "empty.txt") << "";
        std::ofstream(answers / "partial.txt")
            << "We summarize the training corpus scale here.";
    }
    fs::path out = dir / "results";

    auto graded = run_cli("grade --rubric " + fixture("fix2.rubric.json") + " " +
                          answers.string() + " --out-dir " + out.string() +
                          " --cache-dir " + cache + " --run-id run-1");
    REQUIRE(graded.exit_code == 0);
    CHECK(fs::exists(out / "good.result.json"));
    CHECK(fs::exists(out / "empty.result.json"));
    CHECK(fs::exists(out / "partial.result.json"));
    CHECK(graded.output.find("good\t0.8000") != std::string::npos);
    CHECK(graded.output.find("empty\t0.0000") != std::string::npos);
    CHECK(graded.output.find("partial\t0.6000") != std::string::npos);

    auto good = nlohmann::json::parse(slurp(out / "good.result.json"));
    CHECK(good.at("total_score").get<double>() == doctest::Approx(0.8));
    CHECK(good.at("run_meta").at("backend_id") == "mock");
    CHECK(good.at("run_meta").at("run_id") == "run-1");
    CHECK_FALSE(good.at("run_meta").contains("timestamp")); // mock output is reproducible

    // Byte-identical on a second identical command line.
    fs::path out2 = dir / "results2";
    auto again = run_cli("grade --rubric " + fixture("fix2.rubric.json") + " " +
                         answers.string() + " --out-dir " + out2.string() +
                         " --cache-dir " + cache + " --run-id run-1");
    REQUIRE(again.exit_code == 0);
    CHECK(slurp(out / "good.result.json") == slurp(out2 / "good.result.json"));
}

TEST_CASE("grade isolates failing answers in batch mode with partial-ok") {
    fs::path dir = fresh_dir("ratas-cli-batch");
    const std::string cache = (dir / "cache").string();
    fs::path answers = dir / "answers";
    fs::create_directories(answers);
    std::ofstream(answers / "one.txt") << "We summarize the training corpus scale.";
    std::ofstream(answers / "two.txt") << "Another answer about nothing.";
    // An answer whose result file cannot be created (name too long once the
    // .result.json suffix is added); the tests may run as root, so
    // permission bits would not fail reliably.
    const std::string long_stem(250, 'x');
    std::ofstream(answers / (long_stem + ".txt")) << "text";

    fs::path out = dir / "results";
    auto strict = run_cli("grade --rubric " + fixture("fix2.rubric.json") + " " +
                          answers.string() + " --out-dir " + out.string() +
                          " --cache-dir " + cache);
    CHECK(strict.exit_code != 0);

    auto tolerant = run_cli("grade --rubric " + fixture("fix2.rubric.json") + " " +
                            answers.string() + " --out-dir " + out.string() +
                            " --cache-dir " + cache + " --partial-ok");
    CHECK(tolerant.exit_code == 0);
    CHECK(tolerant.output.find("answers failed") != std::string::npos);
    CHECK(fs::exists(out / "one.result.json"));
    CHECK(fs::exists(out / "two.result.json"));
}

TEST_CASE("grade requires exactly one tree source") {
    auto neither = run_cli("grade somefile.txt");
    CHECK(neither.exit_code == 1);
    CHECK(neither.output.find("--tree or --rubric") != std::string::npos);
}

TEST_CASE("grade rejects answer-id collisions in a batch") {
    fs::path dir = fresh_dir("ratas-cli-collide");
    fs::path answers = dir / "answers";
    fs::create_directories(answers);
    std::ofstream(answers / "same.txt") << "a";
    std::ofstream(answers / "same.md") << "b";
    auto result = run_cli("grade --rubric " + fixture("fix2.rubric.json") + " " +
                          answers.string() + " --cache-dir " + (dir / "cache").string());
    CHECK(result.exit_code == 1);
    CHECK(result.output.find("duplicate answer id") != std::string::npos);
}

TEST_CASE("evaluate renders the table and ICC from records") {
    fs::path dir = fresh_dir("ratas-cli-eval");
    std::string long_text;
    for (int w = 0; w < 700; ++w) long_text += "word ";
    nlohmann::json records = nlohmann::json::array();
    for (int run = 1; run <= 2; ++run) {
        for (int i = 0; i < 4; ++i) {
            const double gold = 0.2 + 0.2 * i;
            records.push_back({{"answer_id", "a" + std::to_string(i)},
                               {"answer_text", i < 2 ? "short answer" : long_text},
                               {"predicted", gold + (run == 1 ? 0.01 : -0.01)},
                               {"gold", gold},
                               {"run_id", "run-" + std::to_string(run)}});
        }
    }
    fs::path records_path = dir / "records.json";
    std::ofstream(records_path) << records.dump(2);

    auto result = run_cli("evaluate --records " + records_path.string() +
                          " --json " + (dir / "metrics.json").string());
    REQUIRE(result.exit_code == 0);
    CHECK(result.output.find("MAE") != std::string::npos);
    CHECK(result.output.find("RMSE") != std::string::npos);
    CHECK(result.output.find("R²") != std::string::npos);
    CHECK(result.output.find("Pearson's r") != std::string::npos);
    CHECK(result.output.find("Whole dataset") != std::string::npos);
    CHECK(result.output.find("up to 600 words") != std::string::npos);
    CHECK(result.output.find("more than 600 words") != std::string::npos);
    CHECK(result.output.find("ICC(2,1):") != std::string::npos);
    CHECK(result.output.find("n/a (needs >=2 runs)") == std::string::npos);

    auto metrics = nlohmann::json::parse(slurp(dir / "metrics.json"));
    CHECK(metrics.at("rows").size() == 3);
    CHECK(metrics.at("icc").at("runs") == 2);
    CHECK(metrics.at("icc").at("subjects") == 4);
    CHECK(metrics.at("rows")[0].at("mae").get<double>() == doctest::Approx(0.01));
}

TEST_CASE("evaluate reads CSV records and reports single-run ICC as n/a") {
    fs::path dir = fresh_dir("ratas-cli-eval-csv");
    fs::path csv = dir / "records.csv";
    std::ofstream(csv) << "answer_id,predicted,gold,answer_text\n"
                          "a,0.5,0.5,\"one, two\"\n"
                          "b,0.25,0.30,three words here\n";
    auto result = run_cli("evaluate --records " + csv.string());
    REQUIRE(result.exit_code == 0);
    CHECK(result.output.find("n/a (needs >=2 runs)") != std::string::npos);
}

TEST_CASE("evaluate results_dir mode matches ids against gold") {
    fs::path dir = fresh_dir("ratas-cli-eval-dir");
    const std::string cache = (dir / "cache").string();
    fs::path answers = dir / "answers";
    fs::create_directories(answers);
    std::ofstream(answers / "good.txt")
        << "We summarize the training corpus scale and explain the gateway retry "
           "policy in this report.";
    fs::path out = dir / "results";
    REQUIRE(run_cli("grade --rubric " + fixture("fix2.rubric.json") + " " + answers.string() +
                    " --out-dir " + out.string() + " --cache-dir " + cache)
                .exit_code == 0);

    fs::path gold = dir / "gold.json";
    std::ofstream(gold) << R"([{"answer_id": "good", "gold": 0.8}])";
    auto ok = run_cli("evaluate " + out.string() + " --gold " + gold.string());
    CHECK(ok.exit_code == 0);
    CHECK(ok.output.find("0.0000") != std::string::npos); // perfect MAE row

    std::ofstream(gold, std::ios::trunc) << R"([{"answer_id": "other", "gold": 0.8}])";
    auto unmatched = run_cli("evaluate " + out.string() + " --gold " + gold.string());
    CHECK(unmatched.exit_code == 1);
    CHECK(unmatched.output.find("good") != std::string::npos);
}

TEST_CASE("report prints the stored rendering") {
    fs::path dir = fresh_dir("ratas-cli-report");
    const std::string cache = (dir / "cache").string();
    fs::path answer = dir / "ans.txt";
    std::ofstream(answer) << "We summarize the training corpus scale.";
    fs::path out = dir / "results";
    REQUIRE(run_cli("grade --rubric " + fixture("fix2.rubric.json") + " " + answer.string() +
                    " --out-dir " + out.string() + " --cache-dir " + cache)
                .exit_code == 0);

    auto text = run_cli("report " + (out / "ans.result.json").string());
    REQUIRE(text.exit_code == 0);
    CHECK(text.output.find("Answer Analysis:") != std::string::npos);
    CHECK(text.output.find("Improvement Points:") != std::string::npos);

    auto as_json = run_cli("report " + (out / "ans.result.json").string() + " --json");
    REQUIRE(as_json.exit_code == 0);
    CHECK(nlohmann::json::parse(as_json.output).contains("analysis"));
}

TEST_CASE("unknown flags exit with code 1") {
    auto result = run_cli("grade --bogus x");
    CHECK(result.exit_code == 1);
}
