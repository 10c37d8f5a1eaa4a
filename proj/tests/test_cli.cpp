#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "sgd/config.hpp"
#include "sgd/report.hpp"
#include "sgd/trace.hpp"

using namespace sgd;

namespace {

const char* kMinimalConfig = R"({
  "ladder": [
    {"id": "small", "size_rank": 1, "threshold": 5, "base_url": "mock"},
    {"id": "large", "size_rank": 2, "threshold": 11, "baseline": true, "base_url": "mock"}
  ],
  "mode": "sgd",
  "mock": {"script": [{"match": "", "response": "hello", "latency_ms": 0, "tokens": 3}]}
})";

}  // namespace

TEST_CASE("config parses with defaults and builds a working registry") {
    AppConfig config = parse_app_config(kMinimalConfig);
    CHECK(config.max_tokens == 256);
    CHECK(config.fallback == "ar-on-parse-failure");
    CHECK(config.output_dir == "runs");

    ModelLadder ladder = ladder_from_config(config);
    CHECK(ladder.baseline().id == "large");

    BackendRegistry registry = registry_from_config(config);
    GenerationResult r = registry.resolve("mock").generate({"small", "any prompt", 16, 0, "r1", {}});
    CHECK(r.text == "hello");
    // the config-built mock only knows the ladder models
    CHECK_THROWS_AS(registry.resolve("mock").generate({"stranger", "p", 16, 0, "r2", {}}),
                    BackendError);

    RunConfig run = run_config_from_config(config);
    CHECK(run.mode == RunMode::SGD);
    CHECK(run.fallback == RunConfig::Fallback::ArOnParseFailure);
    RunConfig overridden = run_config_from_config(config, std::string("ar"), true);
    CHECK(overridden.mode == RunMode::AR);
    CHECK(overridden.speculative_enabled);
}

TEST_CASE("config violations surface as ConfigError naming the problem") {
    CHECK_THROWS_AS(parse_app_config("not json"), ConfigError);
    CHECK_THROWS_AS(parse_app_config(R"({"ladder": []})"), ConfigError);

    std::string two_baselines = R"({"ladder": [
        {"id": "a", "size_rank": 1, "baseline": true},
        {"id": "b", "size_rank": 2, "baseline": true}]})";
    CHECK_THROWS_WITH_AS(parse_app_config(two_baselines),
                         "invalid ladder: exactly one model must be the baseline", ConfigError);

    std::string bad_mode = R"({"ladder": [{"id": "a", "size_rank": 1, "baseline": true}],
                               "mode": "warp"})";
    CHECK_THROWS_AS(parse_app_config(bad_mode), ConfigError);
}

TEST_CASE("config round-trips through serialize and parse") {
    AppConfig config = parse_app_config(kMinimalConfig);
    config.template_dir = "templates";
    config.batch_capacity = 8;
    config.judge = JudgeSettings{"judge-model", "mock", "", "judge-pairwise"};
    LatencyModel sim;
    sim.t_skeleton = 1.0;
    sim.t_prefill = 0.1;
    sim.t_token = {{"large", 0.01}};
    config.simulator = sim;

    AppConfig reloaded = parse_app_config(serialize_app_config(config));
    CHECK(reloaded == config);
    // and serialization is a fixed point
    CHECK(serialize_app_config(reloaded) == serialize_app_config(config));
}

TEST_CASE("calibration record parsing reports the offending line") {
    std::string good =
        R"({"case_id": "c1", "difficulty": 3, "quality": {"small": 0.8, "large": 0.9}})" "\n"
        "\n"
        R"({"case_id": "c2", "difficulty": 7, "quality": {"small": 0.7, "large": 0.9}})" "\n";
    std::vector<CalibrationRecord> records = parse_calibration_records(good);
    REQUIRE(records.size() == 2);
    CHECK(records[1].difficulty == 7);

    try {
        parse_calibration_records("{\"case_id\": \"c1\"}\nnot json\n");
        FAIL("expected an error");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("line 1") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_calibration_records(
                        R"({"case_id": "c", "difficulty": 12, "quality": {}})"),
                    std::invalid_argument);
}

TEST_CASE("trace aggregation computes per-mode throughput and speedup") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / ("sgd-report-" + std::to_string(::getpid()));
    fs::create_directories(dir);

    auto write_trace = [&](const std::string& name, const std::string& mode, std::size_t tokens,
                           double wall) {
        std::ofstream out(dir / name);
        out << R"({"event":"run-started","mode":")" << mode << R"(","question_id":"q","t":0.0})"
            << "\n";
        out << R"({"event":"node-completed","node":1,"tokens":)" << tokens << R"(,"t":)"
            << wall * 0.9 << "}\n";
        out << R"({"event":"answer-assembled","t":)" << wall << "}\n";
    };
    // ar: 1000 tokens in 16.9 s; sgd: 1000 tokens in 10 s -> 1.69x
    write_trace("trace-a.jsonl", "ar", 1000, 16.9);
    write_trace("trace-b.jsonl", "sgd", 1000, 10.0);

    std::vector<ReportRow> rows = aggregate_traces(dir.string());
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].mode == "ar");
    CHECK(rows[0].speedup_vs_ar == doctest::Approx(1.0));
    CHECK(rows[1].mode == "sgd");
    CHECK(rows[1].tokens == 1000);
    CHECK(*rows[1].speedup_vs_ar == doctest::Approx(1.69).epsilon(1e-9));

    std::string csv = report_csv(rows);
    CHECK(csv.find("sgd,1,1000,10,100,1.69") != std::string::npos);

    fs::remove_all(dir);
    CHECK(aggregate_traces(dir.string()).empty());  // missing dir -> empty table
}

#ifdef SGD_CLI_PATH

namespace {

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

int run_cli(const std::string& args) {
    int status = std::system((std::string(SGD_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("cli runs are byte-identical given a mock backend and fixed config") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / ("sgd-cli-" + std::to_string(::getpid()));
    fs::create_directories(dir);
    std::string config = R"json({
      "ladder": [
        {"id": "small", "size_rank": 1, "threshold": 5, "base_url": "mock"},
        {"id": "large", "size_rank": 2, "threshold": 11, "baseline": true, "base_url": "mock"}
      ],
      "mode": "sgd",
      "mock": {"script": [
        {"match": "Create a structured outline", "response": "Node('One', dependency=[], difficulty=2)\nNode('Two', dependency=[1], difficulty=8)\n", "tokens": 20},
        {"match": "Current Node (Node 1)", "response": "first part", "tokens": 2},
        {"match": "Current Node (Node 2)", "response": "second part", "tokens": 2},
        {"match": "", "response": "direct answer", "tokens": 2}
      ]}
    })json";
    std::ofstream(dir / "config.json") << config;

    std::string base = "run 'What is a good morning routine?' --config " +
                       (dir / "config.json").string();
    REQUIRE(run_cli(base + " --out " + (dir / "a").string()) == 0);
    REQUIRE(run_cli(base + " --out " + (dir / "b").string()) == 0);
    CHECK(slurp(dir / "a" / "answer-q1.txt") == slurp(dir / "b" / "answer-q1.txt"));
    CHECK(slurp(dir / "a" / "answer-q1.txt").find("second part") != std::string::npos);

    // ar mode leaves no skeleton events in the trace
    REQUIRE(run_cli(base + " --mode ar --out " + (dir / "c").string()) == 0);
    CHECK(slurp(dir / "c" / "trace-q1.jsonl").find("skeleton") == std::string::npos);

    fs::remove_all(dir);
}

#ifdef SGD_DATA_DIR

TEST_CASE("cli simulate reproduces the reference scenario speedups") {
    std::string csv;
    {
        std::string cmd = std::string(SGD_CLI_PATH) + " simulate " + SGD_DATA_DIR +
                          "/scenarios/reference_shapes.json 2>/dev/null";
        FILE* pipe = popen(cmd.c_str(), "r");
        REQUIRE(pipe != nullptr);
        char buf[512];
        while (fgets(buf, sizeof(buf), pipe) != nullptr) csv += buf;
        REQUIRE(pclose(pipe) == 0);
    }
    CHECK(csv.find("wide4,graph,2.1,1.95238") != std::string::npos);
    CHECK(csv.find("chain4,graph,5.4,0.759259") != std::string::npos);
    CHECK(csv.find("wide4,ar,4.1,1") != std::string::npos);
}

TEST_CASE("cli report on an empty directory prints the header and exits 0") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / ("sgd-empty-" + std::to_string(::getpid()));
    fs::create_directories(dir);
    CHECK(run_cli("report " + dir.string()) == 0);
    CHECK(run_cli("report " + (dir / "never-created").string()) == 0);
    fs::remove_all(dir);
}

TEST_CASE("cli evaluate judges a corpus and prints the summary") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / ("sgd-eval-" + std::to_string(::getpid()));
    fs::create_directories(dir);
    std::ofstream(dir / "config.json") << R"json({
      "ladder": [{"id": "large", "size_rank": 1, "baseline": true, "base_url": "mock"}],
      "judge": {"model_id": "judge", "base_url": "mock"},
      "mock": {"script": [
        {"match": "Answer A:\nstrong", "response": "first wins [[A]]"},
        {"match": "Answer B:\nstrong", "response": "second wins [[B]]"},
        {"match": "", "response": "even [[C]]"}
      ]}
    })json";
    std::ofstream(dir / "corpus.jsonl")
        << R"({"question_id": "q1", "category": "writing", "method": "sgd", "answer": "strong", "question": "Write?"})"
        << "\n"
        << R"({"question_id": "q1", "category": "writing", "method": "ar", "answer": "weak"})"
        << "\n";

    std::string cmd = std::string(SGD_CLI_PATH) + " evaluate " + (dir / "corpus.jsonl").string() +
                      " --method-a sgd --method-b ar --config " + (dir / "config.json").string() +
                      " --out " + (dir / "out").string() + " 2>/dev/null";
    std::string output;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[512];
    while (fgets(buf, sizeof(buf), pipe) != nullptr) output += buf;
    REQUIRE(pclose(pipe) == 0);

    CHECK(output.find("net win rate (sgd): 1.000") != std::string::npos);
    CHECK(slurp(dir / "out" / "records.jsonl").find("\"verdict\":\"win_a\"") != std::string::npos);
    fs::remove_all(dir);
}

#endif  // SGD_DATA_DIR

TEST_CASE("cli exit codes: 2 for config errors, 1 for runtime failures") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / ("sgd-cli-exit-" + std::to_string(::getpid()));
    fs::create_directories(dir);
    std::ofstream(dir / "two_baselines.json") << R"({"ladder": [
        {"id": "a", "size_rank": 1, "baseline": true},
        {"id": "b", "size_rank": 2, "baseline": true}]})";
    CHECK(run_cli("run 'Q' --config " + (dir / "two_baselines.json").string()) == 2);

    // unmatched mock prompt with fallback=fail -> runtime error
    std::ofstream(dir / "no_script.json") << R"({"ladder": [
        {"id": "a", "size_rank": 1, "baseline": true, "base_url": "mock"}],
        "fallback": "fail", "mock": {"script": []}})";
    CHECK(run_cli("run 'Q' --config " + (dir / "no_script.json").string() + " --out " +
                  (dir / "out").string()) == 1);
    fs::remove_all(dir);
}

#endif  // SGD_CLI_PATH

TEST_CASE("run traces serialize to one JSON object per line") {
    RunTrace trace("q7", "sgd");
    TraceEvent dispatched;
    dispatched.kind = TraceEvent::Kind::NodeDispatched;
    dispatched.node = 1;
    dispatched.model = "large";
    dispatched.decode_mode = "large-ar:large";
    dispatched.prompt = "p";
    trace.add(std::move(dispatched));
    TraceEvent completed;
    completed.kind = TraceEvent::Kind::NodeCompleted;
    completed.node = 1;
    completed.tokens = 5;
    trace.add(std::move(completed));
    TraceEvent assembled;
    assembled.kind = TraceEvent::Kind::AnswerAssembled;
    trace.add(std::move(assembled));

    std::string jsonl = trace.to_jsonl();
    CHECK(std::count(jsonl.begin(), jsonl.end(), '\n') == 4);
    CHECK(jsonl.find(R"("event":"run-started")") != std::string::npos);
    CHECK(jsonl.find(R"("question_id":"q7")") != std::string::npos);
    CHECK(jsonl.find(R"("tokens":5)") != std::string::npos);
    CHECK(trace.total_completion_tokens() == 5);
    CHECK(trace.wall_time() >= 0);
}
