#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "sgd/config.hpp"
#include "sgd/engine.hpp"
#include "sgd/eval.hpp"
#include "sgd/report.hpp"
#include "sgd/selection.hpp"
#include "sgd/simulator.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path resolve_out_dir(const std::optional<std::string>& out_flag,
                         const std::string& configured_base) {
    if (out_flag) return fs::path(*out_flag);
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream name;
    name << "run-" << std::put_time(&tm, "%Y%m%d-%H%M%S") << "-" << ::getpid();
    return fs::path(configured_base) / name.str();
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << content;
}

struct Question {
    std::string id;
    std::string text;
};

std::vector<Question> load_questions(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open question file: " + path);
    }
    std::vector<Question> questions;
    std::string line;
    bool jsonl = path.ends_with(".jsonl");
    std::size_t n = 0;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        ++n;
        if (jsonl) {
            json doc = json::parse(line);
            std::string id = doc.value("question_id", "q" + std::to_string(n));
            questions.push_back({id, doc.at("question").get<std::string>()});
        } else {
            questions.push_back({"q" + std::to_string(n), line});
        }
    }
    return questions;
}

int cmd_run(const std::string& config_path, const std::optional<std::string>& question,
            const std::optional<std::string>& question_file,
            const std::optional<std::string>& mode, bool speculative,
            const std::optional<std::string>& out_flag, const std::string& question_id) {
    sgd::AppConfig app = sgd::load_app_config(config_path);
    sgd::Engine engine(sgd::registry_from_config(app), sgd::prompts_from_config(app));
    sgd::RunConfig run = sgd::run_config_from_config(
        app, mode, speculative ? std::optional<bool>(true) : std::nullopt);

    fs::path out_dir = resolve_out_dir(out_flag, app.output_dir);
    fs::create_directories(out_dir);

    std::vector<Question> questions;
    if (question) {
        questions.push_back({question_id, *question});
    } else {
        questions = load_questions(*question_file);
    }

    int failures = 0;
    std::size_t total_tokens = 0;
    double total_wall = 0;
    for (const Question& q : questions) {
        try {
            sgd::RunResult result = engine.answer(q.text, run, q.id);
            total_tokens += result.trace.total_completion_tokens();
            total_wall += result.trace.wall_time();
            write_file(out_dir / ("answer-" + q.id + ".txt"), result.answer);
            write_file(out_dir / ("trace-" + q.id + ".jsonl"), result.trace.to_jsonl());
            if (questions.size() > 1) std::cout << "--- " << q.id << " ---\n";
            std::cout << result.answer << "\n";
        } catch (const std::exception& e) {
            ++failures;
            std::cerr << q.id << ": " << e.what() << "\n";
            if (questions.size() == 1) throw;
        }
    }
    if (questions.size() > 1) {
        std::cerr << "questions=" << questions.size() << " failures=" << failures
                  << " tokens=" << total_tokens << " wall_s=" << total_wall << "\n";
    }
    std::cerr << "artifacts in " << out_dir.string() << "\n";
    return failures == 0 ? 0 : 1;
}

int cmd_calibrate(const std::string& records_path, double epsilon, const std::string& config_path,
                  const std::string& out_path) {
    sgd::AppConfig app = sgd::load_app_config(config_path);
    sgd::ModelLadder ladder = sgd::ladder_from_config(app);
    std::vector<sgd::CalibrationRecord> records = sgd::load_calibration_records(records_path);
    if (records.empty()) {
        throw std::runtime_error("records file has no calibration records");
    }

    std::cout << "model      tau  worst-gap  feasible\n";
    for (const sgd::CalibrationScanRow& row : sgd::calibration_scan(records, epsilon, ladder)) {
        std::cout << std::left << std::setw(10) << row.model_id << " " << std::setw(4) << row.tau;
        if (row.max_gap) {
            std::cout << std::setw(10) << std::fixed << std::setprecision(4) << *row.max_gap;
        } else {
            std::cout << std::setw(10) << "-";
        }
        std::cout << " " << (row.feasible ? "yes" : "no") << "\n";
    }

    std::map<std::string, int> thresholds = sgd::calibrate_thresholds(records, epsilon, ladder);
    json doc(thresholds);
    write_file(out_path, doc.dump(2) + "\n");
    for (const auto& [model, tau] : thresholds) {
        std::cout << "tau(" << model << ") = " << tau << "\n";
    }
    std::cout << "thresholds written to " << out_path << "\n";
    return 0;
}

int cmd_simulate(const std::string& scenario_path, const std::optional<std::string>& config_path,
                 const std::optional<std::string>& out_path) {
    std::optional<sgd::LatencyModel> defaults;
    if (config_path) {
        defaults = sgd::load_app_config(*config_path).simulator;
    }
    std::vector<sgd::Scenario> scenarios = sgd::load_scenarios(scenario_path, defaults);
    std::string csv = sgd::to_csv(sgd::run_scenarios(scenarios));
    if (out_path) {
        write_file(*out_path, csv);
        std::cerr << "report written to " << *out_path << "\n";
    }
    std::cout << csv;
    return 0;
}

int cmd_evaluate(const std::string& corpus_path, const std::string& method_a,
                 const std::string& method_b, const std::string& config_path, std::size_t parallel,
                 const std::optional<std::string>& out_flag) {
    sgd::AppConfig app = sgd::load_app_config(config_path);
    if (!app.judge) {
        throw sgd::ConfigError("config has no judge section");
    }
    sgd::BackendRegistry registry = sgd::registry_from_config(app);
    sgd::PromptLibrary prompts = sgd::prompts_from_config(app);
    sgd::JudgeConfig judge_config;
    judge_config.model_id = app.judge->model_id;
    judge_config.template_id = app.judge->template_id;

    std::vector<sgd::AnswerEntry> corpus = sgd::load_answer_corpus(corpus_path);
    sgd::CorpusEvaluation eval =
        sgd::evaluate_corpus(corpus, method_a, method_b, registry.resolve(app.judge->base_url),
                             prompts, judge_config, parallel);

    fs::path out_dir = resolve_out_dir(out_flag, app.output_dir);
    fs::create_directories(out_dir);
    write_file(out_dir / "records.jsonl", sgd::records_to_jsonl(eval.records));
    std::string summary = sgd::summary_table(eval.records, method_a, method_b);
    if (eval.skipped > 0) {
        summary += "skipped (unparseable verdicts): " + std::to_string(eval.skipped) + "\n";
    }
    write_file(out_dir / "summary.txt", summary);
    std::cout << summary;
    std::cerr << "records in " << out_dir.string() << "\n";
    return 0;
}

int cmd_report(const std::string& trace_dir, const std::optional<std::string>& out_path) {
    std::string csv = sgd::report_csv(sgd::aggregate_traces(trace_dir));
    if (out_path) write_file(*out_path, csv);
    std::cout << csv;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"skeleton-graph decoding orchestrator"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "answer a question (or a file of questions)");
    std::optional<std::string> question;
    std::optional<std::string> question_file;
    std::string run_config_path;
    std::optional<std::string> run_mode;
    bool run_speculative = false;
    std::optional<std::string> run_out;
    std::string run_qid = "q1";
    run->add_option("question", question, "question text");
    run->add_option("--question-file", question_file, "file with one question per line or JSONL");
    run->add_option("--config", run_config_path, "config JSON path")->required();
    run->add_option("--mode", run_mode, "ar|sot|sgd|sgd-na (overrides the config)");
    run->add_flag("--speculative", run_speculative, "enable speculative decoding routing");
    run->add_option("--out", run_out, "output directory (default: timestamped under output_dir)");
    run->add_option("--id", run_qid, "question id for artifact names");

    auto* calibrate = app.add_subcommand("calibrate", "calibrate difficulty thresholds");
    std::string records_path;
    double epsilon = 0.15;
    std::string calibrate_config_path;
    std::string thresholds_out = "thresholds.json";
    calibrate->add_option("records", records_path, "calibration records JSONL")->required();
    calibrate->add_option("--epsilon", epsilon, "max tolerated worst-case quality gap");
    calibrate->add_option("--config", calibrate_config_path, "config JSON path")->required();
    calibrate->add_option("--out", thresholds_out, "thresholds JSON output path");

    auto* simulate = app.add_subcommand("simulate", "run latency scenarios");
    std::string scenario_path;
    std::optional<std::string> simulate_config;
    std::optional<std::string> simulate_out;
    simulate->add_option("scenario", scenario_path, "scenario JSON path")->required();
    simulate->add_option("--config", simulate_config, "config JSON (fallback simulator constants)");
    simulate->add_option("--out", simulate_out, "CSV output path");

    auto* evaluate = app.add_subcommand("evaluate", "judge an answer corpus pairwise");
    std::string corpus_path;
    std::string method_a = "sgd";
    std::string method_b = "ar";
    std::string evaluate_config_path;
    std::size_t parallel = 1;
    std::optional<std::string> evaluate_out;
    evaluate->add_option("corpus", corpus_path, "answers corpus JSONL")->required();
    evaluate->add_option("--method-a", method_a, "first method name");
    evaluate->add_option("--method-b", method_b, "second method name");
    evaluate->add_option("--config", evaluate_config_path, "config JSON path")->required();
    evaluate->add_option("--parallel", parallel, "concurrent judge calls");
    evaluate->add_option("--out", evaluate_out, "output directory");

    auto* report = app.add_subcommand("report", "aggregate traces into a throughput table");
    std::string trace_dir;
    std::optional<std::string> report_out;
    report->add_option("trace-dir", trace_dir, "directory of trace JSONL files")->required();
    report->add_option("--out", report_out, "CSV output path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            if (!question && !question_file) {
                std::cerr << "run needs a question or --question-file\n";
                return 2;
            }
            return cmd_run(run_config_path, question, question_file, run_mode, run_speculative,
                           run_out, run_qid);
        }
        if (calibrate->parsed()) {
            return cmd_calibrate(records_path, epsilon, calibrate_config_path, thresholds_out);
        }
        if (simulate->parsed()) {
            return cmd_simulate(scenario_path, simulate_config, simulate_out);
        }
        if (evaluate->parsed()) {
            return cmd_evaluate(corpus_path, method_a, method_b, evaluate_config_path, parallel,
                                evaluate_out);
        }
        if (report->parsed()) {
            return cmd_report(trace_dir, report_out);
        }
    } catch (const sgd::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
