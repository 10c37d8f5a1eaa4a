#include "sgd/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace sgd {

using nlohmann::json;

bool operator==(const MockScriptEntry& a, const MockScriptEntry& b) {
    return a.match == b.match && a.is_regex == b.is_regex && a.response == b.response &&
           a.latency == b.latency && a.tokens == b.tokens;
}

bool operator==(const LatencyModel& a, const LatencyModel& b) {
    return a.t_skeleton == b.t_skeleton && a.t_prefill == b.t_prefill && a.t_token == b.t_token &&
           a.batch_capacity == b.batch_capacity;
}

bool operator==(const AppConfig& a, const AppConfig& b) {
    return a.ladder == b.ladder && a.mode == b.mode && a.speculative == b.speculative &&
           a.max_tokens == b.max_tokens && a.temperature == b.temperature &&
           a.batch_capacity == b.batch_capacity && a.fallback == b.fallback &&
           a.template_dir == b.template_dir && a.output_dir == b.output_dir &&
           a.mock_script == b.mock_script && a.mock_speculative == b.mock_speculative &&
           a.judge == b.judge && a.simulator == b.simulator;
}

namespace {

MockScriptEntry parse_script_entry(const json& doc) {
    MockScriptEntry entry;
    entry.match = doc.at("match").get<std::string>();
    entry.is_regex = doc.value("regex", false);
    entry.response = doc.at("response").get<std::string>();
    entry.latency = std::chrono::milliseconds(doc.value("latency_ms", 0));
    if (doc.contains("tokens") && !doc["tokens"].is_null()) {
        entry.tokens = doc["tokens"].get<std::size_t>();
    }
    return entry;
}

json script_entry_to_json(const MockScriptEntry& entry) {
    json doc = {{"match", entry.match},
                {"regex", entry.is_regex},
                {"response", entry.response},
                {"latency_ms", entry.latency.count()}};
    if (entry.tokens) doc["tokens"] = *entry.tokens;
    return doc;
}

LatencyModel parse_latency_model(const json& doc) {
    LatencyModel model;
    model.t_skeleton = doc.value("t_skeleton", 0.0);
    model.t_prefill = doc.value("t_prefill", 0.0);
    if (doc.contains("t_token")) {
        for (const auto& [id, value] : doc["t_token"].items()) {
            model.t_token[id] = value.get<double>();
        }
    }
    if (doc.contains("batch_capacity") && !doc["batch_capacity"].is_null()) {
        model.batch_capacity = doc["batch_capacity"].get<std::size_t>();
    }
    model.validate();
    return model;
}

json latency_model_to_json(const LatencyModel& model) {
    json doc = {{"t_skeleton", model.t_skeleton},
                {"t_prefill", model.t_prefill},
                {"t_token", model.t_token}};
    if (model.batch_capacity) doc["batch_capacity"] = *model.batch_capacity;
    return doc;
}

}  // namespace

AppConfig parse_app_config(const std::string& json_text) {
    json doc = json::parse(json_text, nullptr, false);
    if (doc.is_discarded()) {
        throw ConfigError("config is not valid JSON");
    }
    try {
        AppConfig config;
        for (const json& item : doc.at("ladder")) {
            ModelConfig m;
            m.id = item.at("id").get<std::string>();
            m.size_rank = item.at("size_rank").get<int>();
            m.threshold = item.value("threshold", kTauAlways);
            m.baseline = item.value("baseline", false);
            m.base_url = item.value("base_url", "mock");
            m.api_key_env = item.value("api_key_env", "");
            config.ladder.push_back(std::move(m));
        }
        config.mode = doc.value("mode", "sgd");
        config.speculative = doc.value("speculative", false);
        config.max_tokens = doc.value("max_tokens", 256);
        config.temperature = doc.value("temperature", 0.0);
        if (doc.contains("batch_capacity") && !doc["batch_capacity"].is_null()) {
            config.batch_capacity = doc["batch_capacity"].get<std::size_t>();
        }
        config.fallback = doc.value("fallback", "ar-on-parse-failure");
        if (doc.contains("template_dir") && !doc["template_dir"].is_null()) {
            config.template_dir = doc["template_dir"].get<std::string>();
        }
        config.output_dir = doc.value("output_dir", "runs");
        if (doc.contains("mock")) {
            const json& mock = doc["mock"];
            config.mock_speculative = mock.value("speculative", false);
            for (const json& entry : mock.value("script", json::array())) {
                config.mock_script.push_back(parse_script_entry(entry));
            }
        }
        if (doc.contains("judge") && !doc["judge"].is_null()) {
            const json& judge = doc["judge"];
            JudgeSettings settings;
            settings.model_id = judge.at("model_id").get<std::string>();
            settings.base_url = judge.value("base_url", "mock");
            settings.api_key_env = judge.value("api_key_env", "");
            settings.template_id = judge.value("template_id", "judge-pairwise");
            config.judge = std::move(settings);
        }
        if (doc.contains("simulator") && !doc["simulator"].is_null()) {
            config.simulator = parse_latency_model(doc["simulator"]);
        }

        // Fail fast on anything the run would reject later.
        ladder_from_config(config);
        run_mode_from_string(config.mode);
        if (config.fallback != "ar-on-parse-failure" && config.fallback != "fail") {
            throw std::invalid_argument("fallback must be ar-on-parse-failure or fail");
        }
        if (config.max_tokens < 1) {
            throw std::invalid_argument("max_tokens must be at least 1");
        }
        return config;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }
}

AppConfig load_app_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file: " + path);
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_app_config(text.str());
}

std::string serialize_app_config(const AppConfig& config) {
    json doc;
    doc["ladder"] = json::array();
    for (const ModelConfig& m : config.ladder) {
        doc["ladder"].push_back({{"id", m.id},
                                 {"size_rank", m.size_rank},
                                 {"threshold", m.threshold},
                                 {"baseline", m.baseline},
                                 {"base_url", m.base_url},
                                 {"api_key_env", m.api_key_env}});
    }
    doc["mode"] = config.mode;
    doc["speculative"] = config.speculative;
    doc["max_tokens"] = config.max_tokens;
    doc["temperature"] = config.temperature;
    if (config.batch_capacity) doc["batch_capacity"] = *config.batch_capacity;
    doc["fallback"] = config.fallback;
    if (config.template_dir) doc["template_dir"] = *config.template_dir;
    doc["output_dir"] = config.output_dir;
    if (!config.mock_script.empty() || config.mock_speculative) {
        json script = json::array();
        for (const MockScriptEntry& entry : config.mock_script) {
            script.push_back(script_entry_to_json(entry));
        }
        doc["mock"] = {{"speculative", config.mock_speculative}, {"script", std::move(script)}};
    }
    if (config.judge) {
        doc["judge"] = {{"model_id", config.judge->model_id},
                        {"base_url", config.judge->base_url},
                        {"api_key_env", config.judge->api_key_env},
                        {"template_id", config.judge->template_id}};
    }
    if (config.simulator) doc["simulator"] = latency_model_to_json(*config.simulator);
    return doc.dump(2) + "\n";
}

ModelLadder ladder_from_config(const AppConfig& config) {
    std::vector<ModelSpec> specs;
    for (const ModelConfig& m : config.ladder) {
        specs.push_back({m.id, m.size_rank, m.threshold, m.base_url, m.baseline});
    }
    try {
        return ModelLadder(std::move(specs));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid ladder: ") + e.what());
    }
}

BackendRegistry registry_from_config(const AppConfig& config) {
    BackendRegistry registry;
    std::vector<std::string> mock_models;
    for (const ModelConfig& m : config.ladder) {
        if (m.base_url == "mock") mock_models.push_back(m.id);
    }
    if (config.judge && config.judge->base_url == "mock") {
        mock_models.push_back(config.judge->model_id);
    }
    if (!mock_models.empty()) {
        registry.add("mock", std::make_shared<MockBackend>(config.mock_script, mock_models,
                                                           config.mock_speculative));
    }
    for (const ModelConfig& m : config.ladder) {
        if (m.base_url == "mock" || registry.has(m.base_url)) continue;
        HttpBackendConfig http;
        http.base_url = m.base_url;
        http.api_key_env = m.api_key_env;
        registry.add(m.base_url, std::make_shared<HttpBackend>(http));
    }
    if (config.judge && config.judge->base_url != "mock" && !registry.has(config.judge->base_url)) {
        HttpBackendConfig http;
        http.base_url = config.judge->base_url;
        http.api_key_env = config.judge->api_key_env;
        registry.add(config.judge->base_url, std::make_shared<HttpBackend>(http));
    }
    return registry;
}

PromptLibrary prompts_from_config(const AppConfig& config) {
    PromptLibrary lib = PromptLibrary::builtin();
    if (config.template_dir) lib.load_directory(*config.template_dir);
    return lib;
}

RunConfig run_config_from_config(const AppConfig& config,
                                 const std::optional<std::string>& mode_override,
                                 std::optional<bool> speculative_override) {
    RunConfig run;
    run.mode = run_mode_from_string(mode_override.value_or(config.mode));
    run.ladder = ladder_from_config(config);
    run.speculative_enabled = speculative_override.value_or(config.speculative);
    run.max_tokens = config.max_tokens;
    run.temperature = config.temperature;
    run.batch_capacity = config.batch_capacity;
    run.fallback = config.fallback == "fail" ? RunConfig::Fallback::Fail
                                             : RunConfig::Fallback::ArOnParseFailure;
    return run;
}

std::vector<CalibrationRecord> parse_calibration_records(const std::string& jsonl) {
    std::vector<CalibrationRecord> out;
    std::istringstream in(jsonl);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json doc = json::parse(line, nullptr, false);
        if (doc.is_discarded()) {
            throw std::invalid_argument("calibration line " + std::to_string(line_no) +
                                        " is not valid JSON");
        }
        try {
            CalibrationRecord record;
            record.case_id = doc.at("case_id").get<std::string>();
            record.difficulty = doc.at("difficulty").get<int>();
            if (record.difficulty < kMinDifficulty || record.difficulty > kMaxDifficulty) {
                throw std::invalid_argument("difficulty out of [1,10]");
            }
            for (const auto& [id, value] : doc.at("quality").items()) {
                record.quality[id] = value.get<double>();
            }
            out.push_back(std::move(record));
        } catch (const std::exception& e) {
            throw std::invalid_argument("calibration line " + std::to_string(line_no) + ": " +
                                        e.what());
        }
    }
    return out;
}

std::vector<CalibrationRecord> load_calibration_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot open records file: " + path);
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_calibration_records(text.str());
}

}  // namespace sgd
