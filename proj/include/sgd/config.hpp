#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgd/backend.hpp"
#include "sgd/engine.hpp"
#include "sgd/eval.hpp"
#include "sgd/selection.hpp"
#include "sgd/simulator.hpp"

namespace sgd {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ModelConfig {
    std::string id;
    int size_rank = 0;
    int threshold = kTauAlways;
    bool baseline = false;
    // "mock" binds the model to the config's scripted backend; otherwise an
    // http(s) chat-completions base URL.
    std::string base_url = "mock";
    std::string api_key_env;

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct JudgeSettings {
    std::string model_id;
    std::string base_url = "mock";
    std::string api_key_env;
    std::string template_id = "judge-pairwise";

    friend bool operator==(const JudgeSettings&, const JudgeSettings&) = default;
};

struct AppConfig {
    std::vector<ModelConfig> ladder;
    std::string mode = "sgd";
    bool speculative = false;
    int max_tokens = 256;
    double temperature = 0.0;
    std::optional<std::size_t> batch_capacity;
    std::string fallback = "ar-on-parse-failure";
    std::optional<std::string> template_dir;
    std::string output_dir = "runs";

    std::vector<MockScriptEntry> mock_script;
    bool mock_speculative = false;

    std::optional<JudgeSettings> judge;

    // Default constants for scenarios that omit their own.
    std::optional<LatencyModel> simulator;
};

bool operator==(const MockScriptEntry& a, const MockScriptEntry& b);
bool operator==(const LatencyModel& a, const LatencyModel& b);
bool operator==(const AppConfig& a, const AppConfig& b);

/// Parses and validates a config document; every violation surfaces as
/// ConfigError naming the offending field or invariant.
AppConfig parse_app_config(const std::string& json_text);
AppConfig load_app_config(const std::string& path);
std::string serialize_app_config(const AppConfig& config);

ModelLadder ladder_from_config(const AppConfig& config);
BackendRegistry registry_from_config(const AppConfig& config);
PromptLibrary prompts_from_config(const AppConfig& config);
RunConfig run_config_from_config(const AppConfig& config,
                                 const std::optional<std::string>& mode_override = std::nullopt,
                                 std::optional<bool> speculative_override = std::nullopt);

// --- calibration records -----------------------------------------------------

std::vector<CalibrationRecord> parse_calibration_records(const std::string& jsonl);
std::vector<CalibrationRecord> load_calibration_records(const std::string& path);

}  // namespace sgd
