#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sgd/backend.hpp"
#include "sgd/prompts.hpp"
#include "sgd/scheduler.hpp"
#include "sgd/selection.hpp"
#include "sgd/trace.hpp"

namespace sgd {

enum class RunMode { AR, SoT, SGD, SGDNA };

std::string_view to_string(RunMode mode);
RunMode run_mode_from_string(std::string_view name);

struct RunConfig {
    RunMode mode = RunMode::SGD;
    ModelLadder ladder;
    bool speculative_enabled = false;
    int max_tokens = 256;  // per node; the skeleton and AR calls get 4x
    double temperature = 0.0;
    std::optional<std::size_t> batch_capacity;

    enum class Fallback { ArOnParseFailure, Fail };
    Fallback fallback = Fallback::ArOnParseFailure;

    RetryPolicy retry;
};

class SkeletonFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class BackendFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EmptyBatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Maps the backend references named by ModelSpec::backend to live backends.
class BackendRegistry {
public:
    void add(std::string name, std::shared_ptr<Backend> backend);
    Backend& resolve(const std::string& name) const;
    bool has(const std::string& name) const;

private:
    std::map<std::string, std::shared_ptr<Backend>> backends_;
};

struct RunResult {
    std::string answer;
    RunTrace trace;
};

struct BatchItem {
    std::string question_id;
    std::string question;
    std::optional<std::string> answer;
    std::optional<std::string> error;
    RunTrace trace;
};

/// Question-to-answer pipeline: skeleton prompt, parse, dependency-aware
/// concurrent node decoding with per-node model routing, index-order answer
/// assembly, full tracing. AR, SoT and SGD-NA run as degenerate modes of the
/// same loop. The engine object is shareable; each answer() call keeps its
/// own state and serializes scheduler mutations through one coordinator.
class Engine {
public:
    Engine(BackendRegistry backends, PromptLibrary prompts);

    RunResult answer(const std::string& question, const RunConfig& config,
                     const std::string& question_id = "q1");

    /// Sequential over questions to keep per-question timing honest; an error
    /// on one question is recorded and the batch continues.
    std::vector<BatchItem> answer_batch(const std::vector<std::string>& questions,
                                        const RunConfig& config);

private:
    BackendRegistry backends_;
    PromptLibrary prompts_;
};

}  // namespace sgd
