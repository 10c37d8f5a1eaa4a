#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace sgd {

/// Cost constants for the discrete-event latency model. Decoding a node
/// costs t_prefill + tokens * t_token(model); concurrent decoding is free up
/// to batch_capacity (memory-bandwidth-bound regime), and the one-off
/// skeleton generation costs t_skeleton.
struct LatencyModel {
    double t_skeleton = 0;
    double t_prefill = 0;
    std::map<std::string, double> t_token;
    std::optional<std::size_t> batch_capacity;

    double token_cost(const std::string& model_id) const;
    /// The slowest per-token cost plays the autoregressive baseline.
    double baseline_token_cost() const;
    void validate() const;
};

struct SimNode {
    std::size_t ordinal = 0;
    std::set<std::size_t> deps;
    std::size_t tokens = 1;
    std::string model_id;
};

class CycleDetected : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Makespan of the dependency-constrained schedule: a node starts when its
/// last dependency finishes (later under a capacity cap) and runs for
/// t_prefill + tokens * t_token(model). Throws CycleDetected on a cyclic
/// dependency relation.
double simulate(const std::vector<SimNode>& graph, const LatencyModel& model,
                bool include_skeleton);

/// One prefill plus every token on the baseline model.
double simulate_ar(std::size_t total_tokens, const LatencyModel& model);

/// simulate_ar over the graph's total tokens divided by the skeleton-included
/// graph makespan.
double speedup(const std::vector<SimNode>& graph, const LatencyModel& model);

// --- scenario files ----------------------------------------------------------

struct Scenario {
    std::string name;
    LatencyModel model;
    std::vector<SimNode> nodes;
};

/// Parses a scenario JSON document (a single scenario object or an array).
/// A scenario may omit "constants" when fallback constants are supplied.
std::vector<Scenario> parse_scenarios(const std::string& text,
                                      const std::optional<LatencyModel>& defaults = std::nullopt);
std::vector<Scenario> load_scenarios(const std::string& path,
                                     const std::optional<LatencyModel>& defaults = std::nullopt);

struct ScenarioRow {
    std::string scenario;
    std::string policy;  // "graph" or "ar"
    double makespan = 0;
    double speedup = 0;
};

std::vector<ScenarioRow> run_scenarios(const std::vector<Scenario>& scenarios);
std::string to_csv(const std::vector<ScenarioRow>& rows);

}  // namespace sgd
