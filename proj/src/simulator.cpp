#include "sgd/simulator.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace sgd {

using nlohmann::json;

double LatencyModel::token_cost(const std::string& model_id) const {
    auto it = t_token.find(model_id);
    if (it == t_token.end()) {
        throw std::invalid_argument("no per-token cost for model: " + model_id);
    }
    return it->second;
}

double LatencyModel::baseline_token_cost() const {
    if (t_token.empty()) {
        throw std::invalid_argument("latency model has no per-token costs");
    }
    double cost = 0;
    for (const auto& [_, value] : t_token) cost = std::max(cost, value);
    return cost;
}

void LatencyModel::validate() const {
    if (t_skeleton < 0 || t_prefill < 0) {
        throw std::invalid_argument("latency constants must be non-negative");
    }
    for (const auto& [id, value] : t_token) {
        if (value < 0) {
            throw std::invalid_argument("per-token cost for " + id + " must be non-negative");
        }
    }
    if (batch_capacity && *batch_capacity == 0) {
        throw std::invalid_argument("batch capacity must be at least 1");
    }
}

namespace {

struct IndexedGraph {
    std::vector<const SimNode*> nodes;             // topological order
    std::map<std::size_t, std::size_t> position;  // ordinal -> slot
};

// Kahn's algorithm; also validates references and uniqueness.
IndexedGraph topo_order(const std::vector<SimNode>& graph) {
    std::map<std::size_t, const SimNode*> by_ordinal;
    for (const SimNode& n : graph) {
        if (n.tokens < 1) {
            throw std::invalid_argument("node " + std::to_string(n.ordinal) +
                                        " must have at least 1 token");
        }
        if (!by_ordinal.emplace(n.ordinal, &n).second) {
            throw std::invalid_argument("duplicate ordinal " + std::to_string(n.ordinal));
        }
    }
    std::map<std::size_t, std::size_t> pending_deps;
    std::map<std::size_t, std::vector<std::size_t>> dependents;
    for (const SimNode& n : graph) {
        pending_deps[n.ordinal] = n.deps.size();
        for (std::size_t d : n.deps) {
            if (!by_ordinal.contains(d)) {
                throw std::invalid_argument("node " + std::to_string(n.ordinal) +
                                            " depends on unknown ordinal " + std::to_string(d));
            }
            dependents[d].push_back(n.ordinal);
        }
    }

    IndexedGraph out;
    std::vector<std::size_t> queue;
    for (const auto& [ordinal, count] : pending_deps) {
        if (count == 0) queue.push_back(ordinal);
    }
    while (!queue.empty()) {
        std::size_t ordinal = queue.front();
        queue.erase(queue.begin());
        out.position[ordinal] = out.nodes.size();
        out.nodes.push_back(by_ordinal.at(ordinal));
        for (std::size_t next : dependents[ordinal]) {
            if (--pending_deps[next] == 0) queue.push_back(next);
        }
    }
    if (out.nodes.size() != graph.size()) {
        throw CycleDetected("dependency relation contains a cycle");
    }
    return out;
}

}  // namespace

double simulate(const std::vector<SimNode>& graph, const LatencyModel& model,
                bool include_skeleton) {
    model.validate();
    if (graph.empty()) {
        return include_skeleton ? model.t_skeleton : 0;
    }
    IndexedGraph order = topo_order(graph);

    auto duration_of = [&](const SimNode& n) {
        return model.t_prefill + static_cast<double>(n.tokens) * model.token_cost(n.model_id);
    };

    double makespan = 0;
    if (!model.batch_capacity) {
        std::map<std::size_t, double> finish;
        for (const SimNode* n : order.nodes) {
            double start = 0;
            for (std::size_t d : n->deps) start = std::max(start, finish.at(d));
            finish[n->ordinal] = start + duration_of(*n);
            makespan = std::max(makespan, finish[n->ordinal]);
        }
    } else {
        // List scheduling: at most `capacity` nodes decode at once; waiting
        // nodes start in (ready time, ordinal) order.
        std::size_t capacity = *model.batch_capacity;
        std::map<std::size_t, double> finish;
        std::map<std::size_t, double> ready_at;
        std::vector<std::pair<double, std::size_t>> running;  // (finish, ordinal)
        std::set<std::size_t> started;
        double now = 0;
        for (const SimNode* n : order.nodes) {
            if (n->deps.empty()) ready_at[n->ordinal] = 0;
        }
        std::size_t remaining = graph.size();
        while (remaining > 0) {
            // Start every waiting node the capacity allows at time `now`.
            std::vector<std::pair<double, std::size_t>> waiting;
            for (const auto& [ordinal, t] : ready_at) {
                if (t <= now && !started.contains(ordinal)) waiting.push_back({t, ordinal});
            }
            std::sort(waiting.begin(), waiting.end());
            for (const auto& [t, ordinal] : waiting) {
                if (running.size() >= capacity) break;
                const SimNode* n = order.nodes[order.position.at(ordinal)];
                double end = now + duration_of(*n);
                running.push_back({end, ordinal});
                started.insert(ordinal);
            }
            // Advance to the earliest finish.
            auto soonest = std::min_element(running.begin(), running.end());
            now = soonest->first;
            std::size_t done = soonest->second;
            running.erase(soonest);
            finish[done] = now;
            makespan = std::max(makespan, now);
            --remaining;
            for (const SimNode* n : order.nodes) {
                if (finish.contains(n->ordinal) || ready_at.contains(n->ordinal)) continue;
                bool ready = std::all_of(n->deps.begin(), n->deps.end(),
                                         [&](std::size_t d) { return finish.contains(d); });
                if (ready) {
                    double t = 0;
                    for (std::size_t d : n->deps) t = std::max(t, finish.at(d));
                    ready_at[n->ordinal] = t;
                }
            }
        }
    }
    return makespan + (include_skeleton ? model.t_skeleton : 0);
}

double simulate_ar(std::size_t total_tokens, const LatencyModel& model) {
    model.validate();
    if (total_tokens < 1) {
        throw std::invalid_argument("total_tokens must be at least 1");
    }
    return model.t_prefill + static_cast<double>(total_tokens) * model.baseline_token_cost();
}

double speedup(const std::vector<SimNode>& graph, const LatencyModel& model) {
    std::size_t total_tokens = 0;
    for (const SimNode& n : graph) total_tokens += n.tokens;
    return simulate_ar(total_tokens, model) / simulate(graph, model, /*include_skeleton=*/true);
}

namespace {

Scenario parse_scenario(const json& doc, const std::optional<LatencyModel>& defaults) {
    Scenario s;
    s.name = doc.value("name", "scenario");
    if (doc.contains("constants")) {
        const json& constants = doc["constants"];
        s.model.t_skeleton = constants.value("t_skeleton", 0.0);
        s.model.t_prefill = constants.value("t_prefill", 0.0);
        for (const auto& [id, value] : constants.at("t_token").items()) {
            s.model.t_token[id] = value.get<double>();
        }
        if (constants.contains("batch_capacity") && !constants["batch_capacity"].is_null()) {
            s.model.batch_capacity = constants["batch_capacity"].get<std::size_t>();
        }
    } else if (defaults) {
        s.model = *defaults;
    } else {
        throw std::invalid_argument("scenario '" + s.name +
                                    "' has no constants and no defaults were supplied");
    }
    for (const json& item : doc.at("nodes")) {
        SimNode n;
        n.ordinal = item.at("id").get<std::size_t>();
        n.tokens = item.at("tokens").get<std::size_t>();
        n.model_id = item.at("model").get<std::string>();
        for (const json& d : item.value("deps", json::array())) {
            n.deps.insert(d.get<std::size_t>());
        }
        s.nodes.push_back(std::move(n));
    }
    return s;
}

}  // namespace

std::vector<Scenario> parse_scenarios(const std::string& text,
                                      const std::optional<LatencyModel>& defaults) {
    json doc = json::parse(text);
    std::vector<Scenario> out;
    if (doc.is_array()) {
        for (const json& item : doc) out.push_back(parse_scenario(item, defaults));
    } else {
        out.push_back(parse_scenario(doc, defaults));
    }
    return out;
}

std::vector<Scenario> load_scenarios(const std::string& path,
                                     const std::optional<LatencyModel>& defaults) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot open scenario file: " + path);
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_scenarios(text.str(), defaults);
}

std::vector<ScenarioRow> run_scenarios(const std::vector<Scenario>& scenarios) {
    std::vector<ScenarioRow> rows;
    for (const Scenario& s : scenarios) {
        std::size_t total_tokens = 0;
        for (const SimNode& n : s.nodes) total_tokens += n.tokens;
        double graph_makespan = simulate(s.nodes, s.model, /*include_skeleton=*/true);
        double ar_makespan = simulate_ar(total_tokens, s.model);
        rows.push_back({s.name, "graph", graph_makespan, ar_makespan / graph_makespan});
        rows.push_back({s.name, "ar", ar_makespan, 1.0});
    }
    return rows;
}

std::string to_csv(const std::vector<ScenarioRow>& rows) {
    std::ostringstream out;
    out << "scenario,policy,makespan,speedup\n";
    for (const ScenarioRow& r : rows) {
        out << r.scenario << ',' << r.policy << ',' << r.makespan << ',' << r.speedup << '\n';
    }
    return out.str();
}

}  // namespace sgd
