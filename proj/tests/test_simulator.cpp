#include <doctest.h>

#include <random>

#include "sgd/scheduler.hpp"
#include "sgd/simulator.hpp"
#include "test_support.hpp"

using namespace sgd;

namespace {

LatencyModel paper_constants() {
    LatencyModel m;
    m.t_skeleton = 1.0;
    m.t_prefill = 0.1;
    m.t_token = {{"large", 0.01}};
    return m;
}

std::vector<SimNode> wide(std::size_t n, std::size_t tokens, const std::string& model = "large") {
    std::vector<SimNode> nodes;
    for (std::size_t i = 1; i <= n; ++i) nodes.push_back({i, {}, tokens, model});
    return nodes;
}

std::vector<SimNode> chain(std::size_t n, std::size_t tokens, const std::string& model = "large") {
    std::vector<SimNode> nodes;
    for (std::size_t i = 1; i <= n; ++i) {
        SimNode node{i, {}, tokens, model};
        if (i > 1) node.deps.insert(i - 1);
        nodes.push_back(std::move(node));
    }
    return nodes;
}

std::vector<SimNode> from_graph(const SkeletonGraph& g, std::size_t tokens,
                                const std::string& model) {
    std::vector<SimNode> nodes;
    for (const SkeletonNode& n : g.nodes) nodes.push_back({n.index, n.deps, tokens, model});
    return nodes;
}

}  // namespace

TEST_CASE("hand-derived makespans: 4-wide, 4-chain, single node") {
    LatencyModel m = paper_constants();
    CHECK(simulate(wide(4, 100), m, true) == doctest::Approx(2.1).epsilon(1e-12));
    CHECK(simulate(chain(4, 100), m, true) == doctest::Approx(5.4).epsilon(1e-12));
    CHECK(simulate(wide(1, 100), m, false) == doctest::Approx(1.1).epsilon(1e-12));
}

TEST_CASE("hand-derived autoregressive costs") {
    LatencyModel m = paper_constants();
    CHECK(simulate_ar(400, m) == doctest::Approx(4.1).epsilon(1e-12));
    CHECK(simulate_ar(1, m) == doctest::Approx(0.11).epsilon(1e-12));
    LatencyModel free_prefill = m;
    free_prefill.t_prefill = 0;
    CHECK(simulate_ar(250, free_prefill) == doctest::Approx(2.5).epsilon(1e-12));
    CHECK_THROWS_AS(simulate_ar(0, m), std::invalid_argument);
}

TEST_CASE("speedup of the documented shapes") {
    LatencyModel m = paper_constants();
    CHECK(speedup(wide(4, 100), m) == doctest::Approx(4.1 / 2.1).epsilon(1e-12));
    CHECK(speedup(chain(4, 100), m) == doctest::Approx(4.1 / 5.4).epsilon(1e-12));
    CHECK(speedup(chain(4, 100), m) < 1.0);
    // one node: same work plus skeleton overhead is always a slowdown
    CHECK(speedup(wide(1, 100), m) < 1.0);
}

TEST_CASE("wide-graph speedup approaches n as tokens grow") {
    LatencyModel m = paper_constants();
    double s = speedup(wide(8, 10'000'000), m);
    CHECK(s > 7.99);
    CHECK(s <= 8.0);
}

TEST_CASE("a pure chain with positive overheads is always a slowdown") {
    std::mt19937 rng(31);
    std::uniform_int_distribution<std::size_t> len(1, 10);
    std::uniform_int_distribution<std::size_t> tokens(1, 500);
    for (int iter = 0; iter < 50; ++iter) {
        LatencyModel m = paper_constants();
        CHECK(speedup(chain(len(rng), tokens(rng)), m) < 1.0);
    }
}

TEST_CASE("uncapped makespan equals the scheduler's critical path") {
    std::mt19937 rng(17);
    std::uniform_int_distribution<std::size_t> tokens(10, 300);
    for (int iter = 0; iter < 100; ++iter) {
        SkeletonGraph g = test::random_graph(rng, SkeletonMode::NonAdaptive, 10);
        LatencyModel m = paper_constants();
        std::vector<SimNode> nodes;
        std::map<std::size_t, double> cost;
        for (const SkeletonNode& n : g.nodes) {
            std::size_t t = tokens(rng);
            nodes.push_back({n.index, n.deps, t, "large"});
            cost[n.index] = m.t_prefill + static_cast<double>(t) * 0.01;
        }
        CHECK(simulate(nodes, m, false) ==
              doctest::Approx(critical_path(g, cost).length).epsilon(1e-9));
    }
}

TEST_CASE("reassigning an off-critical-path node to a faster model changes nothing") {
    LatencyModel m = paper_constants();
    m.t_token["small"] = 0.002;

    // 1 -> 3 is the long path; node 2 is independent and much shorter.
    std::vector<SimNode> nodes{
        {1, {}, 400, "large"},
        {2, {}, 50, "large"},
        {3, {1}, 400, "large"},
    };
    double before = simulate(nodes, m, true);
    nodes[1].model_id = "small";
    CHECK(simulate(nodes, m, true) == doctest::Approx(before).epsilon(1e-12));

    // moving a critical node, by contrast, shortens the makespan
    nodes[2].model_id = "small";
    CHECK(simulate(nodes, m, true) < before);
}

TEST_CASE("off-critical-path insensitivity holds on random graphs") {
    std::mt19937 rng(57);
    std::uniform_int_distribution<std::size_t> tokens(10, 200);
    int exercised = 0;
    for (int iter = 0; iter < 120; ++iter) {
        SkeletonGraph g = test::random_graph(rng, SkeletonMode::NonAdaptive, 9);
        LatencyModel m = paper_constants();
        m.t_token["small"] = 0.001;
        std::vector<SimNode> nodes;
        std::map<std::size_t, double> cost;
        for (const SkeletonNode& n : g.nodes) {
            std::size_t t = tokens(rng);
            nodes.push_back({n.index, n.deps, t, "large"});
            cost[n.index] = m.t_prefill + static_cast<double>(t) * 0.01;
        }
        double makespan = simulate(nodes, m, false);

        for (std::size_t i = 0; i < g.size(); ++i) {
            // through(i) = longest-ending-at(i) + longest-from(i) - cost(i)
            double ending = 0;
            {
                std::function<double(std::size_t)> walk = [&](std::size_t node) {
                    double best = 0;
                    for (std::size_t d : g.node(node).deps) best = std::max(best, walk(d));
                    return best + cost[node];
                };
                ending = walk(i + 1);
            }
            double from = 0;
            {
                std::function<double(std::size_t)> walk = [&](std::size_t node) {
                    double best = 0;
                    for (const SkeletonNode& n : g.nodes) {
                        if (n.deps.contains(node)) best = std::max(best, walk(n.index));
                    }
                    return best + cost[node];
                };
                from = walk(i + 1);
            }
            double through = ending + from - cost[i + 1];
            if (through < makespan - 1e-9) {
                auto tweaked = nodes;
                tweaked[i].model_id = "small";
                CHECK(simulate(tweaked, m, false) == doctest::Approx(makespan).epsilon(1e-9));
                ++exercised;
            }
        }
    }
    CHECK(exercised > 50);  // the property must actually have been exercised
}

TEST_CASE("makespan is non-increasing in batch capacity") {
    std::mt19937 rng(71);
    std::uniform_int_distribution<std::size_t> tokens(10, 200);
    for (int iter = 0; iter < 60; ++iter) {
        SkeletonGraph g = test::random_graph(rng, SkeletonMode::NonAdaptive, 10);
        std::vector<SimNode> nodes = from_graph(g, tokens(rng), "large");
        LatencyModel m = paper_constants();
        double previous = std::numeric_limits<double>::infinity();
        for (std::size_t cap = 1; cap <= g.size() + 1; ++cap) {
            m.batch_capacity = cap;
            double makespan = simulate(nodes, m, false);
            CHECK(makespan <= previous + 1e-9);
            previous = makespan;
        }
        // wide-open capacity equals the uncapped simulation
        m.batch_capacity.reset();
        CHECK(simulate(nodes, m, false) == doctest::Approx(previous).epsilon(1e-9));
    }
}

TEST_CASE("capacity 1 serializes everything") {
    LatencyModel m = paper_constants();
    m.batch_capacity = 1;
    CHECK(simulate(wide(4, 100), m, false) == doctest::Approx(4 * 1.1).epsilon(1e-12));
}

TEST_CASE("capacity 1 makespan equals total work on any graph") {
    // With one slot the schedule is work-conserving on a DAG, so the makespan
    // is exactly the sum of node durations.
    std::mt19937 rng(83);
    std::uniform_int_distribution<std::size_t> tokens(5, 150);
    for (int iter = 0; iter < 50; ++iter) {
        SkeletonGraph g = test::random_graph(rng, SkeletonMode::NonAdaptive, 9);
        LatencyModel m = paper_constants();
        m.batch_capacity = 1;
        std::vector<SimNode> nodes;
        double total = 0;
        for (const SkeletonNode& n : g.nodes) {
            std::size_t t = tokens(rng);
            nodes.push_back({n.index, n.deps, t, "large"});
            total += m.t_prefill + static_cast<double>(t) * 0.01;
        }
        CHECK(simulate(nodes, m, false) == doctest::Approx(total).epsilon(1e-9));
    }
}

TEST_CASE("cyclic dependencies are detected") {
    std::vector<SimNode> cyclic{
        {1, {2}, 10, "large"},
        {2, {1}, 10, "large"},
    };
    CHECK_THROWS_AS(simulate(cyclic, paper_constants(), false), CycleDetected);
    std::vector<SimNode> self{{1, {1}, 10, "large"}};
    CHECK_THROWS_AS(simulate(self, paper_constants(), false), CycleDetected);
}

TEST_CASE("unknown models and bad references are rejected") {
    CHECK_THROWS_AS(simulate(wide(2, 10, "mystery"), paper_constants(), false),
                    std::invalid_argument);
    std::vector<SimNode> dangling{{1, {9}, 10, "large"}};
    CHECK_THROWS_AS(simulate(dangling, paper_constants(), false), std::invalid_argument);
}

TEST_CASE("scenario files parse and produce the documented CSV rows") {
    std::string text = R"([
      {"name": "wide4",
       "constants": {"t_skeleton": 1.0, "t_prefill": 0.1, "t_token": {"large": 0.01}},
       "nodes": [{"id": 1, "deps": [], "tokens": 100, "model": "large"},
                 {"id": 2, "deps": [], "tokens": 100, "model": "large"},
                 {"id": 3, "deps": [], "tokens": 100, "model": "large"},
                 {"id": 4, "deps": [], "tokens": 100, "model": "large"}]},
      {"name": "chain4",
       "constants": {"t_skeleton": 1.0, "t_prefill": 0.1, "t_token": {"large": 0.01}},
       "nodes": [{"id": 1, "deps": [], "tokens": 100, "model": "large"},
                 {"id": 2, "deps": [1], "tokens": 100, "model": "large"},
                 {"id": 3, "deps": [2], "tokens": 100, "model": "large"},
                 {"id": 4, "deps": [3], "tokens": 100, "model": "large"}]}
    ])";
    std::vector<Scenario> scenarios = parse_scenarios(text);
    REQUIRE(scenarios.size() == 2);
    std::vector<ScenarioRow> rows = run_scenarios(scenarios);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].scenario == "wide4");
    CHECK(rows[0].policy == "graph");
    CHECK(rows[0].makespan == doctest::Approx(2.1));
    CHECK(rows[0].speedup == doctest::Approx(4.1 / 2.1));
    CHECK(rows[2].makespan == doctest::Approx(5.4));
    CHECK(rows[2].speedup == doctest::Approx(4.1 / 5.4));
    std::string csv = to_csv(rows);
    CHECK(csv.starts_with("scenario,policy,makespan,speedup\n"));
    CHECK(csv.find("wide4,graph,2.1,") != std::string::npos);
}

TEST_CASE("speedup orderings reproduce the qualitative findings") {
    LatencyModel m = paper_constants();
    m.t_token["small"] = 0.004;

    // A mixed-width graph: 4 independent nodes, two of them feeding a fifth.
    std::vector<SimNode> sgd_nodes{
        {1, {}, 100, "large"}, {2, {}, 100, "small"}, {3, {}, 100, "large"},
        {4, {}, 100, "small"}, {5, {1, 2}, 100, "large"},
    };
    std::vector<SimNode> sgdna_nodes = sgd_nodes;
    for (SimNode& n : sgdna_nodes) n.model_id = "large";
    std::vector<SimNode> sot_nodes = sgdna_nodes;
    for (SimNode& n : sot_nodes) n.deps.clear();

    double sot = speedup(sot_nodes, m);
    double sgd = speedup(sgd_nodes, m);
    double sgdna = speedup(sgdna_nodes, m);
    double chain_sgd = speedup(chain(4, 100), m);

    // SoT >= SGD > 1 > chain-SGD, and adaptive selection never hurts
    CHECK(sot >= sgd);
    CHECK(sgd > 1.0);
    CHECK(sgd >= sgdna);
    CHECK(chain_sgd < 1.0);
}
