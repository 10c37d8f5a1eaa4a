#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "sgd/prompts.hpp"
#include "test_support.hpp"

using namespace sgd;

TEST_CASE("adaptive skeleton prompt embeds the question and the few-shot examples") {
    PromptLibrary lib = PromptLibrary::builtin();
    std::string prompt = render_skeleton_prompt(lib, "How do birds fly?", SkeletonMode::Adaptive);
    CHECK(prompt.find("How do birds fly?") != std::string::npos);
    CHECK(prompt.find("Node('Establish a training schedule', dependency=[], difficulty=3)") !=
          std::string::npos);
    CHECK(prompt.find("Node('Apply the formula and solve for x', dependency=[2], difficulty=7)") !=
          std::string::npos);
    CHECK(prompt.find("{{") == std::string::npos);
}

TEST_CASE("non-adaptive skeleton prompt never mentions difficulty") {
    PromptLibrary lib = PromptLibrary::builtin();
    std::string prompt = render_skeleton_prompt(lib, "Q", SkeletonMode::NonAdaptive);
    CHECK(prompt.find("difficulty") == std::string::npos);
    CHECK(prompt.find("Node('Taper before the race', dependency=[1,4])") != std::string::npos);
    CHECK(prompt.find("{{") == std::string::npos);
}

TEST_CASE("the few-shot examples in the templates parse to the documented graphs") {
    PromptLibrary lib = PromptLibrary::builtin();
    std::string prompt = render_skeleton_prompt(lib, "Q", SkeletonMode::Adaptive);
    // The examples double as parser input, so the parse must see exactly the
    // nine example nodes: the 6-node marathon and the 3-node quadratic chain.
    // The format-specification line ("Node('Brief description', ...)") is a
    // candidate that cannot parse, so exactly one diagnostic is expected.
    auto [graph, diags] = parse_skeleton(prompt, SkeletonMode::Adaptive);
    CHECK(graph.size() == 9);
    REQUIRE(diags.size() == 1);
    CHECK(diags[0].kind == ParseDiagnostic::Kind::UnparseableLine);
    CHECK(graph.node(5).deps == std::set<std::size_t>{1});
    CHECK(graph.node(6).deps == std::set<std::size_t>{1, 4});
}

TEST_CASE("template-like braces in the question survive literally") {
    PromptLibrary lib = PromptLibrary::builtin();
    std::string prompt =
        render_skeleton_prompt(lib, "What does {{question}} mean?", SkeletonMode::Adaptive);
    CHECK(prompt.find("What does {{question}} mean?") != std::string::npos);
}

TEST_CASE("node prompt carries outline, node header and ordered dependency context") {
    PromptLibrary lib = PromptLibrary::builtin();
    SkeletonGraph graph = test::marathon_graph();
    std::map<std::size_t, std::string> deps{{1, "schedule result"}, {4, "nutrition result"}};
    std::string prompt = render_node_prompt(lib, "How to prepare for a marathon?", graph, 6, deps);

    CHECK(prompt.find(render_skeleton(graph)) != std::string::npos);
    CHECK(prompt.find("Current Node (Node 6): \"Taper before the race\"") != std::string::npos);
    std::size_t first = prompt.find("Node 1 result:\nschedule result");
    std::size_t second = prompt.find("Node 4 result:\nnutrition result");
    REQUIRE(first != std::string::npos);
    REQUIRE(second != std::string::npos);
    CHECK(first < second);
    CHECK(prompt.find("{{") == std::string::npos);
}

TEST_CASE("node prompt with no dependencies renders the context as (none)") {
    PromptLibrary lib = PromptLibrary::builtin();
    SkeletonGraph graph = test::marathon_graph();
    std::string prompt = render_node_prompt(lib, "Q", graph, 1, {});
    CHECK(prompt.find("Context from Dependent Nodes:\n(none)") != std::string::npos);
}

TEST_CASE("missing or extra dependency results are rejected") {
    PromptLibrary lib = PromptLibrary::builtin();
    SkeletonGraph graph = test::marathon_graph();
    CHECK_THROWS_AS(render_node_prompt(lib, "Q", graph, 6, {{1, "only one"}}),
                    MissingDependencyResult);
    CHECK_THROWS_AS(render_node_prompt(lib, "Q", graph, 1, {{1, "unwanted"}}),
                    std::invalid_argument);
}

TEST_CASE("rendering an unbound placeholder throws") {
    PromptTemplate tmpl{"custom", "hello {{name}} and {{other}}"};
    CHECK_THROWS_AS(render_template(tmpl, {{"name", "x"}}), UnboundPlaceholder);
    CHECK(render_template(tmpl, {{"name", "x"}, {"other", "y"}}) == "hello x and y");
}

TEST_CASE("judge prompt binds question and both answers") {
    PromptLibrary lib = PromptLibrary::builtin();
    std::string prompt = render_judge_prompt(lib, "judge-pairwise", "Q?", "first", "second");
    CHECK(prompt.find("Q?") != std::string::npos);
    CHECK(prompt.find("Answer A:\nfirst") != std::string::npos);
    CHECK(prompt.find("Answer B:\nsecond") != std::string::npos);
    CHECK(prompt.find("[[A]]") != std::string::npos);
}

TEST_CASE("templates load from a directory and override builtins") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / ("sgd-tmpl-" + std::to_string(::getpid()));
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "node-decode.txt");
        out << "custom node {{node_number}}: {{node_description}} | {{question}} | {{outline}} | "
               "{{dependency_context}}";
        std::ofstream extra(dir / "judge-relevance");
        extra << "judge relevance of {{answer_a}} vs {{answer_b}} for {{question}} [[A]]/[[B]]/[[C]]";
    }
    PromptLibrary lib = PromptLibrary::builtin();
    lib.load_directory(dir);
    CHECK(lib.has("judge-relevance"));
    SkeletonGraph graph = test::marathon_graph();
    std::string prompt = render_node_prompt(lib, "Q", graph, 1, {});
    CHECK(prompt.starts_with("custom node 1: Establish a training schedule"));
    fs::remove_all(dir);
}
