#include "sgd/prompts.hpp"

#include <fstream>
#include <sstream>

namespace sgd {

namespace {

constexpr std::string_view kSkeletonAdaptive = R"(Create a structured outline for a specific question: {{question}} by following these steps:
1. Format the answer as an outline with 1-8 main points, each described as follows:
   - Node('Brief description', dependency=[Dependent Nodes], difficulty=1-10)
   - "difficulty=1-4" indicates a point requiring common sense or general knowledge.
   - "difficulty=5" serves as a midpoint, indicating a balance between common knowledge and more specialized reasoning.
   - "difficulty=6-10" indicates a point requiring logical reasoning, mathematical computation, and specialized knowledge.
Guidelines:
- Aim for conciseness and logical sequence.
- Combine simpler steps to reduce the total number of nodes.
- Ensure each node includes dependencies and a knowledge level rating.
- Only output the nodes without additional information.
Example 1: "How to prepare for a marathon?"
- Node('Establish a training schedule', dependency=[], difficulty=3)
- Node('Choose the right gear', dependency=[], difficulty=4)
- Node('Incorporate cross-training', dependency=[], difficulty=5)
- Node('Plan nutrition and hydration', dependency=[], difficulty=7)
- Node('Build up mileage gradually', dependency=[1], difficulty=5)
- Node('Taper before the race', dependency=[1,4], difficulty=6)
Example 2: "How to find the roots of a quadratic equation ax^2 + bx + c = 0?":
- Node('Understand the quadratic formula', dependency=[], difficulty=5)
- Node('Identify coefficients and calculate the discriminant', dependency=[1], difficulty=6)
- Node('Apply the formula and solve for x', dependency=[2], difficulty=7)
The goal is to provide a clear, actionable outline that serves as a roadmap for answering the question, using as few nodes as possible.
)";

constexpr std::string_view kSkeletonNonAdaptive = R"(Create a structured outline for a specific question: {{question}} by following these steps:
1. Format the answer as an outline with 1-8 main points, each described as follows:
   - Node('Brief description', dependency=[Dependent Nodes])
Guidelines:
- Aim for conciseness and logical sequence.
- Combine simpler steps to reduce the total number of nodes.
- Ensure each node includes dependencies and a knowledge level rating.
- Only output the nodes without additional information.
Example 1: "How to prepare for a marathon?"
- Node('Establish a training schedule', dependency=[])
- Node('Choose the right gear', dependency=[])
- Node('Incorporate cross-training', dependency=[])
- Node('Plan nutrition and hydration', dependency=[])
- Node('Build up mileage gradually', dependency=[1])
- Node('Taper before the race', dependency=[1,4])
Example 2: "How to find the roots of a quadratic equation ax^2 + bx + c = 0?":
- Node('Understand the quadratic formula', dependency=[])
- Node('Identify coefficients and calculate the discriminant', dependency=[1])
- Node('Apply the formula and solve for x', dependency=[2])
The goal is to provide a clear, actionable outline that serves as a roadmap for answering the question, using as few nodes as possible.
)";

constexpr std::string_view kNodeDecode = R"(For the question {{question}}, generate an insightful and detailed response focusing on a specific aspect outlined below. This response should build directly on the foundation laid by earlier nodes, incorporating their findings or conclusions as necessary to provide a coherent and comprehensive answer.

Question: {{question}}

Complete Outline:
{{outline}}
Current Node (Node {{node_number}}): "{{node_description}}"

Context from Dependent Nodes:
{{dependency_context}}

Instructions:
- Craft a response that is tightly focused on the topic of "{{node_description}}". If this node depends on earlier ones, weave in relevant details from those nodes to enrich your explanation.
- Keep your response between 1-5 sentences to maintain conciseness without sacrificing depth or insight.
- Directly address the specifics of the node, avoiding broad generalizations or unrelated information.
- Begin your response immediately below, adhering closely to the instructions and the context provided.

Response:
)";

constexpr std::string_view kJudgePairwise = R"(You are an impartial judge. Compare the two answers to the question below and decide which one is better, considering helpfulness, relevance, accuracy, and level of detail. Do not let the order of presentation, answer length, or stylistic flourishes influence your decision.

Question: {{question}}

Answer A:
{{answer_a}}

Answer B:
{{answer_b}}

Briefly explain your reasoning, then give your final verdict on the last line as exactly one marker: [[A]] if Answer A is better, [[B]] if Answer B is better, or [[C]] for a tie.
)";

}  // namespace

std::string render_template(const PromptTemplate& tmpl,
                            const std::map<std::string, std::string>& bindings) {
    std::string out;
    out.reserve(tmpl.body.size());
    std::size_t pos = 0;
    for (;;) {
        std::size_t open = tmpl.body.find("{{", pos);
        if (open == std::string::npos) {
            out.append(tmpl.body, pos, std::string::npos);
            return out;
        }
        std::size_t close = tmpl.body.find("}}", open + 2);
        if (close == std::string::npos) {
            out.append(tmpl.body, pos, std::string::npos);
            return out;
        }
        out.append(tmpl.body, pos, open - pos);
        std::string name = tmpl.body.substr(open + 2, close - open - 2);
        auto it = bindings.find(name);
        if (it == bindings.end()) {
            throw UnboundPlaceholder("template '" + tmpl.id + "' uses unbound placeholder {{" +
                                     name + "}}");
        }
        out += it->second;
        pos = close + 2;
    }
}

PromptLibrary PromptLibrary::builtin() {
    PromptLibrary lib;
    lib.set({"skeleton-adaptive", std::string(kSkeletonAdaptive)});
    lib.set({"skeleton-nonadaptive", std::string(kSkeletonNonAdaptive)});
    lib.set({"node-decode", std::string(kNodeDecode)});
    lib.set({"judge-pairwise", std::string(kJudgePairwise)});
    return lib;
}

void PromptLibrary::load_directory(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw std::invalid_argument("template directory does not exist: " + dir.string());
    }
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string id = entry.path().filename().string();
        if (id.size() > 4 && id.ends_with(".txt")) id.resize(id.size() - 4);
        std::ifstream in(entry.path());
        std::ostringstream body;
        body << in.rdbuf();
        set({std::move(id), body.str()});
    }
}

void PromptLibrary::set(PromptTemplate tmpl) {
    templates_[tmpl.id] = std::move(tmpl);
}

const PromptTemplate& PromptLibrary::get(const std::string& id) const {
    auto it = templates_.find(id);
    if (it == templates_.end()) {
        throw std::invalid_argument("unknown prompt template: " + id);
    }
    return it->second;
}

bool PromptLibrary::has(const std::string& id) const {
    return templates_.contains(id);
}

std::string render_skeleton_prompt(const PromptLibrary& lib, std::string_view question,
                                   SkeletonMode mode) {
    if (question.empty()) {
        throw std::invalid_argument("question must be nonempty");
    }
    const char* id = mode == SkeletonMode::Adaptive ? "skeleton-adaptive" : "skeleton-nonadaptive";
    return render_template(lib.get(id), {{"question", std::string(question)}});
}

std::string render_node_prompt(const PromptLibrary& lib, std::string_view question,
                               const SkeletonGraph& graph, std::size_t node,
                               const std::map<std::size_t, std::string>& dep_results) {
    graph.validate();
    const SkeletonNode& target = graph.node(node);
    for (const auto& [dep, _] : dep_results) {
        if (!target.deps.contains(dep)) {
            throw std::invalid_argument("unexpected dependency result for node " +
                                        std::to_string(dep));
        }
    }

    std::string context;
    if (target.deps.empty()) {
        context = "(none)";
    } else {
        bool first = true;
        for (std::size_t dep : target.deps) {  // std::set iterates in ascending order
            auto it = dep_results.find(dep);
            if (it == dep_results.end()) {
                throw MissingDependencyResult("node " + std::to_string(node) +
                                              " lacks the result of dependency " +
                                              std::to_string(dep));
            }
            if (!first) context += "\n\n";
            context += "Node " + std::to_string(dep) + " result:\n" + it->second;
            first = false;
        }
    }

    return render_template(lib.get("node-decode"),
                           {{"question", std::string(question)},
                            {"outline", render_skeleton(graph)},
                            {"node_number", std::to_string(node)},
                            {"node_description", target.summary},
                            {"dependency_context", context}});
}

std::string render_judge_prompt(const PromptLibrary& lib, const std::string& template_id,
                                std::string_view question, std::string_view answer_a,
                                std::string_view answer_b) {
    return render_template(lib.get(template_id), {{"question", std::string(question)},
                                                  {"answer_a", std::string(answer_a)},
                                                  {"answer_b", std::string(answer_b)}});
}

}  // namespace sgd
