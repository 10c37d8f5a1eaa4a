#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

#include "sgd/skeleton.hpp"

namespace sgd {

struct PromptTemplate {
    std::string id;
    std::string body;  // plain text with {{name}} placeholders
};

class UnboundPlaceholder : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MissingDependencyResult : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Single-pass substitution: each {{name}} in the template body is replaced
/// by its binding, and substituted values are never re-scanned, so brace
/// sequences inside bindings survive literally. Throws UnboundPlaceholder on
/// a placeholder without a binding.
std::string render_template(const PromptTemplate& tmpl,
                            const std::map<std::string, std::string>& bindings);

/// Template store keyed by id. Ships the built-in skeleton-adaptive,
/// skeleton-nonadaptive, node-decode and judge-pairwise templates; files in a
/// template directory override or extend them (file name = template id,
/// an optional .txt suffix is stripped).
class PromptLibrary {
public:
    static PromptLibrary builtin();

    void load_directory(const std::filesystem::path& dir);
    void set(PromptTemplate tmpl);
    const PromptTemplate& get(const std::string& id) const;
    bool has(const std::string& id) const;

private:
    std::map<std::string, PromptTemplate> templates_;
};

std::string render_skeleton_prompt(const PromptLibrary& lib, std::string_view question,
                                   SkeletonMode mode);

/// Fills the node-decoding template: the original question, the full rendered
/// outline, this node's number and description, and the dependency results in
/// ascending dependency order ("(none)" when the node has no dependencies).
/// dep_results must hold exactly the node's dependencies.
std::string render_node_prompt(const PromptLibrary& lib, std::string_view question,
                               const SkeletonGraph& graph, std::size_t node,
                               const std::map<std::size_t, std::string>& dep_results);

std::string render_judge_prompt(const PromptLibrary& lib, const std::string& template_id,
                                std::string_view question, std::string_view answer_a,
                                std::string_view answer_b);

}  // namespace sgd
