#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sgd {

enum class SkeletonMode { Adaptive, NonAdaptive };

constexpr int kMinDifficulty = 1;
constexpr int kMaxDifficulty = 10;
// A node that arrives without a difficulty score is treated as hard so it
// routes to the largest model.
constexpr int kDefaultDifficulty = 10;

/// One sub-problem node of a skeleton. Indices are 1-based and follow
/// emission order; dependencies always point strictly backward, so a graph
/// built from valid nodes is acyclic by construction.
struct SkeletonNode {
    std::size_t index = 0;
    std::string summary;
    std::set<std::size_t> deps;
    std::optional<int> difficulty;

    friend bool operator==(const SkeletonNode&, const SkeletonNode&) = default;
};

struct SkeletonGraph {
    std::vector<SkeletonNode> nodes;
    SkeletonMode mode = SkeletonMode::Adaptive;

    std::size_t size() const { return nodes.size(); }
    bool empty() const { return nodes.empty(); }

    /// 1-based access.
    const SkeletonNode& node(std::size_t index) const;

    /// Throws std::invalid_argument naming the first broken invariant:
    /// contiguous 1..n indices, backward-only deps, single-line non-blank
    /// summaries, difficulty presence/range consistent with mode.
    void validate() const;

    friend bool operator==(const SkeletonGraph&, const SkeletonGraph&) = default;
};

struct ParseDiagnostic {
    enum class Kind {
        UnparseableLine,
        DroppedForwardRef,
        DroppedSelfRef,
        ClampedDifficulty,
        MissingDifficulty,
    };

    Kind kind;
    std::size_t line = 0;  // 1-based line number in the raw text
    std::string detail;
};

std::string_view to_string(ParseDiagnostic::Kind kind);

class NoNodesFound : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ParseResult {
    SkeletonGraph graph;
    std::vector<ParseDiagnostic> diagnostics;
};

/// Parses LLM-emitted skeleton text into a validated graph.
///
/// Accepts Node('summary', dependency=[...], difficulty=k) lines surrounded
/// by arbitrary prose. Lexing is lenient: list-item prefixes, single, double
/// or typographic quotes, interior whitespace, and a trailing period are all
/// tolerated. Nodes are re-indexed 1..n in emission order. Dependency refs
/// outside [1, index) are dropped, out-of-range difficulties clamped, and a
/// missing difficulty in adaptive mode defaults to kDefaultDifficulty; each
/// such repair yields one diagnostic.
///
/// Throws NoNodesFound when no line parses as a node.
ParseResult parse_skeleton(std::string_view raw, SkeletonMode mode);

/// Renders the canonical one-line-per-node form, difficulty omitted in
/// non-adaptive mode. parse_skeleton(render_skeleton(g), g.mode) reproduces
/// g with zero diagnostics for any valid g.
std::string render_skeleton(const SkeletonGraph& graph);

}  // namespace sgd
