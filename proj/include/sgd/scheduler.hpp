#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgd/skeleton.hpp"

namespace sgd {

enum class NodeStatus { Pending, Ready, InFlight, Done };

std::string_view to_string(NodeStatus status);

class InvalidTransition : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class IncompleteSchedule : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Per-node decoding lifecycle over one skeleton graph. Nodes move
/// pending -> ready -> in-flight -> done; a node becomes ready exactly when
/// all of its dependencies are done. Completed nodes keep their index, so
/// "pruning" is a status transition rather than graph surgery.
///
/// Mutations are not synchronized; route take_ready/complete through a single
/// coordinator. Reads of a drained state are safe from anywhere.
class ScheduleState {
public:
    explicit ScheduleState(SkeletonGraph graph, std::optional<std::size_t> capacity = std::nullopt);

    const SkeletonGraph& graph() const { return graph_; }
    NodeStatus status(std::size_t node) const;

    /// Returns all ready nodes in ascending index order (up to the spare
    /// in-flight capacity, when capped) and marks them in-flight. A second
    /// call without intervening completions returns nothing new.
    std::vector<std::size_t> take_ready();

    /// Marks an in-flight node done, records its output, and returns the
    /// nodes that just became ready. Throws InvalidTransition when the node
    /// is not in-flight.
    std::vector<std::size_t> complete(std::size_t node, std::string output);

    bool all_done() const { return done_count_ == graph_.size(); }
    std::size_t done_count() const { return done_count_; }
    std::size_t in_flight_count() const { return in_flight_count_; }
    const std::map<std::size_t, std::string>& outputs() const { return outputs_; }

    /// Joins node outputs in index order, each under a "### <i>. <summary>"
    /// heading. Throws IncompleteSchedule unless every node is done.
    std::string assemble_answer() const;

private:
    SkeletonGraph graph_;
    std::optional<std::size_t> capacity_;
    std::vector<NodeStatus> status_;  // 0-based
    std::map<std::size_t, std::string> outputs_;
    std::size_t done_count_ = 0;
    std::size_t in_flight_count_ = 0;
};

struct CriticalPath {
    std::vector<std::size_t> path;
    double length = 0;
};

/// Longest path under the dependency relation where each node contributes
/// cost[node]; ties break toward the lexicographically smallest path. Costs
/// must be positive and cover every node.
CriticalPath critical_path(const SkeletonGraph& graph, const std::map<std::size_t, double>& cost);

}  // namespace sgd
