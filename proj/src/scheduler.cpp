#include "sgd/scheduler.hpp"

#include <algorithm>

namespace sgd {

std::string_view to_string(NodeStatus status) {
    switch (status) {
        case NodeStatus::Pending: return "pending";
        case NodeStatus::Ready: return "ready";
        case NodeStatus::InFlight: return "in-flight";
        case NodeStatus::Done: return "done";
    }
    return "unknown";
}

ScheduleState::ScheduleState(SkeletonGraph graph, std::optional<std::size_t> capacity)
    : graph_(std::move(graph)), capacity_(capacity) {
    graph_.validate();
    if (capacity_ && *capacity_ == 0) {
        throw std::invalid_argument("batch capacity must be at least 1");
    }
    status_.resize(graph_.size(), NodeStatus::Pending);
    for (const SkeletonNode& n : graph_.nodes) {
        if (n.deps.empty()) status_[n.index - 1] = NodeStatus::Ready;
    }
}

NodeStatus ScheduleState::status(std::size_t node) const {
    if (node < 1 || node > status_.size()) {
        throw std::out_of_range("no such node: " + std::to_string(node));
    }
    return status_[node - 1];
}

std::vector<std::size_t> ScheduleState::take_ready() {
    std::vector<std::size_t> taken;
    for (std::size_t i = 0; i < status_.size(); ++i) {
        if (capacity_ && in_flight_count_ >= *capacity_) break;
        if (status_[i] != NodeStatus::Ready) continue;
        status_[i] = NodeStatus::InFlight;
        ++in_flight_count_;
        taken.push_back(i + 1);
    }
    return taken;
}

std::vector<std::size_t> ScheduleState::complete(std::size_t node, std::string output) {
    if (node < 1 || node > status_.size() || status_[node - 1] != NodeStatus::InFlight) {
        throw InvalidTransition("complete() on node " + std::to_string(node) + " which is " +
                                std::string(node >= 1 && node <= status_.size()
                                                ? to_string(status_[node - 1])
                                                : "nonexistent"));
    }
    status_[node - 1] = NodeStatus::Done;
    --in_flight_count_;
    ++done_count_;
    outputs_[node] = std::move(output);

    std::vector<std::size_t> newly_ready;
    for (const SkeletonNode& n : graph_.nodes) {
        if (status_[n.index - 1] != NodeStatus::Pending) continue;
        bool unblocked = std::all_of(n.deps.begin(), n.deps.end(), [&](std::size_t d) {
            return status_[d - 1] == NodeStatus::Done;
        });
        if (unblocked) {
            status_[n.index - 1] = NodeStatus::Ready;
            newly_ready.push_back(n.index);
        }
    }
    return newly_ready;
}

std::string ScheduleState::assemble_answer() const {
    if (!all_done()) {
        throw IncompleteSchedule("assemble_answer() with " +
                                 std::to_string(graph_.size() - done_count_) + " node(s) not done");
    }
    std::string answer;
    for (const SkeletonNode& n : graph_.nodes) {
        answer += "### " + std::to_string(n.index) + ". " + n.summary + "\n";
        answer += outputs_.at(n.index);
        answer += "\n\n";
    }
    return answer;
}

CriticalPath critical_path(const SkeletonGraph& graph, const std::map<std::size_t, double>& cost) {
    graph.validate();
    if (graph.empty()) return {};
    for (const SkeletonNode& n : graph.nodes) {
        auto it = cost.find(n.index);
        if (it == cost.end()) {
            throw std::invalid_argument("missing cost for node " + std::to_string(n.index));
        }
        if (it->second <= 0) {
            throw std::invalid_argument("costs must be positive");
        }
    }

    // DP in index order (a topological order by construction). best[i] is the
    // heaviest path ending at node i+1; equal-weight alternatives keep the
    // lexicographically smallest node sequence.
    std::vector<double> best_len(graph.size(), 0);
    std::vector<std::vector<std::size_t>> best_path(graph.size());
    for (const SkeletonNode& n : graph.nodes) {
        std::size_t i = n.index - 1;
        double prefix_len = 0;
        const std::vector<std::size_t>* prefix = nullptr;
        for (std::size_t d : n.deps) {
            const auto& cand = best_path[d - 1];
            if (prefix == nullptr || best_len[d - 1] > prefix_len ||
                (best_len[d - 1] == prefix_len && cand < *prefix)) {
                prefix_len = best_len[d - 1];
                prefix = &cand;
            }
        }
        best_len[i] = prefix_len + cost.at(n.index);
        if (prefix) best_path[i] = *prefix;
        best_path[i].push_back(n.index);
    }

    CriticalPath result;
    for (std::size_t i = 0; i < graph.size(); ++i) {
        if (best_len[i] > result.length ||
            (best_len[i] == result.length && (result.path.empty() || best_path[i] < result.path))) {
            result.length = best_len[i];
            result.path = best_path[i];
        }
    }
    return result;
}

}  // namespace sgd
