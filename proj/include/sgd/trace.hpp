#pragma once

#include <chrono>
#include <cstddef>
#include <string>
#include <vector>

namespace sgd {

struct TraceEvent {
    enum class Kind {
        RunStarted,
        SkeletonPrompted,
        SkeletonParsed,
        NodeDispatched,
        NodeCompleted,
        AnswerAssembled,
        Note,
    };

    Kind kind;
    double t = 0;  // seconds since the run started, monotone within a trace

    std::size_t node = 0;  // AR's single whole-answer request uses node 0
    std::string model;
    std::string decode_mode;
    std::string prompt;
    std::size_t tokens = 0;
    std::size_t node_count = 0;
    std::vector<std::string> diagnostics;
    std::string text;  // note text
};

std::string_view to_string(TraceEvent::Kind kind);

/// Append-only event log for one question's pipeline run. Timestamps are
/// stamped at append time and never decrease. Appends are not synchronized;
/// the engine funnels them through its per-question coordinator.
class RunTrace {
public:
    RunTrace(std::string question_id, std::string mode);

    TraceEvent& add(TraceEvent event);

    const std::string& question_id() const { return question_id_; }
    const std::string& mode() const { return mode_; }
    const std::vector<TraceEvent>& events() const { return events_; }

    std::size_t total_completion_tokens() const;
    /// Timestamp of the last event == the run's wall time in seconds.
    double wall_time() const;

    /// One JSON object per line, first line carries the run metadata.
    std::string to_jsonl() const;

private:
    std::string question_id_;
    std::string mode_;
    std::chrono::steady_clock::time_point start_;
    double last_t_ = 0;
    std::vector<TraceEvent> events_;
};

}  // namespace sgd
