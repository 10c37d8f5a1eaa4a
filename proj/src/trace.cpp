#include "sgd/trace.hpp"

#include <json.hpp>

namespace sgd {

using nlohmann::json;

std::string_view to_string(TraceEvent::Kind kind) {
    switch (kind) {
        case TraceEvent::Kind::RunStarted: return "run-started";
        case TraceEvent::Kind::SkeletonPrompted: return "skeleton-prompted";
        case TraceEvent::Kind::SkeletonParsed: return "skeleton-parsed";
        case TraceEvent::Kind::NodeDispatched: return "node-dispatched";
        case TraceEvent::Kind::NodeCompleted: return "node-completed";
        case TraceEvent::Kind::AnswerAssembled: return "answer-assembled";
        case TraceEvent::Kind::Note: return "note";
    }
    return "unknown";
}

RunTrace::RunTrace(std::string question_id, std::string mode)
    : question_id_(std::move(question_id)),
      mode_(std::move(mode)),
      start_(std::chrono::steady_clock::now()) {
    TraceEvent started;
    started.kind = TraceEvent::Kind::RunStarted;
    add(std::move(started));
}

TraceEvent& RunTrace::add(TraceEvent event) {
    double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    last_t_ = std::max(last_t_, t);
    event.t = last_t_;
    events_.push_back(std::move(event));
    return events_.back();
}

std::size_t RunTrace::total_completion_tokens() const {
    std::size_t total = 0;
    for (const TraceEvent& e : events_) {
        if (e.kind == TraceEvent::Kind::NodeCompleted) total += e.tokens;
    }
    return total;
}

double RunTrace::wall_time() const {
    return events_.empty() ? 0 : events_.back().t;
}

std::string RunTrace::to_jsonl() const {
    std::string out;
    for (const TraceEvent& e : events_) {
        json line = {{"event", std::string(to_string(e.kind))}, {"t", e.t}};
        switch (e.kind) {
            case TraceEvent::Kind::RunStarted:
                line["question_id"] = question_id_;
                line["mode"] = mode_;
                break;
            case TraceEvent::Kind::SkeletonPrompted:
                line["model"] = e.model;
                line["prompt"] = e.prompt;
                break;
            case TraceEvent::Kind::SkeletonParsed:
                line["node_count"] = e.node_count;
                line["diagnostics"] = e.diagnostics;
                break;
            case TraceEvent::Kind::NodeDispatched:
                line["node"] = e.node;
                line["model"] = e.model;
                line["decode_mode"] = e.decode_mode;
                line["prompt"] = e.prompt;
                break;
            case TraceEvent::Kind::NodeCompleted:
                line["node"] = e.node;
                line["tokens"] = e.tokens;
                break;
            case TraceEvent::Kind::AnswerAssembled:
                break;
            case TraceEvent::Kind::Note:
                line["text"] = e.text;
                break;
        }
        out += line.dump();
        out += '\n';
    }
    return out;
}

}  // namespace sgd
