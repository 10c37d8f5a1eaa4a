#include "sgd/engine.hpp"

#include <atomic>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>

namespace sgd {

std::string_view to_string(RunMode mode) {
    switch (mode) {
        case RunMode::AR: return "ar";
        case RunMode::SoT: return "sot";
        case RunMode::SGD: return "sgd";
        case RunMode::SGDNA: return "sgd-na";
    }
    return "unknown";
}

RunMode run_mode_from_string(std::string_view name) {
    if (name == "ar") return RunMode::AR;
    if (name == "sot") return RunMode::SoT;
    if (name == "sgd") return RunMode::SGD;
    if (name == "sgd-na") return RunMode::SGDNA;
    throw std::invalid_argument("unknown mode: " + std::string(name) +
                                " (expected ar|sot|sgd|sgd-na)");
}

void BackendRegistry::add(std::string name, std::shared_ptr<Backend> backend) {
    if (!backend) {
        throw std::invalid_argument("backend must not be null");
    }
    backends_[std::move(name)] = std::move(backend);
}

Backend& BackendRegistry::resolve(const std::string& name) const {
    auto it = backends_.find(name);
    if (it == backends_.end()) {
        throw std::invalid_argument("no backend registered under '" + name + "'");
    }
    return *it->second;
}

bool BackendRegistry::has(const std::string& name) const {
    return backends_.contains(name);
}

Engine::Engine(BackendRegistry backends, PromptLibrary prompts)
    : backends_(std::move(backends)), prompts_(std::move(prompts)) {}

namespace {

std::atomic<std::uint64_t> g_request_counter{0};

std::string next_request_id(const std::string& question_id, std::size_t node) {
    return question_id + ":" + std::to_string(node) + ":" +
           std::to_string(g_request_counter.fetch_add(1));
}

struct Completion {
    std::size_t node;
    GenerationResult result;
    std::exception_ptr error;
};

// Single-question coordinator state: worker threads push completions, the
// coordinating thread drains them and owns every other mutation.
struct CompletionQueue {
    std::mutex mutex;
    std::condition_variable cv;
    std::deque<Completion> items;

    void push(Completion c) {
        {
            std::lock_guard lock(mutex);
            items.push_back(std::move(c));
        }
        cv.notify_one();
    }

    Completion pop() {
        std::unique_lock lock(mutex);
        cv.wait(lock, [&] { return !items.empty(); });
        Completion c = std::move(items.front());
        items.pop_front();
        return c;
    }
};

SkeletonGraph strip_deps(SkeletonGraph graph) {
    for (SkeletonNode& n : graph.nodes) n.deps.clear();
    return graph;
}

}  // namespace

RunResult Engine::answer(const std::string& question, const RunConfig& config,
                         const std::string& question_id) {
    if (question.empty()) {
        throw std::invalid_argument("question must be nonempty");
    }
    config.ladder.validate();
    const ModelSpec& baseline = config.ladder.baseline();
    RunTrace trace(question_id, std::string(to_string(config.mode)));

    auto run_ar = [&]() -> std::string {
        GenerationRequest request{baseline.id, question, config.max_tokens * 4, config.temperature,
                                  next_request_id(question_id, 0), {}};
        TraceEvent dispatched;
        dispatched.kind = TraceEvent::Kind::NodeDispatched;
        dispatched.node = 0;
        dispatched.model = baseline.id;
        dispatched.decode_mode = "ar";
        dispatched.prompt = question;
        trace.add(std::move(dispatched));

        GenerationResult result;
        try {
            result = generate_with_retry(backends_.resolve(baseline.backend), request, config.retry);
        } catch (const BackendError& e) {
            throw BackendFailure(std::string(to_string(e.kind)) + " on request " + e.request_id +
                                 ": " + e.what());
        }
        TraceEvent completed;
        completed.kind = TraceEvent::Kind::NodeCompleted;
        completed.node = 0;
        completed.tokens = result.completion_tokens;
        trace.add(std::move(completed));
        TraceEvent assembled;
        assembled.kind = TraceEvent::Kind::AnswerAssembled;
        trace.add(std::move(assembled));
        return result.text;
    };

    if (config.mode == RunMode::AR) {
        return {run_ar(), std::move(trace)};
    }

    // --- skeleton stage ---
    SkeletonMode skeleton_mode =
        config.mode == RunMode::SGD ? SkeletonMode::Adaptive : SkeletonMode::NonAdaptive;
    std::string skeleton_prompt = render_skeleton_prompt(prompts_, question, skeleton_mode);
    {
        TraceEvent e;
        e.kind = TraceEvent::Kind::SkeletonPrompted;
        e.model = baseline.id;
        e.prompt = skeleton_prompt;
        trace.add(std::move(e));
    }
    GenerationResult skeleton_reply;
    try {
        GenerationRequest request{baseline.id, skeleton_prompt, config.max_tokens * 4,
                                  config.temperature, next_request_id(question_id, 0), {}};
        skeleton_reply =
            generate_with_retry(backends_.resolve(baseline.backend), request, config.retry);
    } catch (const BackendError& e) {
        throw BackendFailure(std::string(to_string(e.kind)) + " on request " + e.request_id + ": " +
                             e.what());
    }

    ParseResult parsed;
    try {
        parsed = parse_skeleton(skeleton_reply.text, skeleton_mode);
    } catch (const NoNodesFound& e) {
        if (config.fallback == RunConfig::Fallback::Fail) {
            throw SkeletonFailure(e.what());
        }
        TraceEvent note;
        note.kind = TraceEvent::Kind::Note;
        note.text = std::string("skeleton parse failed (") + e.what() + "); falling back to ar";
        trace.add(std::move(note));
        return {run_ar(), std::move(trace)};
    }
    {
        TraceEvent e;
        e.kind = TraceEvent::Kind::SkeletonParsed;
        e.node_count = parsed.graph.size();
        for (const ParseDiagnostic& d : parsed.diagnostics) {
            e.diagnostics.push_back("line " + std::to_string(d.line) + ": " +
                                    std::string(to_string(d.kind)) + " (" + d.detail + ")");
        }
        trace.add(std::move(e));
    }

    // SoT ignores dependencies: every node decodes independently.
    const SkeletonGraph graph =
        config.mode == RunMode::SoT ? strip_deps(parsed.graph) : parsed.graph;

    // --- node decoding stage ---
    ScheduleState schedule(graph, config.batch_capacity);
    CompletionQueue completions;
    std::vector<std::thread> workers;
    // Workers never block, so joining on unwind cannot deadlock.
    struct Joiner {
        std::vector<std::thread>& workers;
        ~Joiner() {
            for (std::thread& w : workers) {
                if (w.joinable()) w.join();
            }
        }
    } joiner{workers};
    std::exception_ptr failure;

    auto dispatch = [&](std::size_t node) {
        DecodeMode mode;
        if (config.mode == RunMode::SGD) {
            int difficulty = graph.node(node).difficulty.value_or(kDefaultDifficulty);
            mode = route_decode_mode(difficulty, config.ladder, config.speculative_enabled);
        } else if (config.mode == RunMode::SGDNA && config.speculative_enabled &&
                   config.ladder.smallest().size_rank < baseline.size_rank) {
            // sgd-na with speculative decoding drafts every node; the target
            // is still the baseline, so baseline-only dispatch holds.
            mode = {DecodeMode::Kind::SpeculativePair, baseline.id, config.ladder.smallest().id};
        } else {
            mode = {DecodeMode::Kind::LargeAutoregressive, baseline.id, {}};
        }
        const ModelSpec& model = config.ladder.by_id(mode.model_id);
        Backend& backend = backends_.resolve(model.backend);
        if (mode.kind == DecodeMode::Kind::SpeculativePair && !backend.supports_speculative()) {
            TraceEvent note;
            note.kind = TraceEvent::Kind::Note;
            note.text = "backend for " + mode.model_id +
                        " lacks speculative support; node " + std::to_string(node) +
                        " decodes autoregressively";
            trace.add(std::move(note));
            mode = {DecodeMode::Kind::LargeAutoregressive, mode.model_id, {}};
        }

        std::map<std::size_t, std::string> dep_results;
        for (std::size_t dep : graph.node(node).deps) {
            dep_results[dep] = schedule.outputs().at(dep);
        }
        std::string prompt = render_node_prompt(prompts_, question, graph, node, dep_results);

        TraceEvent e;
        e.kind = TraceEvent::Kind::NodeDispatched;
        e.node = node;
        e.model = mode.model_id;
        e.decode_mode = to_string(mode);
        e.prompt = prompt;
        trace.add(std::move(e));

        GenerationRequest request{mode.model_id, std::move(prompt), config.max_tokens,
                                  config.temperature, next_request_id(question_id, node),
                                  mode.draft_model_id};
        workers.emplace_back([&backend, &completions, node, request = std::move(request),
                              retry = config.retry] {
            Completion c;
            c.node = node;
            try {
                c.result = generate_with_retry(backend, request, retry);
            } catch (...) {
                c.error = std::current_exception();
            }
            completions.push(std::move(c));
        });
    };

    for (std::size_t node : schedule.take_ready()) dispatch(node);

    std::size_t outstanding = schedule.in_flight_count();
    while (outstanding > 0) {
        Completion c = completions.pop();
        --outstanding;
        if (c.error) {
            if (!failure) failure = c.error;
            continue;  // drain remaining workers before surfacing the failure
        }
        if (failure) continue;
        schedule.complete(c.node, c.result.text);
        TraceEvent e;
        e.kind = TraceEvent::Kind::NodeCompleted;
        e.node = c.node;
        e.tokens = c.result.completion_tokens;
        trace.add(std::move(e));
        for (std::size_t node : schedule.take_ready()) dispatch(node);
        outstanding = schedule.in_flight_count();
    }
    for (std::thread& w : workers) {
        if (w.joinable()) w.join();
    }

    if (failure) {
        try {
            std::rethrow_exception(failure);
        } catch (const BackendError& e) {
            throw BackendFailure(std::string(to_string(e.kind)) + " on request " + e.request_id +
                                 ": " + e.what());
        }
    }

    std::string answer = schedule.assemble_answer();
    TraceEvent assembled;
    assembled.kind = TraceEvent::Kind::AnswerAssembled;
    trace.add(std::move(assembled));
    return {std::move(answer), std::move(trace)};
}

std::vector<BatchItem> Engine::answer_batch(const std::vector<std::string>& questions,
                                            const RunConfig& config) {
    if (questions.empty()) {
        throw EmptyBatch("answer_batch over an empty question list");
    }
    std::vector<BatchItem> items;
    for (std::size_t i = 0; i < questions.size(); ++i) {
        std::string qid = "q" + std::to_string(i + 1);
        try {
            RunResult result = answer(questions[i], config, qid);
            items.push_back({qid, questions[i], std::move(result.answer), std::nullopt,
                             std::move(result.trace)});
        } catch (const std::exception& e) {
            RunTrace failed(qid, std::string(to_string(config.mode)));
            TraceEvent note;
            note.kind = TraceEvent::Kind::Note;
            note.text = std::string("run failed: ") + e.what();
            failed.add(std::move(note));
            items.push_back({qid, questions[i], std::nullopt, e.what(), std::move(failed)});
        }
    }
    return items;
}

}  // namespace sgd
