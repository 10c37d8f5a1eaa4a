#include "sgd/backend.hpp"

#include <regex>
#include <thread>

namespace sgd {

std::string_view to_string(BackendError::Kind kind) {
    switch (kind) {
        case BackendError::Kind::Timeout: return "timeout";
        case BackendError::Kind::Transport: return "transport-error";
        case BackendError::Kind::Refusal: return "backend-refusal";
    }
    return "unknown";
}

GenerationResult generate_with_retry(Backend& backend, const GenerationRequest& request,
                                     const RetryPolicy& policy) {
    auto delay = policy.base_delay;
    for (int attempt = 0;; ++attempt) {
        try {
            return backend.generate(request);
        } catch (const BackendError& e) {
            if (e.kind != BackendError::Kind::Transport || attempt >= policy.max_retries) throw;
            std::this_thread::sleep_for(delay);
            delay *= 2;
        }
    }
}

std::size_t approx_token_count(std::string_view text) {
    std::size_t count = 0;
    bool in_token = false;
    for (char c : text) {
        bool ws = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
        if (!ws && !in_token) ++count;
        in_token = !ws;
    }
    return count;
}

std::string to_string(const DecodeMode& mode) {
    switch (mode.kind) {
        case DecodeMode::Kind::SmallOnly: return "small-only:" + mode.model_id;
        case DecodeMode::Kind::LargeAutoregressive: return "large-ar:" + mode.model_id;
        case DecodeMode::Kind::SpeculativePair:
            return "speculative:" + mode.draft_model_id + "->" + mode.model_id;
    }
    return "unknown";
}

DecodeMode route_decode_mode(int difficulty, const ModelLadder& ladder, bool speculative_enabled) {
    const ModelSpec& selected = select_model(difficulty, ladder);
    if (!selected.is_baseline) {
        return {DecodeMode::Kind::SmallOnly, selected.id, {}};
    }
    const ModelSpec& baseline = ladder.baseline();
    const ModelSpec& smallest = ladder.smallest();
    if (speculative_enabled && smallest.size_rank < baseline.size_rank) {
        return {DecodeMode::Kind::SpeculativePair, baseline.id, smallest.id};
    }
    return {DecodeMode::Kind::LargeAutoregressive, baseline.id, {}};
}

MockBackend::MockBackend(std::vector<MockScriptEntry> script, std::vector<std::string> known_models,
                         bool speculative)
    : script_(std::move(script)), known_models_(std::move(known_models)), speculative_(speculative) {}

GenerationResult MockBackend::generate(const GenerationRequest& request) {
    auto started = std::chrono::steady_clock::now();
    {
        std::lock_guard lock(log_mutex_);
        calls_.push_back(request);
    }
    if (!known_models_.empty() &&
        std::find(known_models_.begin(), known_models_.end(), request.model_id) ==
            known_models_.end()) {
        throw BackendError(BackendError::Kind::Refusal, request.request_id,
                           "unknown model: " + request.model_id);
    }

    const MockScriptEntry* hit = nullptr;
    for (const MockScriptEntry& entry : script_) {
        bool matches = entry.is_regex
                           ? std::regex_search(request.prompt, std::regex(entry.match))
                           : request.prompt.find(entry.match) != std::string::npos;
        if (matches) {
            hit = &entry;
            break;
        }
    }
    if (hit == nullptr) {
        throw BackendError(BackendError::Kind::Refusal, request.request_id,
                           "no script entry matches the prompt");
    }
    if (hit->latency.count() > 0) std::this_thread::sleep_for(hit->latency);

    GenerationResult result;
    result.text = hit->response;
    result.prompt_tokens = approx_token_count(request.prompt);
    result.completion_tokens = hit->tokens.value_or(approx_token_count(hit->response));
    result.model_id = request.model_id;
    result.latency = std::chrono::steady_clock::now() - started;
    return result;
}

std::vector<GenerationRequest> MockBackend::call_log() const {
    std::lock_guard lock(log_mutex_);
    return calls_;
}

std::size_t MockBackend::call_count() const {
    std::lock_guard lock(log_mutex_);
    return calls_.size();
}

}  // namespace sgd
