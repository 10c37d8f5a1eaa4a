#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sgd/selection.hpp"

namespace sgd {

struct GenerationRequest {
    std::string model_id;
    std::string prompt;
    int max_tokens = 256;
    double temperature = 0.0;
    std::string request_id;
    // Draft model for a speculative draft/verify pair; empty for plain decoding.
    std::string draft_model_id;
};

struct GenerationResult {
    std::string text;
    std::size_t prompt_tokens = 0;
    std::size_t completion_tokens = 0;
    std::chrono::duration<double> latency{0};
    std::string model_id;
    // Set when token counts came from a whitespace approximation rather than
    // the backend's usage report.
    bool tokens_estimated = false;
};

class BackendError : public std::runtime_error {
public:
    enum class Kind { Timeout, Transport, Refusal };

    BackendError(Kind kind, std::string request_id, const std::string& message)
        : std::runtime_error(message), kind(kind), request_id(std::move(request_id)) {}

    Kind kind;
    std::string request_id;
};

std::string_view to_string(BackendError::Kind kind);

/// Uniform generation contract. Implementations must tolerate any number of
/// concurrent generate() calls without cross-talk.
class Backend {
public:
    virtual ~Backend() = default;
    virtual GenerationResult generate(const GenerationRequest& request) = 0;
    virtual bool supports_speculative() const { return false; }
};

struct RetryPolicy {
    int max_retries = 1;  // transport errors only
    std::chrono::milliseconds base_delay{1000};
};

/// Retries transport errors with exponential backoff; timeouts and refusals
/// propagate immediately.
GenerationResult generate_with_retry(Backend& backend, const GenerationRequest& request,
                                     const RetryPolicy& policy = {});

std::size_t approx_token_count(std::string_view text);

// --- decode-mode routing ---------------------------------------------------

struct DecodeMode {
    enum class Kind { SmallOnly, LargeAutoregressive, SpeculativePair };

    Kind kind = Kind::LargeAutoregressive;
    std::string model_id;        // the decoding model (target for a pair)
    std::string draft_model_id;  // set only for SpeculativePair

    friend bool operator==(const DecodeMode&, const DecodeMode&) = default;
};

std::string to_string(const DecodeMode& mode);

/// Easy nodes (ones select_model sends to a non-baseline model) decode on
/// that small model alone. Hard nodes decode on the baseline, as a
/// draft/verify pair with the smallest model when speculative decoding is
/// enabled and the ladder has a smaller model to draft with.
DecodeMode route_decode_mode(int difficulty, const ModelLadder& ladder, bool speculative_enabled);

// --- deterministic mock ----------------------------------------------------

struct MockScriptEntry {
    std::string match;  // substring, or ECMAScript regex when is_regex
    bool is_regex = false;
    std::string response;
    std::chrono::milliseconds latency{0};
    // Scripted completion token count; whitespace approximation of the
    // response when absent.
    std::optional<std::size_t> tokens;
};

/// Scripted backend: generate() is a pure function of the prompt
/// (first matching entry wins) plus injected latency. An unmatched prompt or
/// unknown model surfaces as a refusal.
class MockBackend : public Backend {
public:
    explicit MockBackend(std::vector<MockScriptEntry> script,
                         std::vector<std::string> known_models = {}, bool speculative = false);

    GenerationResult generate(const GenerationRequest& request) override;
    bool supports_speculative() const override { return speculative_; }

    std::vector<GenerationRequest> call_log() const;
    std::size_t call_count() const;

private:
    std::vector<MockScriptEntry> script_;
    std::vector<std::string> known_models_;
    bool speculative_;
    mutable std::mutex log_mutex_;
    std::vector<GenerationRequest> calls_;
};

// --- chat-completions HTTP client -------------------------------------------

struct HttpBackendConfig {
    std::string base_url;                      // e.g. "http://localhost:8000"
    std::string api_key_env;                   // env var holding the bearer token
    std::string path = "/v1/chat/completions";
    std::chrono::milliseconds timeout{120000};
    bool speculative = false;
};

/// Client for chat-completions style endpoints. Each call uses its own
/// connection, so concurrent requests are independent.
class HttpBackend : public Backend {
public:
    explicit HttpBackend(HttpBackendConfig config);

    GenerationResult generate(const GenerationRequest& request) override;
    bool supports_speculative() const override { return config_.speculative; }

private:
    HttpBackendConfig config_;
    std::string host_;
    int port_ = 0;
    bool tls_ = false;
};

}  // namespace sgd
