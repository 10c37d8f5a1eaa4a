#include <cstdlib>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

#include "sgd/backend.hpp"

namespace sgd {

namespace {

using nlohmann::json;

}  // namespace

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
    std::string url = config_.base_url;
    if (url.starts_with("https://")) {
        tls_ = true;
        url = url.substr(8);
    } else if (url.starts_with("http://")) {
        url = url.substr(7);
    } else {
        throw std::invalid_argument("base_url must start with http:// or https://: " +
                                    config_.base_url);
    }
    while (!url.empty() && url.back() == '/') url.pop_back();
    std::size_t colon = url.find(':');
    if (colon == std::string::npos) {
        host_ = url;
        port_ = tls_ ? 443 : 80;
    } else {
        host_ = url.substr(0, colon);
        port_ = std::atoi(url.c_str() + colon + 1);
    }
    if (host_.empty() || port_ <= 0) {
        throw std::invalid_argument("cannot parse base_url: " + config_.base_url);
    }
}

GenerationResult HttpBackend::generate(const GenerationRequest& request) {
    auto started = std::chrono::steady_clock::now();

    json body = {
        {"model", request.model_id},
        {"messages", json::array({{{"role", "user"}, {"content", request.prompt}}})},
        {"max_tokens", request.max_tokens},
        {"temperature", request.temperature},
    };
    if (!request.draft_model_id.empty()) {
        body["draft_model"] = request.draft_model_id;
    }

    httplib::Headers headers;
    if (!config_.api_key_env.empty()) {
        const char* key = std::getenv(config_.api_key_env.c_str());
        if (key == nullptr || *key == '\0') {
            throw BackendError(BackendError::Kind::Refusal, request.request_id,
                               "environment variable " + config_.api_key_env + " is not set");
        }
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    // One client per call: httplib clients are not safe to share across
    // concurrent requests.
    auto call = [&](auto& client) {
        client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(config_.timeout));
        client.set_read_timeout(config_.timeout);
        client.set_write_timeout(config_.timeout);
        return client.Post(config_.path, headers, body.dump(), "application/json");
    };
    httplib::Result res = [&] {
        if (tls_) {
            httplib::SSLClient client(host_, port_);
            client.enable_server_certificate_verification(true);
            return call(client);
        }
        httplib::Client client(host_, port_);
        return call(client);
    }();

    if (!res) {
        auto kind = res.error() == httplib::Error::ConnectionTimeout ||
                            res.error() == httplib::Error::Read || res.error() == httplib::Error::Write
                        ? BackendError::Kind::Timeout
                        : BackendError::Kind::Transport;
        throw BackendError(kind, request.request_id,
                           "request failed: " + httplib::to_string(res.error()));
    }
    if (res->status >= 500) {
        throw BackendError(BackendError::Kind::Transport, request.request_id,
                           "server error " + std::to_string(res->status));
    }
    if (res->status != 200) {
        throw BackendError(BackendError::Kind::Refusal, request.request_id,
                           "status " + std::to_string(res->status) + ": " + res->body);
    }

    json reply = json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.contains("choices") || reply["choices"].empty()) {
        throw BackendError(BackendError::Kind::Refusal, request.request_id,
                           "malformed completion response");
    }

    GenerationResult result;
    result.model_id = request.model_id;
    const json& choice = reply["choices"][0];
    if (choice.contains("message") && choice["message"].contains("content")) {
        result.text = choice["message"]["content"].get<std::string>();
    } else if (choice.contains("text")) {
        result.text = choice["text"].get<std::string>();
    } else {
        throw BackendError(BackendError::Kind::Refusal, request.request_id,
                           "completion response has no content");
    }
    if (reply.contains("usage") && reply["usage"].contains("completion_tokens")) {
        result.prompt_tokens = reply["usage"].value("prompt_tokens", 0u);
        result.completion_tokens = reply["usage"]["completion_tokens"].get<std::size_t>();
    } else {
        result.prompt_tokens = approx_token_count(request.prompt);
        result.completion_tokens = approx_token_count(result.text);
        result.tokens_estimated = true;
    }
    result.latency = std::chrono::steady_clock::now() - started;
    return result;
}

}  // namespace sgd
