#include <httplib.h>
#include <json.hpp>

#include "kgp/llm.hpp"

#include <semaphore>

namespace kgp::llm {

namespace {

const char* role_name(Role role) {
    switch (role) {
    case Role::system:
        return "system";
    case Role::assistant:
        return "assistant";
    case Role::user:
    default:
        return "user";
    }
}

// Splits "http://host:port/prefix" into client origin and path prefix.
struct ParsedUrl {
    std::string origin;
    std::string path_prefix;
};

ParsedUrl parse_base_url(const std::string& base_url) {
    if (base_url.starts_with("https://")) {
        throw ConfigError("https base urls are not supported by this build; use http");
    }
    if (!base_url.starts_with("http://")) {
        throw ConfigError("api_base_url must start with http://");
    }
    const std::size_t host_start = 7;
    const std::size_t slash = base_url.find('/', host_start);
    ParsedUrl out;
    if (slash == std::string::npos) {
        out.origin = base_url;
    } else {
        out.origin = base_url.substr(0, slash);
        out.path_prefix = base_url.substr(slash);
        while (!out.path_prefix.empty() && out.path_prefix.back() == '/') {
            out.path_prefix.pop_back();
        }
    }
    return out;
}

} // namespace

struct HttpLlmClient::Impl {
    HttpClientConfig config;
    ParsedUrl url;
    httplib::Client http;
    std::counting_semaphore<> inflight;

    explicit Impl(HttpClientConfig cfg)
        : config(std::move(cfg)), url(parse_base_url(config.base_url)),
          http(url.origin), inflight(std::max(1, config.inflight_cap)) {
        http.set_connection_timeout(0, config.connect_timeout_ms * 1000);
        http.set_read_timeout(config.read_timeout_ms / 1000,
                              (config.read_timeout_ms % 1000) * 1000);
    }
};

HttpLlmClient::HttpLlmClient(HttpClientConfig config)
    : impl_(std::make_unique<Impl>(std::move(config))) {}

HttpLlmClient::~HttpLlmClient() = default;

std::string HttpLlmClient::encode_request_json(const ChatRequest& request) {
    nlohmann::json body;
    body["model"] = request.model;
    body["temperature"] = request.temperature;
    if (request.max_output_tokens.has_value()) {
        body["max_tokens"] = *request.max_output_tokens;
    }
    nlohmann::json messages = nlohmann::json::array();
    for (const Message& m : request.messages) {
        messages.push_back({{"role", role_name(m.role)}, {"content", m.content}});
    }
    body["messages"] = std::move(messages);
    return body.dump();
}

ChatResponse HttpLlmClient::decode_response_json(const std::string& body) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        throw TransportError(std::string("malformed completion response: ") + e.what());
    }
    if (!doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty()) {
        throw TransportError("completion response has no choices");
    }
    const auto& choice = doc["choices"][0];
    ChatResponse resp;
    if (choice.contains("message") && choice["message"].contains("content") &&
        choice["message"]["content"].is_string()) {
        resp.content = choice["message"]["content"].get<std::string>();
    }
    const std::string finish = choice.value("finish_reason", "stop");
    if (finish == "length") {
        resp.finish_reason = FinishReason::length;
    } else if (finish == "content_filter" || finish == "refusal") {
        resp.finish_reason = FinishReason::refusal;
    } else {
        resp.finish_reason = FinishReason::stop;
    }
    if (doc.contains("usage")) {
        resp.prompt_tokens = doc["usage"].value("prompt_tokens", 0);
        resp.completion_tokens = doc["usage"].value("completion_tokens", 0);
    }
    return resp;
}

void HttpLlmClient::raise_for_status(int status, const std::string& body) {
    if (status == 401 || status == 403) {
        throw AuthError("authentication failed (HTTP " + std::to_string(status) + ")");
    }
    if (status == 429) {
        throw RateLimitedError("rate limited (HTTP 429)");
    }
    if (status == 400 && body.find("context_length_exceeded") != std::string::npos) {
        throw ContextOverflowError("prompt exceeds the model context window");
    }
    throw TransportError("HTTP " + std::to_string(status) + ": " + body.substr(0, 200));
}

ChatResponse HttpLlmClient::complete(const ChatRequest& request) {
    validate_request(request);

    impl_->inflight.acquire();
    struct Release {
        std::counting_semaphore<>* sem;
        ~Release() { sem->release(); }
    } release{&impl_->inflight};

    httplib::Headers headers;
    if (!impl_->config.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + impl_->config.api_key);
    }
    const std::string path = impl_->url.path_prefix + "/chat/completions";
    auto result =
        impl_->http.Post(path, headers, encode_request_json(request), "application/json");
    if (!result) {
        throw TransportError("connection failed: " + httplib::to_string(result.error()));
    }
    if (result->status < 200 || result->status >= 300) {
        raise_for_status(result->status, result->body);
    }
    ChatResponse resp = decode_response_json(result->body);
    resp.finish_reason =
        classify_finish(resp.content, resp.finish_reason, impl_->config.refusal_prefixes);
    return resp;
}

} // namespace kgp::llm
