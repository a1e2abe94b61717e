#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kgp/errors.hpp"

namespace kgp::llm {

enum class Role { system, user, assistant };

struct Message {
    Role role = Role::user;
    std::string content;
};

enum class FinishReason { stop, length, refusal, error };

struct ChatRequest {
    std::string model;
    std::vector<Message> messages; // at least one user message
    double temperature = 0.0;
    std::optional<int> max_output_tokens;
};

struct ChatResponse {
    std::string content; // empty only when finish_reason != stop
    FinishReason finish_reason = FinishReason::stop;
    int prompt_tokens = 0;
    int completion_tokens = 0;
};

class LlmError : public Error {
  public:
    using Error::Error;
};

class AuthError : public LlmError {
  public:
    using LlmError::LlmError;
};

/// Retryable.
class RateLimitedError : public LlmError {
  public:
    using LlmError::LlmError;
};

/// Prompt too large; surfaced, never silently truncated.
class ContextOverflowError : public LlmError {
  public:
    using LlmError::LlmError;
};

/// Retryable.
class TransportError : public LlmError {
  public:
    using LlmError::LlmError;
};

/// The model declined the task (finish_reason=refusal downstream of a
/// completion, or a scripted refusal entry).
class RefusalError : public LlmError {
  public:
    using LlmError::LlmError;
};

class LlmClient {
  public:
    virtual ~LlmClient() = default;
    virtual ChatResponse complete(const ChatRequest& request) = 0;
};

/// Per-run completion settings shared by every call the pipeline makes.
struct RequestParams {
    std::string model;
    double temperature = 0.0;
    std::optional<int> max_output_tokens;
};

/// Single-user-message request with the run's settings.
ChatRequest make_user_request(const RequestParams& params, std::string prompt);

/// Raises std::invalid_argument unless the request carries a user message and
/// a non-negative temperature.
void validate_request(const ChatRequest& request);

struct RetryPolicy {
    int max_attempts = 3; // >= 1
    std::chrono::milliseconds base_delay{250}; // doubled per retry
};

/// Retries only RateLimitedError/TransportError with exponential backoff;
/// everything else propagates on first occurrence.
ChatResponse complete_with_retry(LlmClient& client, const ChatRequest& request,
                                 const RetryPolicy& policy);

const std::vector<std::string>& default_refusal_prefixes();

/// Rewrites finish_reason to refusal when a stop response opens with one of
/// the prefixes (after leading whitespace).
FinishReason classify_finish(std::string_view content, FinishReason finish,
                             std::span<const std::string> refusal_prefixes);

/// Stable request identity: FNV-1a over the concatenated message contents.
std::uint64_t request_content_hash(const ChatRequest& request);
std::string request_hash_hex(const ChatRequest& request);

struct ScriptEntry {
    enum class Match { ordinal, hash };
    Match match = Match::ordinal;
    std::string key; // decimal ordinal or 16-digit hex content hash
    std::string content;
    std::string finish_reason = "stop"; // stop|length|refusal|error|rate_limited|auth
};

/// Deterministic replay backend. Ordinal entries are consumed by call order
/// (single-threaded use only); hash entries are matched by request content
/// hash and may be replayed concurrently. A request with no entry raises
/// TransportError("script exhausted ...").
class ScriptedClient final : public LlmClient {
  public:
    explicit ScriptedClient(std::vector<ScriptEntry> entries,
                            std::vector<std::string> refusal_prefixes = default_refusal_prefixes());

    static std::vector<ScriptEntry> load_script(const std::filesystem::path& script_file);

    ChatResponse complete(const ChatRequest& request) override;

    int calls_made() const { return calls_; }

  private:
    std::vector<ScriptEntry> ordinal_entries_;
    std::map<std::string, ScriptEntry> hash_entries_;
    std::vector<std::string> refusal_prefixes_;
    std::mutex mutex_;
    int calls_ = 0;
    int next_ordinal_ = 0;
};

struct HttpClientConfig {
    std::string base_url; // e.g. http://localhost:8080/v1
    std::string api_key;  // usually from KGP_API_KEY
    int inflight_cap = 4;
    std::vector<std::string> refusal_prefixes = default_refusal_prefixes();
    int connect_timeout_ms = 10000;
    int read_timeout_ms = 120000;
};

/// OpenAI-compatible chat-completions backend:
/// POST {base_url}/chat/completions with a bearer token.
class HttpLlmClient final : public LlmClient {
  public:
    explicit HttpLlmClient(HttpClientConfig config);
    ~HttpLlmClient() override;

    ChatResponse complete(const ChatRequest& request) override;

    // Wire codec, exposed for tests.
    static std::string encode_request_json(const ChatRequest& request);
    static ChatResponse decode_response_json(const std::string& body);
    /// Maps a non-2xx status (and body) onto the error taxonomy; throws.
    [[noreturn]] static void raise_for_status(int status, const std::string& body);

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace kgp::llm
