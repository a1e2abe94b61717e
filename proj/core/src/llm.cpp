#include "kgp/llm.hpp"

#include <fstream>
#include <thread>

#include <json.hpp>

#include "kgp/corpus.hpp"
#include "kgp/text.hpp"

namespace kgp::llm {

void validate_request(const ChatRequest& request) {
    bool has_user = false;
    for (const Message& m : request.messages) {
        if (m.role == Role::user) {
            has_user = true;
            break;
        }
    }
    if (!has_user) {
        throw std::invalid_argument("chat request needs at least one user message");
    }
    if (request.temperature < 0.0) {
        throw std::invalid_argument("temperature must be >= 0");
    }
}

ChatRequest make_user_request(const RequestParams& params, std::string prompt) {
    ChatRequest request;
    request.model = params.model;
    request.temperature = params.temperature;
    request.max_output_tokens = params.max_output_tokens;
    request.messages.push_back(Message{Role::user, std::move(prompt)});
    return request;
}

ChatResponse complete_with_retry(LlmClient& client, const ChatRequest& request,
                                 const RetryPolicy& policy) {
    if (policy.max_attempts < 1) {
        throw std::invalid_argument("max_attempts must be >= 1");
    }
    auto delay = policy.base_delay;
    for (int attempt = 1;; ++attempt) {
        try {
            return client.complete(request);
        } catch (const RateLimitedError&) {
            if (attempt >= policy.max_attempts) {
                throw;
            }
        } catch (const TransportError&) {
            if (attempt >= policy.max_attempts) {
                throw;
            }
        }
        if (delay.count() > 0) {
            std::this_thread::sleep_for(delay);
        }
        delay *= 2;
    }
}

const std::vector<std::string>& default_refusal_prefixes() {
    static const std::vector<std::string> prefixes = {"I cannot", "I'm sorry"};
    return prefixes;
}

FinishReason classify_finish(std::string_view content, FinishReason finish,
                             std::span<const std::string> refusal_prefixes) {
    if (finish != FinishReason::stop) {
        return finish;
    }
    const std::string_view trimmed = text::trim(content);
    for (const std::string& prefix : refusal_prefixes) {
        if (trimmed.starts_with(prefix)) {
            return FinishReason::refusal;
        }
    }
    return finish;
}

std::uint64_t request_content_hash(const ChatRequest& request) {
    std::string concatenated;
    for (const Message& m : request.messages) {
        concatenated += m.content;
    }
    return text::fnv1a64(concatenated);
}

std::string request_hash_hex(const ChatRequest& request) {
    static const char* digits = "0123456789abcdef";
    std::uint64_t h = request_content_hash(request);
    std::string hex(16, '0');
    for (int i = 15; i >= 0; --i) {
        hex[static_cast<std::size_t>(i)] = digits[h & 0xF];
        h >>= 4;
    }
    return hex;
}

namespace {

FinishReason parse_finish_reason(const std::string& s) {
    if (s == "stop") {
        return FinishReason::stop;
    }
    if (s == "length") {
        return FinishReason::length;
    }
    if (s == "refusal") {
        return FinishReason::refusal;
    }
    return FinishReason::error;
}

ChatResponse response_from_entry(const ScriptEntry& entry, const ChatRequest& request,
                                 std::span<const std::string> refusal_prefixes) {
    if (entry.finish_reason == "error") {
        throw TransportError("scripted transport error: " + entry.content);
    }
    if (entry.finish_reason == "rate_limited") {
        throw RateLimitedError("scripted rate limit");
    }
    if (entry.finish_reason == "auth") {
        throw AuthError("scripted auth failure");
    }
    if (entry.finish_reason == "context_overflow") {
        throw ContextOverflowError("scripted context overflow");
    }
    ChatResponse resp;
    resp.content = entry.content;
    resp.finish_reason =
        classify_finish(entry.content, parse_finish_reason(entry.finish_reason), refusal_prefixes);
    std::string prompt_text;
    for (const Message& m : request.messages) {
        prompt_text += m.content;
    }
    resp.prompt_tokens = corpus::estimate_tokens(prompt_text);
    resp.completion_tokens = corpus::estimate_tokens(resp.content);
    return resp;
}

} // namespace

ScriptedClient::ScriptedClient(std::vector<ScriptEntry> entries,
                               std::vector<std::string> refusal_prefixes)
    : refusal_prefixes_(std::move(refusal_prefixes)) {
    for (ScriptEntry& e : entries) {
        if (e.match == ScriptEntry::Match::hash) {
            hash_entries_[text::ascii_lower(e.key)] = std::move(e);
        } else {
            ordinal_entries_.push_back(std::move(e));
        }
    }
}

std::vector<ScriptEntry> ScriptedClient::load_script(const std::filesystem::path& script_file) {
    std::ifstream in(script_file);
    if (!in) {
        throw ConfigError("cannot read script file: " + script_file.string());
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("invalid script file " + script_file.string() + ": " + e.what());
    }
    if (!doc.is_array()) {
        throw ConfigError("script file must hold a JSON array: " + script_file.string());
    }
    std::vector<ScriptEntry> entries;
    for (const auto& item : doc) {
        ScriptEntry e;
        const std::string match = item.value("match", "ordinal");
        if (match == "hash") {
            e.match = ScriptEntry::Match::hash;
        } else if (match == "ordinal") {
            e.match = ScriptEntry::Match::ordinal;
        } else {
            throw ConfigError("script entry match must be 'ordinal' or 'hash'");
        }
        if (item.contains("key")) {
            const auto& key = item.at("key");
            e.key = key.is_string() ? key.get<std::string>() : key.dump();
        }
        e.content = item.value("content", "");
        e.finish_reason = item.value("finish_reason", "stop");
        entries.push_back(std::move(e));
    }
    return entries;
}

ChatResponse ScriptedClient::complete(const ChatRequest& request) {
    validate_request(request);

    if (!hash_entries_.empty()) {
        const std::string hex = request_hash_hex(request);
        const auto it = hash_entries_.find(hex);
        if (it != hash_entries_.end()) {
            std::lock_guard lock(mutex_);
            ++calls_;
            return response_from_entry(it->second, request, refusal_prefixes_);
        }
        if (ordinal_entries_.empty()) {
            throw TransportError("script exhausted: no entry for request hash " + hex);
        }
    }

    std::lock_guard lock(mutex_);
    ++calls_;
    if (next_ordinal_ >= static_cast<int>(ordinal_entries_.size())) {
        throw TransportError("script exhausted: no entry for call ordinal " +
                             std::to_string(next_ordinal_));
    }
    const ScriptEntry& entry = ordinal_entries_[static_cast<std::size_t>(next_ordinal_++)];
    return response_from_entry(entry, request, refusal_prefixes_);
}

} // namespace kgp::llm
