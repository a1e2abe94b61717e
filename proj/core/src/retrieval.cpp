#include "kgp/retrieval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>

#include <httplib.h>
#include <json.hpp>

#include "kgp/text.hpp"

namespace kgp::retrieval {

float cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    const std::size_t n = std::min(a.values.size(), b.values.size());
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        dot += static_cast<double>(a.values[i]) * b.values[i];
        na += static_cast<double>(a.values[i]) * a.values[i];
        nb += static_cast<double>(b.values[i]) * b.values[i];
    }
    if (na == 0.0 || nb == 0.0) {
        return 0.0F;
    }
    return static_cast<float>(dot / (std::sqrt(na) * std::sqrt(nb)));
}

EmbeddingVector HashedBagEmbedder::embed(std::string_view text_in) const {
    EmbeddingVector v;
    v.values.assign(static_cast<std::size_t>(dim_), 0.0F);
    const auto tokens = text::tokenize(text_in);
    if (tokens.empty()) {
        v.empty_input = true;
        return v;
    }
    for (const std::string& token : tokens) {
        const auto bucket =
            static_cast<std::size_t>(text::fnv1a64(token) % static_cast<std::uint64_t>(dim_));
        v.values[bucket] += 1.0F;
    }
    double norm = 0.0;
    for (float x : v.values) {
        norm += static_cast<double>(x) * x;
    }
    const auto scale = static_cast<float>(1.0 / std::sqrt(norm));
    for (float& x : v.values) {
        x *= scale;
    }
    return v;
}

HttpEmbedder::HttpEmbedder(std::string base_url, std::string model, std::string api_key, int dim)
    : base_url_(std::move(base_url)), model_(std::move(model)), api_key_(std::move(api_key)),
      dim_(dim) {}

HttpEmbedder::~HttpEmbedder() = default;

std::string HttpEmbedder::encode_request_json(std::string_view model, std::string_view text_in) {
    nlohmann::json body;
    body["model"] = model;
    body["input"] = text_in;
    return body.dump();
}

EmbeddingVector HttpEmbedder::decode_response_json(const std::string& body) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        throw EmbeddingProviderError(std::string("malformed embedding response: ") + e.what());
    }
    if (!doc.contains("data") || !doc["data"].is_array() || doc["data"].empty() ||
        !doc["data"][0].contains("embedding")) {
        throw EmbeddingProviderError("embedding response has no data[0].embedding");
    }
    EmbeddingVector v;
    for (const auto& x : doc["data"][0]["embedding"]) {
        v.values.push_back(x.get<float>());
    }
    return v;
}

EmbeddingVector HttpEmbedder::embed(std::string_view text_in) const {
    if (text::trim(text_in).empty()) {
        EmbeddingVector v;
        v.values.assign(static_cast<std::size_t>(dim_), 0.0F);
        v.empty_input = true;
        return v;
    }
    if (!base_url_.starts_with("http://")) {
        throw EmbeddingProviderError("embedding base url must start with http://");
    }
    const std::size_t slash = base_url_.find('/', 7);
    const std::string origin = slash == std::string::npos ? base_url_ : base_url_.substr(0, slash);
    std::string prefix = slash == std::string::npos ? "" : base_url_.substr(slash);
    while (!prefix.empty() && prefix.back() == '/') {
        prefix.pop_back();
    }
    httplib::Client http(origin);
    httplib::Headers headers;
    if (!api_key_.empty()) {
        headers.emplace("Authorization", "Bearer " + api_key_);
    }
    auto result = http.Post(prefix + "/embeddings", headers,
                            encode_request_json(model_, text_in), "application/json");
    if (!result) {
        throw EmbeddingProviderError("embedding connection failed: " +
                                     httplib::to_string(result.error()));
    }
    if (result->status < 200 || result->status >= 300) {
        throw EmbeddingProviderError("embedding HTTP " + std::to_string(result->status));
    }
    EmbeddingVector v = decode_response_json(result->body);
    if (v.dim() != dim_) {
        throw EmbeddingProviderError("embedding dim mismatch: got " + std::to_string(v.dim()) +
                                     ", configured " + std::to_string(dim_));
    }
    return v;
}

VectorStore VectorStore::build(std::span<const corpus::Chunk> chunks, const Embedder& embedder) {
    VectorStore store;
    store.dim_ = embedder.dim();
    for (const corpus::Chunk& chunk : chunks) {
        store.entries_.push_back(StoreEntry{chunk, embedder.embed(chunk.text)});
    }
    return store;
}

namespace {

std::string format_float(float x) {
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return ec == std::errc() ? std::string(buf, end) : std::string("0");
}

} // namespace

void VectorStore::save(std::ostream& out) const {
    out << "dim=" << dim_ << "\n";
    for (const StoreEntry& e : entries_) {
        out << e.chunk.doc_id << '\t' << e.chunk.index << '\t';
        for (std::size_t i = 0; i < e.vector.values.size(); ++i) {
            if (i > 0) {
                out << ' ';
            }
            out << format_float(e.vector.values[i]);
        }
        out << '\n';
    }
}

std::vector<ScoredChunk> retrieve_top_k(const VectorStore& store, std::string_view query, int k,
                                        const Embedder& embedder) {
    if (k < 1) {
        throw std::invalid_argument("k must be >= 1");
    }
    if (store.empty()) {
        throw EmptyStoreError();
    }
    const EmbeddingVector q = embedder.embed(query);
    std::vector<ScoredChunk> scored;
    scored.reserve(store.entries().size());
    for (const StoreEntry& e : store.entries()) {
        scored.push_back(ScoredChunk{e.chunk, cosine(q, e.vector)});
    }
    std::stable_sort(scored.begin(), scored.end(), [](const ScoredChunk& a, const ScoredChunk& b) {
        if (a.score != b.score) {
            return a.score > b.score;
        }
        if (a.chunk.doc_id != b.chunk.doc_id) {
            return a.chunk.doc_id < b.chunk.doc_id;
        }
        return a.chunk.index < b.chunk.index;
    });
    scored.resize(std::min<std::size_t>(scored.size(), static_cast<std::size_t>(k)));
    return scored;
}

std::string render_summarize_prompt(std::string_view module_content,
                                    std::string_view text_chunk) {
    std::string prompt;
    prompt += "Summarize the following text, by keeping the relevant information from these "
              "modules (if any): ";
    prompt += module_content;
    prompt += ". The birth and death dates are mentioned in parenthesis after the agent name. "
              "For example : Joseph Vance Lewis (December 25, 1853 – April 24, 1925), was a "
              "slave who was freed. Here the Birth date is December 25, 1853 and Death date is "
              "April 24, 1925. So keep those information in the summary. The given text to "
              "summarize: ";
    prompt += text_chunk;
    return prompt;
}

std::string render_holistic_prompt(std::string_view example_summary,
                                   std::string_view module_content,
                                   std::span<const std::string> chunk_summaries) {
    std::string joined;
    for (std::size_t i = 0; i < chunk_summaries.size(); ++i) {
        if (i > 0) {
            joined += "\n\n";
        }
        joined += chunk_summaries[i];
    }
    std::string prompt;
    prompt += "Here is an example summary that highlights the key points from a text file based "
              "on the given modules. The text file discusses a single agent or person who is "
              "introduced initially. So, the summary should focus solely on that particular "
              "agent. The birth and death dates are mentioned in parenthesis after the agent "
              "name. For example : Joseph Vance Lewis (December 25, 1853 – April 24, 1925), was "
              "a slave who was freed. Here the Birth date is December 25, 1853 and Death date "
              "is April 24, 1925. The Interagent Relationship Record Module describes whether "
              "the agent has a relationship with another Enslaver or Owner. The Person Status "
              "Module indicates whether the agent is an enslaved person and mentions any "
              "status-generating events.\n\n";
    prompt += "Example summary: ";
    prompt += example_summary;
    prompt += "\n\nPlease provide a holistic summary from the given text that follows the format "
              "of the example summary and keeps the relevant information from these modules (if "
              "any): ";
    prompt += module_content;
    prompt += ".\n\nThe given text is: ";
    prompt += joined;
    return prompt;
}

namespace {

std::string run_prompt(llm::LlmClient& client, const llm::RequestParams& params,
                       const llm::RetryPolicy& retry, std::string prompt) {
    const llm::ChatRequest request = llm::make_user_request(params, std::move(prompt));
    const llm::ChatResponse response = llm::complete_with_retry(client, request, retry);
    if (response.finish_reason == llm::FinishReason::refusal) {
        throw llm::RefusalError("model refused: " + response.content.substr(0, 120));
    }
    return response.content;
}

} // namespace

std::string summarize_chunk(llm::LlmClient& client, const llm::RequestParams& params,
                            const llm::RetryPolicy& retry, const corpus::Chunk& chunk,
                            std::string_view module_content) {
    if (module_content.empty()) {
        throw std::invalid_argument("module content must not be empty");
    }
    return run_prompt(client, params, retry, render_summarize_prompt(module_content, chunk.text));
}

std::string holistic_summary(llm::LlmClient& client, const llm::RequestParams& params,
                             const llm::RetryPolicy& retry,
                             std::span<const std::string> chunk_summaries,
                             std::string_view module_content, std::string_view example_summary) {
    if (chunk_summaries.empty()) {
        throw std::invalid_argument("need at least one chunk summary");
    }
    if (example_summary.empty()) {
        throw std::invalid_argument("example summary must not be empty");
    }
    return run_prompt(client, params, retry,
                      render_holistic_prompt(example_summary, module_content, chunk_summaries));
}

RetrievalOutcome retrieve_context(std::span<const corpus::Chunk> chunks,
                                  std::string_view module_content, const RetrievalParams& params,
                                  llm::LlmClient& client, const llm::RequestParams& request_params,
                                  const llm::RetryPolicy& retry, const Embedder& embedder) {
    if (chunks.empty()) {
        throw ContextUnavailableError("document has no chunks");
    }

    RetrievalOutcome outcome;
    outcome.context.doc_id = chunks.front().doc_id;
    outcome.context.strategy = params.strategy;

    if (params.strategy == Strategy::Summarization) {
        for (const corpus::Chunk& chunk : chunks) {
            try {
                outcome.chunk_summaries.push_back(
                    summarize_chunk(client, request_params, retry, chunk, module_content));
                outcome.context.provenance.push_back(chunk.index);
            } catch (const llm::LlmError& e) {
                outcome.warnings.push_back("chunk " + std::to_string(chunk.index) +
                                           " skipped: " + e.what());
            }
        }
        if (outcome.chunk_summaries.empty()) {
            throw ContextUnavailableError("all chunk summaries failed for " +
                                          outcome.context.doc_id);
        }
        outcome.context.text =
            holistic_summary(client, request_params, retry, outcome.chunk_summaries,
                             module_content, params.example_summary);
        return outcome;
    }

    // RAG: retrieve the top-k most query-similar chunks, then reassemble them
    // in document order for readability.
    VectorStore store = VectorStore::build(chunks, embedder);
    std::string query;
    if (params.variant == PromptVariant::MainAgentRestricted && params.agent_name.has_value()) {
        query = *params.agent_name + "\n";
    }
    query += module_content;

    std::vector<ScoredChunk> scored = retrieve_top_k(store, query, params.rag_top_k, embedder);
    std::sort(scored.begin(), scored.end(), [](const ScoredChunk& a, const ScoredChunk& b) {
        return a.chunk.index < b.chunk.index;
    });
    for (std::size_t i = 0; i < scored.size(); ++i) {
        if (i > 0) {
            outcome.context.text += corpus::kChunkJoiner;
        }
        outcome.context.text += scored[i].chunk.text;
        outcome.context.provenance.push_back(scored[i].chunk.index);
    }
    outcome.store = std::move(store);
    return outcome;
}

} // namespace kgp::retrieval
