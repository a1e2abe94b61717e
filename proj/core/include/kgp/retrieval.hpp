#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kgp/corpus.hpp"
#include "kgp/errors.hpp"
#include "kgp/llm.hpp"
#include "kgp/types.hpp"

namespace kgp::retrieval {

struct EmbeddingVector {
    std::vector<float> values;
    bool empty_input = false; // zero vector from empty text, flagged, never NaN

    int dim() const { return static_cast<int>(values.size()); }
};

/// 0 when either vector has zero norm.
float cosine(const EmbeddingVector& a, const EmbeddingVector& b);

class EmbeddingProviderError : public Error {
  public:
    using Error::Error;
};

class Embedder {
  public:
    virtual ~Embedder() = default;
    virtual EmbeddingVector embed(std::string_view text) const = 0;
    virtual int dim() const = 0;
};

/// Deterministic offline fallback: L2-normalized hashed bag of words.
/// Tokens are lowercased, split on non-alphanumerics, FNV-1a-hashed into one
/// of `dim` buckets and weighted by term frequency.
class HashedBagEmbedder final : public Embedder {
  public:
    explicit HashedBagEmbedder(int dim = 256) : dim_(dim) {}

    EmbeddingVector embed(std::string_view text) const override;
    int dim() const override { return dim_; }

  private:
    int dim_;
};

/// OpenAI-compatible embeddings endpoint: POST {base_url}/embeddings.
class HttpEmbedder final : public Embedder {
  public:
    HttpEmbedder(std::string base_url, std::string model, std::string api_key, int dim);
    ~HttpEmbedder() override;

    EmbeddingVector embed(std::string_view text) const override;
    int dim() const override { return dim_; }

    static std::string encode_request_json(std::string_view model, std::string_view text);
    static EmbeddingVector decode_response_json(const std::string& body);

  private:
    std::string base_url_;
    std::string model_;
    std::string api_key_;
    int dim_;
};

struct StoreEntry {
    corpus::Chunk chunk;
    EmbeddingVector vector;
};

class EmptyStoreError : public Error {
  public:
    EmptyStoreError() : Error("vector store is empty") {}
};

class VectorStore {
  public:
    static VectorStore build(std::span<const corpus::Chunk> chunks, const Embedder& embedder);

    const std::vector<StoreEntry>& entries() const { return entries_; }
    int dim() const { return dim_; }
    bool empty() const { return entries_.empty(); }

    /// Persists as: header line `dim=<n>`, then one line per entry
    /// `doc_id \t chunk_index \t base-10 floats space-separated`.
    void save(std::ostream& out) const;

  private:
    std::vector<StoreEntry> entries_;
    int dim_ = 0;
};

struct ScoredChunk {
    corpus::Chunk chunk;
    float score = 0.0F;
};

/// Chunks by descending cosine similarity to the embedded query; ties break
/// by ascending (doc_id, chunk index). Returns min(k, store size) entries.
std::vector<ScoredChunk> retrieve_top_k(const VectorStore& store, std::string_view query, int k,
                                        const Embedder& embedder);

/// The module-relevant text handed to population.
struct ContextText {
    std::string doc_id;
    Strategy strategy = Strategy::Summarization;
    std::string text;
    std::vector<int> provenance; // contributing chunk indices, document order
};

class ContextUnavailableError : public Error {
  public:
    using Error::Error;
};

/// Few-shot per-chunk summarization prompt.
std::string render_summarize_prompt(std::string_view module_content, std::string_view text_chunk);

/// Holistic few-shot prompt over the per-chunk summaries.
std::string render_holistic_prompt(std::string_view example_summary,
                                   std::string_view module_content,
                                   std::span<const std::string> chunk_summaries);

/// Runs the per-chunk prompt through the client; raises RefusalError when the
/// response is classified as a refusal.
std::string summarize_chunk(llm::LlmClient& client, const llm::RequestParams& params,
                            const llm::RetryPolicy& retry, const corpus::Chunk& chunk,
                            std::string_view module_content);

std::string holistic_summary(llm::LlmClient& client, const llm::RequestParams& params,
                             const llm::RetryPolicy& retry,
                             std::span<const std::string> chunk_summaries,
                             std::string_view module_content, std::string_view example_summary);

struct RetrievalParams {
    Strategy strategy = Strategy::Summarization;
    int rag_top_k = 4;
    PromptVariant variant = PromptVariant::MainAgentRestricted;
    std::optional<std::string> agent_name; // required by MainAgentRestricted
    std::string example_summary;           // required by summarization
};

struct RetrievalOutcome {
    ContextText context;
    std::vector<std::string> chunk_summaries; // summarization only
    std::vector<std::string> warnings;        // skipped chunks etc.
    std::optional<VectorStore> store;         // rag only, for persistence
};

/// Produces the population context over a document's chunks using the
/// configured strategy. Per-chunk summarization failures skip the chunk and
/// continue; when every chunk fails the whole context is unavailable.
RetrievalOutcome retrieve_context(std::span<const corpus::Chunk> chunks,
                                  std::string_view module_content, const RetrievalParams& params,
                                  llm::LlmClient& client, const llm::RequestParams& request_params,
                                  const llm::RetryPolicy& retry, const Embedder& embedder);

} // namespace kgp::retrieval
