#include <doctest.h>

#include <fstream>
#include <sstream>

#include "kgp/retrieval.hpp"

using namespace kgp;
using namespace kgp::retrieval;

namespace {

std::string read_golden(const std::string& name) {
    std::ifstream in(std::string(KGP_TESTS_GOLDEN_DIR) + "/" + name, std::ios::binary);
    REQUIRE(in);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

corpus::Chunk make_chunk(int index, std::string text_in, const std::string& doc_id = "doc") {
    corpus::Chunk c;
    c.doc_id = doc_id;
    c.index = index;
    c.text = std::move(text_in);
    c.token_estimate = corpus::estimate_tokens(c.text);
    return c;
}

const llm::RequestParams params{.model = "test-model"};
const llm::RetryPolicy retry{.max_attempts = 1, .base_delay = std::chrono::milliseconds(0)};

} // namespace

TEST_CASE("local embedder is normalized and deterministic") {
    HashedBagEmbedder embedder;
    const EmbeddingVector v = embedder.embed("a a");
    double norm = 0.0;
    for (float x : v.values) {
        norm += static_cast<double>(x) * x;
    }
    CHECK(norm == doctest::Approx(1.0));
    CHECK_FALSE(v.empty_input);

    const EmbeddingVector v1 = embedder.embed("x");
    const EmbeddingVector v2 = embedder.embed("x");
    CHECK(v1.values == v2.values);
}

TEST_CASE("empty text embeds to a flagged zero vector, never NaN") {
    HashedBagEmbedder embedder;
    const EmbeddingVector v = embedder.embed("  ...  ");
    CHECK(v.empty_input);
    for (float x : v.values) {
        CHECK(x == 0.0F);
    }
    CHECK(cosine(v, embedder.embed("word")) == 0.0F);
}

TEST_CASE("disjoint token buckets give zero cosine") {
    // fnv1a64 % 256: alpha=43, beta=167, gamma=106, delta=193 — all distinct.
    HashedBagEmbedder embedder;
    const float c = cosine(embedder.embed("alpha beta"), embedder.embed("gamma delta"));
    CHECK(c == doctest::Approx(0.0));
}

TEST_CASE("cosine self-similarity is 1 for non-empty text") {
    HashedBagEmbedder embedder;
    const EmbeddingVector v = embedder.embed("some words here");
    CHECK(cosine(v, v) == doctest::Approx(1.0));
    const EmbeddingVector w = embedder.embed("other words");
    CHECK(cosine(v, w) == doctest::Approx(cosine(w, v)));
}

TEST_CASE("retrieve_top_k returns by descending similarity") {
    HashedBagEmbedder embedder;
    const std::vector<corpus::Chunk> chunks{
        make_chunk(0, "apples and oranges"),
        make_chunk(1, "the query text exactly"),
        make_chunk(2, "something unrelated entirely"),
    };
    const VectorStore store = VectorStore::build(chunks, embedder);
    const auto top = retrieve_top_k(store, "the query text exactly", 2, embedder);
    REQUIRE(top.size() == 2);
    CHECK(top[0].chunk.index == 1);
    CHECK(top[0].score == doctest::Approx(1.0));
    CHECK(top[0].score >= top[1].score);
}

TEST_CASE("retrieve_top_k caps k at the store size and validates inputs") {
    HashedBagEmbedder embedder;
    const std::vector<corpus::Chunk> one{make_chunk(0, "only chunk")};
    const VectorStore store = VectorStore::build(one, embedder);
    const auto top = retrieve_top_k(store, "anything", 3, embedder);
    REQUIRE(top.size() == 1);
    CHECK(top[0].chunk.index == 0);

    const VectorStore empty;
    CHECK_THROWS_AS(retrieve_top_k(empty, "q", 1, embedder), EmptyStoreError);
    CHECK_THROWS_AS(retrieve_top_k(store, "q", 0, embedder), std::invalid_argument);
}

TEST_CASE("equal scores break ties by ascending index") {
    HashedBagEmbedder embedder;
    // Identical texts embed identically, so scores tie exactly.
    const std::vector<corpus::Chunk> chunks{
        make_chunk(0, "same text"),
        make_chunk(1, "same text"),
        make_chunk(2, "same text"),
    };
    const VectorStore store = VectorStore::build(chunks, embedder);
    const auto top = retrieve_top_k(store, "same text", 2, embedder);
    REQUIRE(top.size() == 2);
    CHECK(top[0].chunk.index == 0);
    CHECK(top[1].chunk.index == 1);
}

TEST_CASE("vector store persists with a dim header") {
    HashedBagEmbedder embedder(8);
    const std::vector<corpus::Chunk> chunks{make_chunk(0, "alpha"), make_chunk(1, "beta")};
    const VectorStore store = VectorStore::build(chunks, embedder);
    std::ostringstream out;
    store.save(out);
    const std::string text_out = out.str();
    CHECK(text_out.rfind("dim=8\n", 0) == 0);
    CHECK(text_out.find("doc\t0\t") != std::string::npos);
    CHECK(text_out.find("doc\t1\t") != std::string::npos);
}

TEST_CASE("summarize prompt matches the golden rendering") {
    CHECK(render_summarize_prompt("M", "T") == read_golden("summarize_prompt.txt"));
}

TEST_CASE("holistic prompt matches the golden rendering") {
    const std::vector<std::string> summaries{"S1", "S2"};
    CHECK(render_holistic_prompt("E", "M", summaries) == read_golden("holistic_prompt.txt"));
}

TEST_CASE("holistic prompt contains the module guidance sentences") {
    const std::vector<std::string> summaries{"S"};
    const std::string prompt = render_holistic_prompt("E", "M", summaries);
    CHECK(prompt.find("The Person Status Module indicates whether the agent is an enslaved "
                      "person") != std::string::npos);
    CHECK(prompt.find("The Interagent Relationship Record Module describes whether the agent "
                      "has a relationship with another Enslaver or Owner.") != std::string::npos);
}

TEST_CASE("summarize_chunk returns the scripted summary") {
    llm::ScriptedClient client({{llm::ScriptEntry::Match::ordinal, "0", "S", "stop"}});
    const std::string summary =
        summarize_chunk(client, params, retry, make_chunk(0, "text"), "M");
    CHECK(summary == "S");
}

TEST_CASE("summarize_chunk surfaces refusals") {
    llm::ScriptedClient client({{llm::ScriptEntry::Match::ordinal, "0", "no", "refusal"}});
    CHECK_THROWS_AS(summarize_chunk(client, params, retry, make_chunk(0, "text"), "M"),
                    llm::RefusalError);
    llm::ScriptedClient ok({{llm::ScriptEntry::Match::ordinal, "0", "fine", "stop"}});
    CHECK_THROWS_AS(summarize_chunk(ok, params, retry, make_chunk(0, "text"), ""),
                    std::invalid_argument);
}

TEST_CASE("holistic_summary echoes the scripted content and validates inputs") {
    llm::ScriptedClient client({{llm::ScriptEntry::Match::ordinal, "0", "H", "stop"}});
    const std::vector<std::string> summaries{"S"};
    CHECK(holistic_summary(client, params, retry, summaries, "M", "E") == "H");

    llm::ScriptedClient unused({});
    CHECK_THROWS_AS(holistic_summary(unused, params, retry, summaries, "M", ""),
                    std::invalid_argument);
    CHECK_THROWS_AS(holistic_summary(unused, params, retry, {}, "M", "E"),
                    std::invalid_argument);
}

TEST_CASE("retrieve_context: summarization summarizes every chunk then joins") {
    llm::ScriptedClient client({
        {llm::ScriptEntry::Match::ordinal, "0", "sum0", "stop"},
        {llm::ScriptEntry::Match::ordinal, "1", "sum1", "stop"},
        {llm::ScriptEntry::Match::ordinal, "2", "holistic text", "stop"},
    });
    HashedBagEmbedder embedder;
    const std::vector<corpus::Chunk> chunks{make_chunk(0, "first"), make_chunk(1, "second")};
    RetrievalParams rp;
    rp.strategy = Strategy::Summarization;
    rp.example_summary = "E";
    const RetrievalOutcome outcome =
        retrieve_context(chunks, "M", rp, client, params, retry, embedder);
    CHECK(outcome.context.text == "holistic text");
    CHECK(outcome.context.provenance == std::vector<int>{0, 1});
    CHECK(outcome.chunk_summaries == std::vector<std::string>{"sum0", "sum1"});
    CHECK(outcome.context.strategy == Strategy::Summarization);
}

TEST_CASE("retrieve_context skips failing chunks and keeps going") {
    llm::ScriptedClient client({
        {llm::ScriptEntry::Match::ordinal, "0", "refused", "refusal"},
        {llm::ScriptEntry::Match::ordinal, "1", "sum1", "stop"},
        {llm::ScriptEntry::Match::ordinal, "2", "H", "stop"},
    });
    HashedBagEmbedder embedder;
    const std::vector<corpus::Chunk> chunks{make_chunk(0, "first"), make_chunk(1, "second")};
    RetrievalParams rp;
    rp.strategy = Strategy::Summarization;
    rp.example_summary = "E";
    const RetrievalOutcome outcome =
        retrieve_context(chunks, "M", rp, client, params, retry, embedder);
    CHECK(outcome.context.provenance == std::vector<int>{1});
    REQUIRE(outcome.warnings.size() == 1);
    CHECK(outcome.warnings[0].find("chunk 0") != std::string::npos);
}

TEST_CASE("retrieve_context fails when every chunk fails") {
    llm::ScriptedClient client({
        {llm::ScriptEntry::Match::ordinal, "0", "no", "refusal"},
        {llm::ScriptEntry::Match::ordinal, "1", "no", "refusal"},
    });
    HashedBagEmbedder embedder;
    const std::vector<corpus::Chunk> chunks{make_chunk(0, "first"), make_chunk(1, "second")};
    RetrievalParams rp;
    rp.strategy = Strategy::Summarization;
    rp.example_summary = "E";
    CHECK_THROWS_AS(retrieve_context(chunks, "M", rp, client, params, retry, embedder),
                    ContextUnavailableError);
    CHECK_THROWS_AS(retrieve_context({}, "M", rp, client, params, retry, embedder),
                    ContextUnavailableError);
}

TEST_CASE("retrieve_context: rag keeps document order regardless of score order") {
    llm::ScriptedClient client({}); // rag makes no llm calls
    HashedBagEmbedder embedder;
    const std::vector<corpus::Chunk> chunks{
        make_chunk(0, "unrelated filler words"),
        make_chunk(1, "also not about the topic"),
        make_chunk(2, "harriet tubman rescue missions"),
        make_chunk(3, "harriet tubman underground railroad"),
        make_chunk(4, "more filler padding text"),
    };
    RetrievalParams rp;
    rp.strategy = Strategy::Rag;
    rp.rag_top_k = 2;
    rp.variant = PromptVariant::MainAgentRestricted;
    rp.agent_name = "harriet tubman";
    const RetrievalOutcome outcome = retrieve_context(
        chunks, "harriet tubman underground railroad rescue", rp, client, params, retry,
        embedder);
    REQUIRE(outcome.context.provenance.size() == 2);
    CHECK(outcome.context.provenance[0] < outcome.context.provenance[1]);
    // Text is the chunks joined in document order.
    const std::size_t first = outcome.context.text.find(
        chunks[static_cast<std::size_t>(outcome.context.provenance[0])].text);
    const std::size_t second = outcome.context.text.find(
        chunks[static_cast<std::size_t>(outcome.context.provenance[1])].text);
    CHECK(first != std::string::npos);
    CHECK(second != std::string::npos);
    CHECK(first < second);
    CHECK(outcome.store.has_value());
}

TEST_CASE("rag provenance has exactly k indices when enough chunks exist") {
    llm::ScriptedClient client({});
    HashedBagEmbedder embedder;
    std::vector<corpus::Chunk> chunks;
    for (int i = 0; i < 5; ++i) {
        chunks.push_back(make_chunk(i, "chunk number " + std::to_string(i)));
    }
    RetrievalParams rp;
    rp.strategy = Strategy::Rag;
    rp.rag_top_k = 2;
    rp.variant = PromptVariant::Unrestricted;
    const RetrievalOutcome outcome =
        retrieve_context(chunks, "chunk", rp, client, params, retry, embedder);
    CHECK(outcome.context.provenance.size() == 2);
}

TEST_CASE("http embedder codec") {
    const std::string body = HttpEmbedder::encode_request_json("mini", "text here");
    CHECK(body.find("\"model\":\"mini\"") != std::string::npos);
    CHECK(body.find("\"input\":\"text here\"") != std::string::npos);

    const EmbeddingVector v =
        HttpEmbedder::decode_response_json(R"({"data":[{"embedding":[0.5,-0.25]}]})");
    REQUIRE(v.values.size() == 2);
    CHECK(v.values[0] == doctest::Approx(0.5));
    CHECK_THROWS_AS(HttpEmbedder::decode_response_json("{}"), EmbeddingProviderError);
}
