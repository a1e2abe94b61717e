#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kgp/errors.hpp"
#include "kgp/llm.hpp"
#include "kgp/ontology.hpp"
#include "kgp/retrieval.hpp"
#include "kgp/types.hpp"

namespace kgp::extraction {

class MissingAgentNameError : public Error {
  public:
    MissingAgentNameError() : Error("main-agent prompt variant requires an agent name") {}
};

class MalformedRowError : public Error {
  public:
    MalformedRowError(int line_no, int fields)
        : Error("row " + std::to_string(line_no) + ": expected 3 fields, got " +
                std::to_string(fields)),
          line_no_(line_no) {}

    int line_no() const { return line_no_; }

  private:
    int line_no_;
};

/// The canonical few-shot line shown in every population prompt.
inline constexpr std::string_view kExampleFormatLine =
    "hasAgeValue(Agent, xsd:double): hasAgeValue(Absalom Jones, 71)";

/// Stamped into the run manifest so outputs stay attributable to the exact
/// prompt wording.
inline constexpr std::string_view kPromptTemplateVersion = "kgp-prompts-v1";

/// Builds the population prompt: task statement, module content, the few-shot
/// example block, the skip instruction, then (main-agent variant only) the
/// agent-naming sentence, then the context text. `example_lines` extends the
/// canonical example block.
std::string build_population_prompt(const retrieval::ContextText& context,
                                    const std::vector<ontology::OntologyModule>& modules,
                                    const std::optional<std::string>& agent_name,
                                    PromptVariant variant,
                                    std::span<const std::string> example_lines = {});

struct ParsedTriples {
    std::vector<Triple> triples;
    std::vector<std::string> unparsed; // non-blank lines that failed the grammar
};

/// Tolerant line-oriented grammar over LLM output. Accepts `pred(subj, obj)`
/// (the first top-level comma splits subject from object) and
/// `pred(Domain, Range): pred(subj, obj)` schema:instance lines, with list
/// bullets and numbering stripped. Never throws; rejected lines are returned.
ParsedTriples parse_llm_triples(std::string_view text);

/// One triple per line `subject \t predicate \t object`, UTF-8, \n newlines;
/// fields backslash-escaped.
void write_triples_tsv(std::span<const Triple> triples, std::ostream& out);
void write_triples_tsv(std::span<const Triple> triples, const std::filesystem::path& destination);

/// Exact inverse of write_triples_tsv. Raises MalformedRowError when a row
/// does not have exactly 3 fields.
std::vector<Triple> read_triples_tsv(std::istream& in);
std::vector<Triple> read_triples_tsv(const std::filesystem::path& source);

enum class Failure { refusal, empty, parse_total_failure };

std::string_view failure_name(Failure f);

struct ExtractionResult {
    std::string doc_id;
    std::vector<Triple> triples;
    std::vector<std::string> unparsed_lines;
    std::optional<Failure> failure; // set iff triples is empty
    std::string prompt;             // as sent, for journaling
    std::string raw_response;
};

/// Prompts the model over the retrieved context and parses the response.
ExtractionResult extract(const retrieval::ContextText& context,
                         const std::vector<ontology::OntologyModule>& modules,
                         llm::LlmClient& client, const llm::RequestParams& params,
                         const llm::RetryPolicy& retry, PromptVariant variant,
                         const std::optional<std::string>& agent_name,
                         std::span<const std::string> example_lines = {});

} // namespace kgp::extraction
