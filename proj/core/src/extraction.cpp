#include "kgp/extraction.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "kgp/text.hpp"
#include "kgp/tsv.hpp"

namespace kgp::extraction {

std::string build_population_prompt(const retrieval::ContextText& context,
                                    const std::vector<ontology::OntologyModule>& modules,
                                    const std::optional<std::string>& agent_name,
                                    PromptVariant variant,
                                    std::span<const std::string> example_lines) {
    if (variant == PromptVariant::MainAgentRestricted && !agent_name.has_value()) {
        throw MissingAgentNameError();
    }

    std::string prompt;
    prompt += "Populate the following ontology modules with facts from the given text.\n\n";
    prompt += "Modules:\n";
    prompt += ontology::render_module_content(modules);
    prompt += "\n\nExample format:\n";
    prompt += kExampleFormatLine;
    prompt += "\n";
    for (const std::string& line : example_lines) {
        prompt += line;
        prompt += "\n";
    }
    prompt += "\nOutput one line per fact in the example format. Skip any relations for which "
              "no information is provided in the given text.\n";
    if (variant == PromptVariant::MainAgentRestricted) {
        prompt += "\nThe document begins with the name " + *agent_name +
                  " and the content is primarily about that entity. Populate the ontology "
                  "modules for " +
                  *agent_name + ".\n";
    }
    prompt += "\nThe given text is: ";
    prompt += context.text;
    return prompt;
}

namespace {

bool is_identifier(std::string_view s) {
    if (s.empty()) {
        return false;
    }
    if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') {
        return false;
    }
    for (char c : s) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') {
            return false;
        }
    }
    return true;
}

std::string_view strip_bullet(std::string_view line) {
    std::string_view t = text::trim(line);
    // "- ", "* ", "+ " bullets (and the UTF-8 bullet character).
    if (t.size() >= 2 && (t[0] == '-' || t[0] == '*' || t[0] == '+') && t[1] == ' ') {
        return text::trim(t.substr(2));
    }
    if (t.starts_with("•")) {
        return text::trim(t.substr(3));
    }
    // "1.", "12)" numbering.
    std::size_t i = 0;
    while (i < t.size() && std::isdigit(static_cast<unsigned char>(t[i]))) {
        ++i;
    }
    if (i > 0 && i < t.size() && (t[i] == '.' || t[i] == ')')) {
        return text::trim(t.substr(i + 1));
    }
    return t;
}

struct Call {
    std::string predicate;
    std::string args;       // inside the outer parentheses
    std::size_t end = 0;    // index just past the closing paren
};

// Parses `identifier( ... )` starting at `from`, honoring nested parentheses.
std::optional<Call> parse_call(std::string_view s, std::size_t from) {
    const std::size_t open = s.find('(', from);
    if (open == std::string_view::npos) {
        return std::nullopt;
    }
    const std::string predicate{text::trim(s.substr(from, open - from))};
    if (!is_identifier(predicate)) {
        return std::nullopt;
    }
    int depth = 0;
    for (std::size_t i = open; i < s.size(); ++i) {
        if (s[i] == '(') {
            ++depth;
        } else if (s[i] == ')') {
            --depth;
            if (depth == 0) {
                Call call;
                call.predicate = predicate;
                call.args = std::string{s.substr(open + 1, i - open - 1)};
                call.end = i + 1;
                return call;
            }
        }
    }
    return std::nullopt;
}

// Splits the argument list on the first top-level comma; the object keeps any
// further commas (dates like "April 24, 1925").
std::optional<Triple> triple_from_call(const Call& call) {
    int depth = 0;
    for (std::size_t i = 0; i < call.args.size(); ++i) {
        const char c = call.args[i];
        if (c == '(') {
            ++depth;
        } else if (c == ')') {
            --depth;
        } else if (c == ',' && depth == 0) {
            Triple t;
            t.subject = std::string{text::trim(std::string_view(call.args).substr(0, i))};
            t.predicate = call.predicate;
            t.object = std::string{text::trim(std::string_view(call.args).substr(i + 1))};
            if (t.subject.empty() || t.object.empty()) {
                return std::nullopt;
            }
            return t;
        }
    }
    return std::nullopt;
}

bool only_trailing_punctuation(std::string_view rest) {
    for (char c : text::trim(rest)) {
        if (c != '.' && c != ';' && c != ',') {
            return false;
        }
    }
    return true;
}

std::optional<Triple> parse_triple_line(std::string_view stripped) {
    const auto first = parse_call(stripped, 0);
    if (!first.has_value()) {
        return std::nullopt;
    }
    std::string_view rest = text::trim(stripped.substr(first->end));

    // schema: instance form — take the instance part.
    if (rest.starts_with(":")) {
        const auto second = parse_call(rest, 1);
        if (!second.has_value() ||
            !only_trailing_punctuation(rest.substr(second->end))) {
            return std::nullopt;
        }
        return triple_from_call(*second);
    }
    if (!only_trailing_punctuation(rest)) {
        return std::nullopt;
    }
    return triple_from_call(*first);
}

} // namespace

ParsedTriples parse_llm_triples(std::string_view response_text) {
    ParsedTriples out;
    std::istringstream lines{std::string(response_text)};
    std::string raw_line;
    while (std::getline(lines, raw_line)) {
        if (!raw_line.empty() && raw_line.back() == '\r') {
            raw_line.pop_back();
        }
        if (text::trim(raw_line).empty()) {
            continue;
        }
        const auto triple = parse_triple_line(strip_bullet(raw_line));
        if (triple.has_value()) {
            out.triples.push_back(*triple);
        } else {
            out.unparsed.emplace_back(text::trim(raw_line));
        }
    }
    return out;
}

void write_triples_tsv(std::span<const Triple> triples, std::ostream& out) {
    for (const Triple& t : triples) {
        out << tsv::escape_field(t.subject) << '\t' << tsv::escape_field(t.predicate) << '\t'
            << tsv::escape_field(t.object) << '\n';
    }
}

void write_triples_tsv(std::span<const Triple> triples,
                       const std::filesystem::path& destination) {
    std::ofstream out(destination, std::ios::binary);
    if (!out) {
        throw Error("cannot write triples file: " + destination.string());
    }
    write_triples_tsv(triples, out);
}

std::vector<Triple> read_triples_tsv(std::istream& in) {
    std::vector<Triple> triples;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const auto fields = tsv::split_row(line);
        if (fields.size() != 3) {
            throw MalformedRowError(line_no, static_cast<int>(fields.size()));
        }
        triples.push_back(Triple{tsv::unescape_field(fields[0]), tsv::unescape_field(fields[1]),
                                 tsv::unescape_field(fields[2])});
    }
    return triples;
}

std::vector<Triple> read_triples_tsv(const std::filesystem::path& source) {
    std::ifstream in(source, std::ios::binary);
    if (!in) {
        throw Error("cannot read triples file: " + source.string());
    }
    return read_triples_tsv(in);
}

std::string_view failure_name(Failure f) {
    switch (f) {
    case Failure::refusal:
        return "refusal";
    case Failure::empty:
        return "empty";
    case Failure::parse_total_failure:
        return "parse_total_failure";
    }
    return "unknown";
}

ExtractionResult extract(const retrieval::ContextText& context,
                         const std::vector<ontology::OntologyModule>& modules,
                         llm::LlmClient& client, const llm::RequestParams& params,
                         const llm::RetryPolicy& retry, PromptVariant variant,
                         const std::optional<std::string>& agent_name,
                         std::span<const std::string> example_lines) {
    ExtractionResult result;
    result.doc_id = context.doc_id;
    result.prompt =
        build_population_prompt(context, modules, agent_name, variant, example_lines);

    const llm::ChatRequest request = llm::make_user_request(params, result.prompt);
    const llm::ChatResponse response = llm::complete_with_retry(client, request, retry);
    result.raw_response = response.content;

    if (response.finish_reason == llm::FinishReason::refusal) {
        result.failure = Failure::refusal;
        return result;
    }
    if (text::trim(response.content).empty()) {
        result.failure = Failure::empty;
        return result;
    }

    ParsedTriples parsed = parse_llm_triples(response.content);
    result.triples = std::move(parsed.triples);
    result.unparsed_lines = std::move(parsed.unparsed);
    if (result.triples.empty()) {
        result.failure = Failure::parse_total_failure;
    }
    return result;
}

} // namespace kgp::extraction
