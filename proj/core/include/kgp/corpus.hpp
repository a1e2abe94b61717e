#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace kgp::corpus {

struct RawDocument {
    std::string doc_id; // stable identifier, unique within a run
    std::string title;
    std::string body; // may contain wiki markup residue; may be empty
};

struct CleaningRules {
    bool strip_headers = true;   // lines of form == ... == / === ... ===
    bool strip_citations = true; // inline [N] markers
    bool strip_infoboxes = true; // {{Infobox ...}} blocks, balanced braces
};

struct CleanDocument {
    std::string doc_id;
    std::vector<std::string> paragraphs; // non-empty, source order
};

struct Chunk {
    std::string doc_id;
    int index = 0; // contiguous per document, 0-based
    std::string text;
    int token_estimate = 0; // sum of member paragraph estimates
    bool oversized = false; // single paragraph alone exceeded the budget
};

/// Paragraphs inside one chunk are joined with a single blank line.
inline constexpr std::string_view kChunkJoiner = "\n\n";

/// ceil(codepoint_count / 4); deterministic and monotone in length.
int estimate_tokens(std::string_view text);

/// Applies the cleaning rules, then blank-line paragraph segmentation.
/// An unclosed {{ block is dropped to end-of-input and reported through
/// `warnings` instead of failing.
CleanDocument clean_document(const RawDocument& raw, const CleaningRules& rules,
                             std::vector<std::string>* warnings = nullptr);

/// Greedy packing: paragraphs are appended in order while the chunk estimate
/// stays within the budget; a paragraph that would overflow starts a new
/// chunk. A single paragraph over the budget stands alone, flagged oversized.
std::vector<Chunk> chunk_paragraphs(const CleanDocument& doc, int budget);

/// "absalom_jones" -> "Absalom Jones".
std::string title_from_doc_id(std::string_view doc_id);

/// Reads one UTF-8 plain-text file; doc_id = file name without extension.
RawDocument load_document(const std::filesystem::path& file);

} // namespace kgp::corpus
