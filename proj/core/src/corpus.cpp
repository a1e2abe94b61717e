#include "kgp/corpus.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "kgp/errors.hpp"
#include "kgp/text.hpp"

namespace kgp::corpus {

namespace {

bool is_header_line(std::string_view line) {
    const std::string_view t = text::trim(line);
    return t.size() >= 4 && t.starts_with("==") && t.ends_with("==");
}

std::string strip_citation_markers(std::string_view line) {
    std::string out;
    out.reserve(line.size());
    std::size_t i = 0;
    while (i < line.size()) {
        if (line[i] == '[') {
            std::size_t j = i + 1;
            while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) {
                ++j;
            }
            if (j > i + 1 && j < line.size() && line[j] == ']') {
                i = j + 1;
                continue;
            }
        }
        out.push_back(line[i]);
        ++i;
    }
    return out;
}

// Removes every {{Infobox ...}} block by balanced double-brace matching.
// An unclosed block is dropped to end-of-input with a warning.
std::string strip_infobox_blocks(std::string_view body, const std::string& doc_id,
                                 std::vector<std::string>* warnings) {
    const std::string lower = text::ascii_lower(body);
    std::string out;
    out.reserve(body.size());
    std::size_t i = 0;
    while (i < body.size()) {
        if (lower.compare(i, 9, "{{infobox") == 0) {
            int depth = 0;
            std::size_t j = i;
            while (j + 1 < body.size()) {
                if (body[j] == '{' && body[j + 1] == '{') {
                    ++depth;
                    j += 2;
                } else if (body[j] == '}' && body[j + 1] == '}') {
                    --depth;
                    j += 2;
                    if (depth == 0) {
                        break;
                    }
                } else {
                    ++j;
                }
            }
            if (depth != 0) {
                if (warnings != nullptr) {
                    warnings->push_back(doc_id + ": unclosed {{ block, dropped to end of input");
                }
                return out;
            }
            i = j;
            continue;
        }
        out.push_back(body[i]);
        ++i;
    }
    return out;
}

} // namespace

int estimate_tokens(std::string_view text_in) {
    const std::size_t n = text::codepoint_count(text_in);
    return static_cast<int>((n + 3) / 4);
}

CleanDocument clean_document(const RawDocument& raw, const CleaningRules& rules,
                             std::vector<std::string>* warnings) {
    std::string body = raw.body;
    if (rules.strip_infoboxes) {
        body = strip_infobox_blocks(body, raw.doc_id, warnings);
    }

    CleanDocument doc;
    doc.doc_id = raw.doc_id;

    std::string paragraph;
    auto flush = [&] {
        while (!paragraph.empty() && paragraph.back() == '\n') {
            paragraph.pop_back();
        }
        if (!paragraph.empty()) {
            doc.paragraphs.push_back(paragraph);
        }
        paragraph.clear();
    };

    std::istringstream lines(body);
    std::string line;
    while (std::getline(lines, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (rules.strip_headers && is_header_line(line)) {
            continue;
        }
        if (rules.strip_citations) {
            line = strip_citation_markers(line);
        }
        if (text::trim(line).empty()) {
            flush();
        } else {
            paragraph += line;
            paragraph.push_back('\n');
        }
    }
    flush();
    return doc;
}

std::vector<Chunk> chunk_paragraphs(const CleanDocument& doc, int budget) {
    if (budget < 1) {
        throw std::invalid_argument("chunk budget must be >= 1");
    }

    std::vector<Chunk> chunks;
    std::string cur_text;
    int cur_estimate = 0;

    auto emit = [&](bool oversized) {
        if (cur_text.empty()) {
            return;
        }
        Chunk c;
        c.doc_id = doc.doc_id;
        c.index = static_cast<int>(chunks.size());
        c.text = std::move(cur_text);
        c.token_estimate = cur_estimate;
        c.oversized = oversized;
        chunks.push_back(std::move(c));
        cur_text.clear();
        cur_estimate = 0;
    };

    for (const std::string& p : doc.paragraphs) {
        const int pe = estimate_tokens(p);
        if (pe > budget) {
            emit(false);
            cur_text = p;
            cur_estimate = pe;
            emit(true);
            continue;
        }
        if (!cur_text.empty() && cur_estimate + pe > budget) {
            emit(false);
        }
        if (!cur_text.empty()) {
            cur_text += kChunkJoiner;
        }
        cur_text += p;
        cur_estimate += pe;
    }
    emit(false);
    return chunks;
}

std::string title_from_doc_id(std::string_view doc_id) {
    std::string title;
    bool word_start = true;
    for (char c : doc_id) {
        if (c == '_') {
            title.push_back(' ');
            word_start = true;
        } else {
            title.push_back(word_start && c >= 'a' && c <= 'z' ? static_cast<char>(c - 'a' + 'A')
                                                               : c);
            word_start = false;
        }
    }
    return title;
}

RawDocument load_document(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw Error("cannot read document file: " + file.string());
    }
    std::ostringstream body;
    body << in.rdbuf();
    RawDocument doc;
    doc.doc_id = file.stem().string();
    doc.title = title_from_doc_id(doc.doc_id);
    doc.body = body.str();
    return doc;
}

} // namespace kgp::corpus
