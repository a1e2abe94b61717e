#include "kgp/tsv.hpp"

namespace kgp::tsv {

std::string escape_field(std::string_view field) {
    std::string out;
    out.reserve(field.size());
    for (char c : field) {
        switch (c) {
        case '\\':
            out += "\\\\";
            break;
        case '\t':
            out += "\\t";
            break;
        case '\n':
            out += "\\n";
            break;
        case '\r':
            out += "\\r";
            break;
        default:
            out.push_back(c);
        }
    }
    return out;
}

std::string unescape_field(std::string_view field) {
    std::string out;
    out.reserve(field.size());
    for (std::size_t i = 0; i < field.size(); ++i) {
        if (field[i] != '\\' || i + 1 >= field.size()) {
            out.push_back(field[i]);
            continue;
        }
        switch (field[++i]) {
        case '\\':
            out.push_back('\\');
            break;
        case 't':
            out.push_back('\t');
            break;
        case 'n':
            out.push_back('\n');
            break;
        case 'r':
            out.push_back('\r');
            break;
        default:
            // Unknown escape: keep both characters.
            out.push_back('\\');
            out.push_back(field[i]);
        }
    }
    return out;
}

std::vector<std::string> split_row(std::string_view line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == '\t') {
            fields.emplace_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return fields;
}

std::string join_row(const std::vector<std::string>& escaped_fields) {
    std::string out;
    for (std::size_t i = 0; i < escaped_fields.size(); ++i) {
        if (i > 0) {
            out.push_back('\t');
        }
        out += escaped_fields[i];
    }
    return out;
}

} // namespace kgp::tsv
