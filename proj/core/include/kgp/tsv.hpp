#pragma once

#include <string>
#include <string_view>
#include <vector>

// Tab-separated rows with backslash escaping, applied symmetrically on write
// and read: `\` -> `\\`, tab -> `\t`, newline -> `\n`, carriage return -> `\r`.

namespace kgp::tsv {

std::string escape_field(std::string_view field);
std::string unescape_field(std::string_view field);

/// Split one line on raw (unescaped) tabs. Fields stay escaped.
std::vector<std::string> split_row(std::string_view line);

std::string join_row(const std::vector<std::string>& escaped_fields);

} // namespace kgp::tsv
