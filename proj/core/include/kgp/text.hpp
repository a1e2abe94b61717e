#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// Small text primitives shared by cleaning, metrics and the local embedder.
// All metric-facing routines operate on Unicode scalar values; decoding is
// lenient (each invalid byte stands in for one codepoint).

namespace kgp::text {

std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(const std::u32string& s);

/// Number of Unicode scalar values in s.
std::size_t codepoint_count(std::string_view s);

/// ASCII-only lowercasing; non-ASCII codepoints pass through unchanged.
std::string ascii_lower(std::string_view s);

/// Strip leading/trailing ASCII whitespace.
std::string_view trim(std::string_view s);

/// Lowercase and split on non-alphanumerics, dropping empties. Bytes >= 0x80
/// count as token characters so multi-byte letters stay inside one token.
std::vector<std::string> tokenize(std::string_view s);

/// FNV-1a over the bytes of s.
std::uint64_t fnv1a64(std::string_view s);

} // namespace kgp::text
