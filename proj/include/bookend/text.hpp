#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace bookend {

/// Corpus-wide word tokenizer: lowercase, split on whitespace, strip leading
/// and trailing ASCII punctuation from every piece, drop empty pieces.
std::vector<std::string> tokenize(std::string_view text);

/// Splits prose on '.', '!' or '?' followed by whitespace or end of text.
/// The terminator (and any closing quotes or brackets right after it) stays
/// with its sentence. Pieces are trimmed; empty pieces are dropped.
std::vector<std::string> split_sentences(std::string_view text);

std::string trim(std::string_view text);
std::string to_lower(std::string_view text);
bool is_terminator(char c) noexcept;

/// Number of non-overlapping occurrences of `needle` in `haystack`.
std::size_t count_occurrences(std::string_view haystack, std::string_view needle);

std::string join(const std::vector<std::string> &parts, std::string_view separator);

/// 64-bit FNV-1a. Stable across processes and platforms, unlike std::hash.
std::uint64_t stable_hash(std::string_view bytes, std::uint64_t seed = 0) noexcept;

} // namespace bookend
