#include "bookend/text.hpp"
#include "bookend/error.hpp"

#include <algorithm>
#include <cctype>

namespace bookend {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::invalid_argument:
        return "invalid_argument";
    case ErrorCode::not_found:
        return "not_found";
    case ErrorCode::conflict:
        return "conflict";
    case ErrorCode::parse:
        return "parse";
    case ErrorCode::io:
        return "io";
    case ErrorCode::transport:
        return "transport";
    case ErrorCode::generation_failed:
        return "generation_failed";
    }
    return "unknown";
}

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }

// UTF-8 right double/single quotation marks: E2 80 9D / E2 80 99.
std::size_t utf8_closer_len(std::string_view text, std::size_t pos) {
    if (pos + 2 < text.size() && static_cast<unsigned char>(text[pos]) == 0xE2 &&
        static_cast<unsigned char>(text[pos + 1]) == 0x80) {
        auto third = static_cast<unsigned char>(text[pos + 2]);
        if (third == 0x9D || third == 0x99)
            return 3;
    }
    return 0;
}

} // namespace

bool is_terminator(char c) noexcept { return c == '.' || c == '!' || c == '?'; }

std::string trim(std::string_view text) {
    std::size_t b = 0;
    std::size_t e = text.size();
    while (b < e && is_space(text[b]))
        ++b;
    while (e > b && is_space(text[e - 1]))
        --e;
    return std::string(text.substr(b, e - b));
}

std::string to_lower(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_space(text[i]))
            ++i;
        std::size_t start = i;
        while (i < text.size() && !is_space(text[i]))
            ++i;
        std::string_view piece = text.substr(start, i - start);
        while (!piece.empty() && is_punct(piece.front()))
            piece.remove_prefix(1);
        while (!piece.empty() && is_punct(piece.back()))
            piece.remove_suffix(1);
        if (!piece.empty())
            tokens.push_back(to_lower(piece));
    }
    return tokens;
}

std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> out;
    std::size_t begin = 0;
    std::size_t i = 0;
    auto emit = [&](std::size_t end) {
        std::string piece = trim(text.substr(begin, end - begin));
        if (!piece.empty())
            out.push_back(std::move(piece));
        begin = end;
    };
    while (i < text.size()) {
        if (!is_terminator(text[i])) {
            ++i;
            continue;
        }
        std::size_t end = i + 1;
        for (;;) {
            if (end < text.size() && (is_terminator(text[end]) || is_closer(text[end]))) {
                ++end;
            } else if (std::size_t n = utf8_closer_len(text, end); n > 0) {
                end += n;
            } else {
                break;
            }
        }
        if (end == text.size() || is_space(text[end]))
            emit(end);
        i = end;
    }
    emit(text.size());
    return out;
}

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
    if (needle.empty())
        return 0;
    std::size_t count = 0;
    for (std::size_t pos = haystack.find(needle); pos != std::string_view::npos;
         pos = haystack.find(needle, pos + needle.size()))
        ++count;
    return count;
}

std::string join(const std::vector<std::string> &parts, std::string_view separator) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0)
            out += separator;
        out += parts[i];
    }
    return out;
}

std::uint64_t stable_hash(std::string_view bytes, std::uint64_t seed) noexcept {
    std::uint64_t h = 14695981039346656037ULL ^ (seed * 0x9E3779B97F4A7C15ULL);
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

} // namespace bookend
