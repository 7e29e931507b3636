#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace ratas::text {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

/// Collapse whitespace runs to single spaces and trim the ends.
std::string collapse_ws(std::string_view s);

/// Lowercased alphanumeric runs of length >= 2. Bytes >= 0x80 count as word
/// characters so UTF-8 words survive intact.
std::vector<std::string> tokenize(std::string_view s);

/// Token set with common function words removed. Falls back to the raw
/// token set when filtering would leave nothing.
std::unordered_set<std::string> content_tokens(std::string_view s);

/// Fraction of `rule`'s content tokens that appear in `candidate`.
/// 0 when the rule yields no tokens.
double coverage(std::string_view rule, std::string_view candidate);

/// Split on sentence-ending punctuation (. ; ! ?) followed by whitespace or
/// end of text. Pieces keep their terminator and are trimmed.
std::vector<std::string> split_sentences(std::string_view s);

/// Split on blank lines. Paragraphs are trimmed; empty ones are dropped.
std::vector<std::string> split_paragraphs(std::string_view s);

/// True when `needle` occurs in `haystack` after whitespace collapsing on
/// both sides. Empty needles match.
bool contains_normalized(std::string_view haystack, std::string_view needle);

/// First `max_chars` bytes with a "..." suffix when truncated; never cuts a
/// UTF-8 sequence in half.
std::string excerpt(std::string_view s, std::size_t max_chars);

std::string format_fixed(double v, int decimals);

std::size_t count_words(std::string_view s);

} // namespace ratas::text
