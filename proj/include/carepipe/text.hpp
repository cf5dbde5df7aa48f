#pragma once
// Tokenization and string similarity shared by the parser and retrieval.
//
// One normalization everywhere: lowercase, strip punctuation, split on
// whitespace. Bytes >= 0x80 are kept verbatim so arbitrary UTF-8 input
// tokenizes without throwing.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace carepipe {

// Lowercased alnum tokens; apostrophes and other punctuation removed
// in place ("don't" -> "dont").
std::vector<std::string> tokenize(std::string_view text);

// Tokens rejoined with single spaces.
std::string normalize_text(std::string_view text);

std::size_t levenshtein(std::string_view a, std::string_view b);

// 1 - distance / max(len); two empty strings compare equal (1.0).
double normalized_similarity(std::string_view a, std::string_view b);

// True if `needle` (already normalized, possibly multi-word) occurs as a
// word-bounded phrase in `tokens`.
bool contains_phrase(const std::vector<std::string>& tokens, std::string_view needle);

// Number of word-bounded occurrences of the phrase in `tokens`.
std::size_t count_phrase(const std::vector<std::string>& tokens, std::string_view needle);

std::string to_lower(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace carepipe
