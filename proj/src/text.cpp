#include "carepipe/text.hpp"

#include <algorithm>
#include <cctype>

namespace carepipe {

std::string to_lower(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (const char ch : s)
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    return out;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (const char ch : text) {
        const auto uc = static_cast<unsigned char>(ch);
        if (std::isalnum(uc) || uc >= 0x80) {
            cur.push_back(static_cast<char>(std::tolower(uc)));
        } else if (std::isspace(uc)) {
            if (!cur.empty()) {
                tokens.push_back(std::move(cur));
                cur.clear();
            }
        }
        // other punctuation: dropped, does not split the token
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

std::string normalize_text(std::string_view text) {
    return join(tokenize(text), " ");
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
    if (a.size() > b.size()) std::swap(a, b);
    std::vector<std::size_t> row(a.size() + 1);
    for (std::size_t i = 0; i <= a.size(); ++i) row[i] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
        std::size_t diag = row[0];
        row[0] = j;
        for (std::size_t i = 1; i <= a.size(); ++i) {
            const std::size_t saved = row[i];
            if (a[i - 1] == b[j - 1])
                row[i] = diag;
            else
                row[i] = std::min({row[i - 1], row[i], diag}) + 1;
            diag = saved;
        }
    }
    return row[a.size()];
}

double normalized_similarity(std::string_view a, std::string_view b) {
    const std::size_t longest = std::max(a.size(), b.size());
    if (longest == 0) return 1.0;
    return 1.0 - static_cast<double>(levenshtein(a, b)) / static_cast<double>(longest);
}

namespace {

std::vector<std::string> split_words(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (const char ch : s) {
        if (ch == ' ') {
            if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

}  // namespace

std::size_t count_phrase(const std::vector<std::string>& tokens, std::string_view needle) {
    const std::vector<std::string> words = split_words(needle);
    if (words.empty() || tokens.size() < words.size()) return 0;
    std::size_t count = 0;
    for (std::size_t i = 0; i + words.size() <= tokens.size(); ++i) {
        bool hit = true;
        for (std::size_t j = 0; j < words.size(); ++j) {
            if (tokens[i + j] != words[j]) {
                hit = false;
                break;
            }
        }
        if (hit) ++count;
    }
    return count;
}

bool contains_phrase(const std::vector<std::string>& tokens, std::string_view needle) {
    return count_phrase(tokens, needle) > 0;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out.append(sep);
        out.append(parts[i]);
    }
    return out;
}

}  // namespace carepipe
