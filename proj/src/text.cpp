#include "ratas/text.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

namespace ratas::text {

namespace {

bool is_space(unsigned char c) { return std::isspace(c) != 0; }

bool is_word_byte(unsigned char c) { return std::isalnum(c) != 0 || c >= 0x80; }

const std::unordered_set<std::string>& stopwords() {
    static const std::unordered_set<std::string> words = {
        "a",  "an",  "and",  "are",   "as",   "at",   "be",   "by",   "can",
        "for", "in",  "is",   "it",    "its",  "may",  "must", "of",   "on",
        "or",  "shall", "should", "that", "the", "these", "this", "those",
        "to",  "will", "with"};
    return words;
}

} // namespace

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && is_space(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string collapse_ws(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool in_ws = true; // swallow leading whitespace
    for (char ch : s) {
        if (is_space(static_cast<unsigned char>(ch))) {
            if (!in_ws) out.push_back(' ');
            in_ws = true;
        } else {
            out.push_back(ch);
            in_ws = false;
        }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

std::vector<std::string> tokenize(std::string_view s) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char ch : s) {
        if (is_word_byte(static_cast<unsigned char>(ch))) {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        } else if (!cur.empty()) {
            if (cur.size() >= 2) tokens.push_back(cur);
            cur.clear();
        }
    }
    if (cur.size() >= 2) tokens.push_back(cur);
    return tokens;
}

std::unordered_set<std::string> content_tokens(std::string_view s) {
    auto all = tokenize(s);
    std::unordered_set<std::string> filtered;
    for (const auto& t : all) {
        if (!stopwords().count(t)) filtered.insert(t);
    }
    if (filtered.empty()) filtered.insert(all.begin(), all.end());
    return filtered;
}

double coverage(std::string_view rule, std::string_view candidate) {
    auto rule_tokens = content_tokens(rule);
    if (rule_tokens.empty()) return 0.0;
    auto cand = tokenize(candidate);
    std::unordered_set<std::string> cand_set(cand.begin(), cand.end());
    std::size_t hit = 0;
    for (const auto& t : rule_tokens) {
        if (cand_set.count(t)) ++hit;
    }
    return static_cast<double>(hit) / static_cast<double>(rule_tokens.size());
}

std::vector<std::string> split_sentences(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        bool terminator = (c == '.' || c == ';' || c == '!' || c == '?');
        bool boundary = terminator &&
                        (i + 1 == s.size() || is_space(static_cast<unsigned char>(s[i + 1])));
        if (boundary) {
            std::string piece = trim(s.substr(start, i - start + 1));
            if (!piece.empty()) out.push_back(piece);
            start = i + 1;
        }
    }
    if (start < s.size()) {
        std::string piece = trim(s.substr(start));
        if (!piece.empty()) out.push_back(piece);
    }
    return out;
}

std::vector<std::string> split_paragraphs(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    std::size_t i = 0;
    auto flush = [&] {
        std::string p = trim(cur);
        if (!p.empty()) out.push_back(p);
        cur.clear();
    };
    while (i < s.size()) {
        // A newline followed by an all-whitespace line ends the paragraph.
        if (s[i] == '\n') {
            std::size_t j = i + 1;
            while (j < s.size() && (s[j] == ' ' || s[j] == '\t' || s[j] == '\r')) ++j;
            if (j < s.size() && s[j] == '\n') {
                flush();
                i = j + 1;
                continue;
            }
        }
        cur.push_back(s[i]);
        ++i;
    }
    flush();
    return out;
}

bool contains_normalized(std::string_view haystack, std::string_view needle) {
    std::string n = collapse_ws(needle);
    if (n.empty()) return true;
    return collapse_ws(haystack).find(n) != std::string::npos;
}

std::string excerpt(std::string_view s, std::size_t max_chars) {
    if (s.size() <= max_chars) return std::string(s);
    std::size_t cut = max_chars > 3 ? max_chars - 3 : 0;
    while (cut > 0 && (static_cast<unsigned char>(s[cut]) & 0xC0) == 0x80) --cut;
    return std::string(s.substr(0, cut)) + "...";
}

std::string format_fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

std::size_t count_words(std::string_view s) {
    std::size_t count = 0;
    bool in_word = false;
    for (char ch : s) {
        if (is_space(static_cast<unsigned char>(ch))) {
            in_word = false;
        } else if (!in_word) {
            ++count;
            in_word = true;
        }
    }
    return count;
}

} // namespace ratas::text
