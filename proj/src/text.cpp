#include "guardrec/text.hpp"

#include <cctype>
#include <unordered_set>

namespace guardrec {

namespace {

const std::unordered_set<std::string>& stop_words() {
    static const std::unordered_set<std::string> words = {
        "a",    "an",   "and",  "are",  "as",   "at",    "be",    "but",  "by",   "for",
        "from", "had",  "has",  "have", "he",   "her",   "his",   "i",    "if",   "in",
        "is",   "it",   "its",  "me",   "my",   "no",    "not",   "of",   "on",   "or",
        "our",  "she",  "so",   "that", "the",  "their", "them",  "then", "there", "they",
        "this", "to",   "was",  "we",   "were", "what",  "when",  "who",  "will",  "with",
        "you",  "your", "rt",   "via"};
    return words;
}

bool starts_url(const std::string& text, std::size_t pos) {
    static const char* prefixes[] = {"http://", "https://", "www."};
    for (const char* p : prefixes) {
        std::size_t len = std::char_traits<char>::length(p);
        if (text.compare(pos, len, p) == 0) return true;
    }
    return false;
}

}  // namespace

bool is_stop_word(const std::string& token) { return stop_words().count(token) > 0; }

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string cur;
    std::size_t i = 0;
    while (i < text.size()) {
        if (starts_url(text, i)) {
            // skip to whitespace
            while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
            continue;
        }
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (std::isalnum(c)) {
            cur += static_cast<char>(std::tolower(c));
        } else if (!cur.empty()) {
            if (cur.size() >= 2 && !is_stop_word(cur)) tokens.push_back(cur);
            cur.clear();
        }
        ++i;
    }
    if (cur.size() >= 2 && !is_stop_word(cur)) tokens.push_back(cur);
    return tokens;
}

}  // namespace guardrec
