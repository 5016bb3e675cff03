#pragma once

#include <string>
#include <vector>

namespace guardrec {

// Lowercases, strips URLs and punctuation, drops stop words and single
// characters. Shared by the similarity and analytics paths.
std::vector<std::string> tokenize(const std::string& text);

bool is_stop_word(const std::string& token);

}  // namespace guardrec
