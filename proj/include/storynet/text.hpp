#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace storynet {

using WordSet = std::set<std::string>;

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

// Lowercased alphanumeric runs; apostrophes inside a word are dropped ("lennie's" -> "lennies").
std::vector<std::string> tokenize(std::string_view text);

bool contains_word(std::string_view text, std::string_view word);

// Built-in English function-word list used when no --stopwords file is given.
const WordSet& default_stopwords();

// One entry per line, blank lines and '#' comments ignored, entries lowercased.
WordSet read_word_list(const std::string& path);

}  // namespace storynet
