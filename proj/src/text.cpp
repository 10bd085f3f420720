#include "storynet/text.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "storynet/error.hpp"

namespace storynet {

namespace detail {
extern const char* const kStopwordData;
}

namespace {

bool is_word_char(unsigned char c) { return std::isalnum(c) != 0; }

WordSet parse_word_list(std::istream& in) {
  WordSet words;
  std::string line;
  while (std::getline(in, line)) {
    auto entry = trim(line);
    if (entry.empty() || entry.front() == '#') continue;
    words.insert(to_lower(entry));
  }
  return words;
}

}  // namespace

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string trim(std::string_view s) {
  auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (std::size_t i = 0; i < text.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (is_word_char(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (c == '\'' && !current.empty() && i + 1 < text.size() &&
               is_word_char(static_cast<unsigned char>(text[i + 1]))) {
      continue;
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

bool contains_word(std::string_view text, std::string_view word) {
  auto needle = to_lower(word);
  for (const auto& token : tokenize(text)) {
    if (token == needle) return true;
  }
  return false;
}

const WordSet& default_stopwords() {
  static const WordSet words = [] {
    std::istringstream in(detail::kStopwordData);
    return parse_word_list(in);
  }();
  return words;
}

WordSet read_word_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingInput, path);
  return parse_word_list(in);
}

}  // namespace storynet
