#include "ddrbench/text.hpp"

#include <cctype>

namespace ddrbench::text {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }
bool is_upper(char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; }
bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }
char upper(char c) { return static_cast<char>(std::toupper(static_cast<unsigned char>(c))); }

}  // namespace

std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t const start = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    if (i > start) words.emplace_back(s.substr(start, i - start));
  }
  return words;
}

std::string join(std::vector<std::string> const& words, std::string_view separator) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i > 0) out += separator;
    out += words[i];
  }
  return out;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = lower(c);
  return out;
}

WordParts split_word(std::string_view word) {
  std::size_t begin = 0;
  std::size_t end = word.size();
  while (begin < end && is_punct(word[begin])) ++begin;
  while (end > begin && is_punct(word[end - 1])) --end;
  return WordParts{std::string(word.substr(0, begin)), std::string(word.substr(begin, end - begin)),
                   std::string(word.substr(end))};
}

std::string match_case(std::string_view original, std::string_view replacement) {
  std::string out = to_lower(replacement);
  std::size_t letters = 0, capitals = 0;
  for (char c : original) {
    if (is_alpha(c)) {
      ++letters;
      if (is_upper(c)) ++capitals;
    }
  }
  if (letters > 1 && capitals == letters) {
    for (char& c : out) c = upper(c);
  } else if (!original.empty() && is_upper(original.front()) && !out.empty()) {
    out.front() = upper(out.front());
  }
  return out;
}

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (lower(a[i]) != lower(b[i])) return false;
  }
  return true;
}

}  // namespace ddrbench::text
