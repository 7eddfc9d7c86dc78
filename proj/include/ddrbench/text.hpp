#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ddrbench::text {

std::vector<std::string> split_whitespace(std::string_view s);
std::string join(std::vector<std::string> const& words, std::string_view separator = " ");

// ASCII-only case folding; other bytes (UTF-8 continuation etc.) pass through.
std::string to_lower(std::string_view s);

/// A surface word split into leading punctuation, the matchable core and
/// trailing punctuation: "(good," -> {"(", "good", ","}.
struct WordParts {
  std::string prefix;
  std::string core;
  std::string suffix;
};

WordParts split_word(std::string_view word);

/// Returns `replacement` recased to follow `original`: all-caps stays
/// all-caps, an initial capital is kept, anything else is lowercased.
std::string match_case(std::string_view original, std::string_view replacement);

bool iequals(std::string_view a, std::string_view b);

}  // namespace ddrbench::text
