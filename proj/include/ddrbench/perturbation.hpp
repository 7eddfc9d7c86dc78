#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ddrbench {

class SourceExcerpt {
 public:
  SourceExcerpt(std::string id, std::string text);

  std::string const& id() const noexcept { return id_; }
  std::string const& text() const noexcept { return text_; }
  std::vector<std::string> const& words() const noexcept { return words_; }
  std::size_t word_count() const noexcept { return words_.size(); }

 private:
  std::string id_;
  std::string text_;
  std::vector<std::string> words_;
};

enum class SubstitutionKind { kSynonym, kRandom };

inline constexpr SubstitutionKind kAllKinds[] = {SubstitutionKind::kSynonym,
                                                 SubstitutionKind::kRandom};

std::string_view to_string(SubstitutionKind kind);
std::optional<SubstitutionKind> parse_kind(std::string_view name);

struct Variant {
  std::string source_id;
  int depth = 0;
  SubstitutionKind kind = SubstitutionKind::kSynonym;
  std::vector<std::size_t> replaced_positions;      // ascending word indices
  std::map<std::size_t, std::string> replacements;  // position -> new word (no punctuation)
  std::string text;
  std::uint64_t seed = 0;

  friend bool operator==(Variant const&, Variant const&) = default;
};

/// Synonym table plus the vocabulary that random substitutions draw from.
/// Keys and vocabulary entries are lowercase; lookups are case-insensitive.
class Lexicon {
 public:
  Lexicon(std::map<std::string, std::vector<std::string>> synonyms,
          std::vector<std::string> vocabulary);

  // `headword<TAB>syn1,syn2,...` per line; vocabulary one word per line.
  static Lexicon parse(std::istream& synonyms, std::istream& vocabulary);
  static Lexicon load(std::filesystem::path const& synonyms_path,
                      std::filesystem::path const& vocabulary_path);

  std::vector<std::string> const* synonyms_of(std::string_view word) const;
  std::map<std::string, std::vector<std::string>> const& synonyms() const noexcept {
    return synonyms_;
  }
  std::vector<std::string> const& vocabulary() const noexcept { return vocabulary_; }

 private:
  std::map<std::string, std::vector<std::string>> synonyms_;
  std::vector<std::string> vocabulary_;
};

inline constexpr int kMinDepth = 1;
inline constexpr int kMaxDepth = 3;
inline constexpr int kResampleBudget = 25;

/// Replaces exactly `depth` words. Positions are drawn from the seed alone,
/// so synonym and random variants built from the same seed edit the same
/// words whenever the synonym-eligible pool is large enough; the kind only
/// affects which replacement words are drawn.
Variant generate_variant(SourceExcerpt const& src, int depth, SubstitutionKind kind,
                         Lexicon const& lex, std::uint64_t seed);

/// Seed for one (depth, attempt) cell derived from an excerpt-level seed.
/// Attempt 0 is the first try; later attempts are resamples.
std::uint64_t variant_seed(std::uint64_t excerpt_seed, int depth, int attempt);

/// Excerpt-level seed derived from the run seed and the excerpt id, so that
/// the variants of one excerpt do not depend on dataset order.
std::uint64_t excerpt_seed(std::uint64_t run_seed, std::string_view source_id);

/// Six variants, ordered by depth then kind (synonym before random).
std::vector<Variant> generate_suite(SourceExcerpt const& src, Lexicon const& lex,
                                    std::uint64_t seed);

inline bool validate_token_length(std::size_t src_tokens, std::size_t variant_tokens) {
  return src_tokens == variant_tokens;
}

std::string variant_to_json_line(Variant const& v);

}  // namespace ddrbench
