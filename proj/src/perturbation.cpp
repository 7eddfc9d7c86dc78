#include "ddrbench/perturbation.hpp"

#include <algorithm>
#include <fstream>
#include "json.hpp"
#include <set>
#include <sstream>

#include "ddrbench/error.hpp"
#include "ddrbench/hashing.hpp"
#include "ddrbench/random.hpp"
#include "ddrbench/text.hpp"

namespace ddrbench {

SourceExcerpt::SourceExcerpt(std::string id, std::string text)
    : id_(std::move(id)), text_(std::move(text)), words_(text::split_whitespace(text_)) {
  if (id_.empty()) fail(ErrorCode::kInvalidArgument, "excerpt id is empty");
  if (words_.empty()) fail(ErrorCode::kEmptyInput, "excerpt '" + id_ + "' has no words");
}

std::string_view to_string(SubstitutionKind kind) {
  return kind == SubstitutionKind::kSynonym ? "synonym" : "random";
}

std::optional<SubstitutionKind> parse_kind(std::string_view name) {
  if (name == "synonym") return SubstitutionKind::kSynonym;
  if (name == "random") return SubstitutionKind::kRandom;
  return std::nullopt;
}

namespace {

bool is_single_word(std::string_view w) {
  return !w.empty() && text::split_whitespace(w).size() == 1 && w.find_first_of(" \t") == w.npos;
}

std::string trim(std::string_view s) {
  auto const words = text::split_whitespace(s);
  return words.empty() ? std::string() : text::join(words);
}

}  // namespace

Lexicon::Lexicon(std::map<std::string, std::vector<std::string>> synonyms,
                 std::vector<std::string> vocabulary) {
  for (auto& [head, candidates] : synonyms) {
    std::string const key = text::to_lower(head);
    auto& out = synonyms_[key];
    for (auto const& c : candidates) {
      std::string const word = text::to_lower(c);
      if (!is_single_word(word)) {
        fail(ErrorCode::kFormat, "synonym '" + c + "' of '" + head + "' is not a single word");
      }
      if (word == key || std::find(out.begin(), out.end(), word) != out.end()) continue;
      out.push_back(word);
    }
  }
  std::erase_if(synonyms_, [](auto const& entry) { return entry.second.empty(); });

  std::set<std::string> seen;
  for (auto const& v : vocabulary) {
    std::string const word = text::to_lower(v);
    if (!is_single_word(word)) fail(ErrorCode::kFormat, "vocabulary entry '" + v + "' is not a single word");
    if (seen.insert(word).second) vocabulary_.push_back(word);
  }
}

Lexicon Lexicon::parse(std::istream& synonyms, std::istream& vocabulary) {
  std::map<std::string, std::vector<std::string>> table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(synonyms, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || trim(line).front() == '#') continue;
    auto const tab = line.find('\t');
    if (tab == std::string::npos) {
      fail(ErrorCode::kFormat, "lexicon line " + std::to_string(line_no) + " has no tab separator");
    }
    std::string const head = trim(line.substr(0, tab));
    if (head.empty()) fail(ErrorCode::kFormat, "lexicon line " + std::to_string(line_no) + " has an empty headword");
    auto& list = table[head];
    std::stringstream rest(line.substr(tab + 1));
    std::string item;
    while (std::getline(rest, item, ',')) {
      item = trim(item);
      if (!item.empty()) list.push_back(item);
    }
  }
  std::vector<std::string> vocab;
  while (std::getline(vocabulary, line)) {
    line = trim(line);
    if (!line.empty() && line.front() != '#') vocab.push_back(line);
  }
  return Lexicon(std::move(table), std::move(vocab));
}

Lexicon Lexicon::load(std::filesystem::path const& synonyms_path,
                      std::filesystem::path const& vocabulary_path) {
  std::ifstream syn(synonyms_path);
  if (!syn) fail(ErrorCode::kIo, "cannot open lexicon " + synonyms_path.string());
  std::ifstream voc(vocabulary_path);
  if (!voc) fail(ErrorCode::kIo, "cannot open vocabulary " + vocabulary_path.string());
  return parse(syn, voc);
}

std::vector<std::string> const* Lexicon::synonyms_of(std::string_view word) const {
  auto const it = synonyms_.find(text::to_lower(word));
  return it == synonyms_.end() ? nullptr : &it->second;
}

namespace {

constexpr std::uint64_t kPositionStream = 0x706f736974696f6eULL;
constexpr std::uint64_t kReplacementStream = 0x7265706c61636500ULL;

// First `count` entries of a seeded partial Fisher-Yates shuffle.
std::vector<std::size_t> draw_positions(std::vector<std::size_t> pool, std::size_t count, Rng& rng) {
  for (std::size_t k = 0; k < count; ++k) {
    auto const pick = k + rng.uniform_index(pool.size() - k);
    std::swap(pool[k], pool[pick]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

std::string describe_positions(std::vector<std::size_t> const& positions) {
  std::string out;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (i > 0) out += ",";
    out += std::to_string(positions[i]);
  }
  return out;
}

}  // namespace

Variant generate_variant(SourceExcerpt const& src, int depth, SubstitutionKind kind,
                         Lexicon const& lex, std::uint64_t seed) {
  if (depth < kMinDepth || depth > kMaxDepth) {
    fail(ErrorCode::kInvalidArgument, "edit depth must be in [1, 3], got " + std::to_string(depth));
  }
  auto const want = static_cast<std::size_t>(depth);

  std::vector<text::WordParts> parts;
  parts.reserve(src.word_count());
  std::vector<std::size_t> eligible;   // words with synonym candidates
  std::vector<std::size_t> wordlike;   // words with a non-punctuation core
  std::vector<std::size_t> uncovered;  // wordlike but no synonyms
  for (std::size_t i = 0; i < src.word_count(); ++i) {
    parts.push_back(text::split_word(src.words()[i]));
    if (parts.back().core.empty()) continue;
    wordlike.push_back(i);
    (lex.synonyms_of(parts.back().core) != nullptr ? eligible : uncovered).push_back(i);
  }

  std::vector<std::size_t> pool;
  if (eligible.size() >= want) {
    pool = eligible;
  } else if (kind == SubstitutionKind::kSynonym) {
    fail(ErrorCode::kInsufficientCoverage,
         "excerpt '" + src.id() + "' has " + std::to_string(eligible.size()) +
             " words with synonyms, depth " + std::to_string(depth) +
             " needs more; positions without candidates: " + describe_positions(uncovered));
  } else if (wordlike.size() >= want) {
    pool = wordlike;
  } else {
    fail(ErrorCode::kInsufficientCoverage, "excerpt '" + src.id() + "' has only " +
                                               std::to_string(wordlike.size()) + " words");
  }

  Rng position_rng(derive_seed({seed, kPositionStream}));
  auto const positions = draw_positions(std::move(pool), want, position_rng);

  Rng replacement_rng(derive_seed({seed, kReplacementStream, static_cast<std::uint64_t>(kind)}));
  Variant v;
  v.source_id = src.id();
  v.depth = depth;
  v.kind = kind;
  v.replaced_positions = positions;
  v.seed = seed;
  std::vector<std::string> words = src.words();
  for (std::size_t pos : positions) {
    auto const& original = parts[pos];
    std::string chosen;
    if (kind == SubstitutionKind::kSynonym) {
      auto const& candidates = *lex.synonyms_of(original.core);
      chosen = candidates[replacement_rng.uniform_index(candidates.size())];
    } else {
      std::vector<std::string const*> candidates;
      candidates.reserve(lex.vocabulary().size());
      for (auto const& w : lex.vocabulary()) {
        if (!text::iequals(w, original.core)) candidates.push_back(&w);
      }
      if (candidates.empty()) {
        fail(ErrorCode::kInvalidArgument,
             "empty vocabulary: no random replacement for '" + original.core + "'");
      }
      chosen = *candidates[replacement_rng.uniform_index(candidates.size())];
    }
    chosen = text::match_case(original.core, chosen);
    words[pos] = original.prefix + chosen + original.suffix;
    v.replacements.emplace(pos, std::move(chosen));
  }
  v.text = text::join(words);
  return v;
}

std::uint64_t variant_seed(std::uint64_t excerpt_seed, int depth, int attempt) {
  return derive_seed({excerpt_seed, static_cast<std::uint64_t>(depth),
                      static_cast<std::uint64_t>(attempt)});
}

std::uint64_t excerpt_seed(std::uint64_t run_seed, std::string_view source_id) {
  return derive_seed({run_seed, sha256_prefix64(source_id)});
}

std::vector<Variant> generate_suite(SourceExcerpt const& src, Lexicon const& lex,
                                    std::uint64_t seed) {
  std::vector<Variant> suite;
  suite.reserve(6);
  for (int depth = kMinDepth; depth <= kMaxDepth; ++depth) {
    for (auto kind : kAllKinds) {
      try {
        suite.push_back(generate_variant(src, depth, kind, lex, variant_seed(seed, depth, 0)));
      } catch (Error const& e) {
        throw Error(e.code(), "suite for '" + src.id() + "' failed at depth " +
                                  std::to_string(depth) + ", " + std::string(to_string(kind)) +
                                  ": " + e.what());
      }
    }
  }
  return suite;
}

std::string variant_to_json_line(Variant const& v) {
  nlohmann::ordered_json j;
  j["source_id"] = v.source_id;
  j["depth"] = v.depth;
  j["kind"] = to_string(v.kind);
  j["replaced_positions"] = v.replaced_positions;
  auto& reps = j["replacements"] = nlohmann::ordered_json::object();
  for (auto const& [pos, word] : v.replacements) reps[std::to_string(pos)] = word;
  j["text"] = v.text;
  j["seed"] = v.seed;
  return j.dump();
}

}  // namespace ddrbench
