#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ddrbench/perturbation.hpp"

namespace ddrbench::toy {

/// A small deterministic stand-in for a causal language model, used to build
/// fixture corpora and to exercise the provider protocol without model
/// weights.
///
/// Tokens: whitespace words, lowercased, with each edge punctuation mark as
/// its own token; words longer than `split_length` become two pieces.
/// Pre side: a lookup table, concept vector plus a word-specific offset.
/// Words listed together in a lexicon share a concept. Post side: a leaky
/// causal recurrence over the concept content with only a faint trace of the
/// word offset, squashed by tanh. The EOS state is one more step of the same
/// recurrence.
struct ToyModelConfig {
  std::size_t pre_dim = 32;
  std::size_t post_dim = 48;
  std::size_t split_length = 9;
  double word_offset = 0.8;   // weight of the word-specific part of a pre vector
  double word_leak = 0.12;    // how much of that part reaches the post side
  double decay = 0.7;         // recurrence memory
  double position_scale = 0.3;
  std::uint64_t seed = 20240917;
};

struct ToyEmbedding {
  std::vector<std::string> tokens;
  std::vector<std::vector<double>> pre;
  std::vector<std::vector<double>> post;
  std::vector<double> eos;
};

class ToyModel {
 public:
  ToyModel(ToyModelConfig config, Lexicon const* concepts);

  std::vector<std::string> tokenize(std::string_view text) const;
  ToyEmbedding embed(std::string_view text) const;

  /// JSON response body in the provider protocol.
  std::string respond(std::string_view text) const;

  std::string model_tag() const;
  static constexpr char kTokenizerTag[] = "toy-wordpiece-v1;pre=lookup-without-position";

 private:
  std::vector<double> gaussian(std::string_view label, std::size_t dim, double scale) const;
  std::string const& concept_of(std::string const& token) const;

  ToyModelConfig config_;
  std::map<std::string, std::string> concept_;  // word -> group representative
  std::vector<double> mix_concept_;             // post_dim x pre_dim
  std::vector<double> mix_word_;                // post_dim x pre_dim
};

}  // namespace ddrbench::toy
