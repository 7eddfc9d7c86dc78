#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "ddrbench/metric.hpp"

namespace ddrbench {

/// One text embedded by a provider: aligned embedding-layer (pre) and
/// final-hidden-layer (post) token vectors, plus the EOS hidden state.
/// pre and post may have different dimensions but share the token count.
class EmbeddingPair {
 public:
  EmbeddingPair(std::string text_id, TokenEmbeddingSequence pre, TokenEmbeddingSequence post,
                EmbeddingVector eos, std::string model_tag);

  std::string const& text_id() const noexcept { return text_id_; }
  TokenEmbeddingSequence const& pre() const noexcept { return pre_; }
  TokenEmbeddingSequence const& post() const noexcept { return post_; }
  EmbeddingVector const& eos() const noexcept { return eos_; }
  std::size_t token_count() const noexcept { return pre_.length(); }
  std::string const& model_tag() const noexcept { return model_tag_; }

 private:
  std::string text_id_;
  TokenEmbeddingSequence pre_;
  TokenEmbeddingSequence post_;
  EmbeddingVector eos_;
  std::string model_tag_;
};

enum class Method { kDdr, kCentroidCosine, kEosCosine };

inline constexpr Method kAllMethods[] = {Method::kDdr, Method::kCentroidCosine, Method::kEosCosine};

std::string_view to_string(Method method);
std::optional<Method> parse_method(std::string_view name);

/// Larger value means more similar, for every method.
struct SimilarityScore {
  Method method;
  double value;
};

struct ScoringOptions {
  // Count the EOS state as one more token when averaging for the centroid.
  bool centroid_includes_eos = false;
};

/// Output distances below this are treated as a degenerate transform.
inline constexpr double kDdrDegenerateEpsilon = 1e-12;

/// Max chordal distance over the pre sequences divided by the same over the
/// post sequences.
SimilarityScore ddr_score(EmbeddingPair const& a, EmbeddingPair const& b);

SimilarityScore centroid_cosine_score(EmbeddingPair const& a, EmbeddingPair const& b,
                                      ScoringOptions const& options = {});

SimilarityScore eos_cosine_score(EmbeddingPair const& a, EmbeddingPair const& b);

SimilarityScore score(Method method, EmbeddingPair const& a, EmbeddingPair const& b,
                      ScoringOptions const& options = {});

}  // namespace ddrbench
