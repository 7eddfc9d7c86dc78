#include "ddrbench/ddr.hpp"

#include <sstream>

#include "ddrbench/error.hpp"
#include "ddrbench/pooling.hpp"

namespace ddrbench {

EmbeddingPair::EmbeddingPair(std::string text_id, TokenEmbeddingSequence pre,
                             TokenEmbeddingSequence post, EmbeddingVector eos,
                             std::string model_tag)
    : text_id_(std::move(text_id)),
      pre_(std::move(pre)),
      post_(std::move(post)),
      eos_(std::move(eos)),
      model_tag_(std::move(model_tag)) {
  if (pre_.length() != post_.length()) {
    fail(ErrorCode::kLengthMismatch, "pair '" + text_id_ + "' has " +
                                         std::to_string(pre_.length()) + " pre and " +
                                         std::to_string(post_.length()) + " post vectors");
  }
  if (eos_.dimension() != post_.dimension()) {
    fail(ErrorCode::kDimensionMismatch, "pair '" + text_id_ + "' eos dimension " +
                                            std::to_string(eos_.dimension()) +
                                            " differs from post dimension " +
                                            std::to_string(post_.dimension()));
  }
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kDdr: return "ddr";
    case Method::kCentroidCosine: return "centroid_cosine";
    case Method::kEosCosine: return "eos_cosine";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view name) {
  for (Method m : kAllMethods) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

namespace {

void require_same_model(EmbeddingPair const& a, EmbeddingPair const& b) {
  if (a.model_tag() != b.model_tag()) {
    fail(ErrorCode::kInvalidArgument, "pairs come from different models: '" + a.model_tag() +
                                          "' vs '" + b.model_tag() + "'");
  }
}

}  // namespace

SimilarityScore ddr_score(EmbeddingPair const& a, EmbeddingPair const& b) {
  require_same_model(a, b);
  if (a.token_count() != b.token_count()) {
    fail(ErrorCode::kLengthMismatch, "DDR needs equal token counts, got " +
                                         std::to_string(a.token_count()) + " and " +
                                         std::to_string(b.token_count()));
  }
  double const d_in = sequence_max_distance(a.pre(), b.pre());
  if (d_in == 0.0) {
    fail(ErrorCode::kUndefined, "DDR undefined: pre sequences of '" + a.text_id() + "' and '" +
                                    b.text_id() + "' are identical");
  }
  double const d_out = sequence_max_distance(a.post(), b.post());
  if (d_out < kDdrDegenerateEpsilon) {
    std::ostringstream os;
    os.precision(17);
    os << "DDR degenerate: output distance " << d_out << " below " << kDdrDegenerateEpsilon
       << " while input distance is " << d_in << " ('" << a.text_id() << "' vs '" << b.text_id()
       << "')";
    fail(ErrorCode::kDegenerate, os.str());
  }
  return SimilarityScore{Method::kDdr, d_in / d_out};
}

SimilarityScore centroid_cosine_score(EmbeddingPair const& a, EmbeddingPair const& b,
                                      ScoringOptions const& options) {
  auto pool = [&](EmbeddingPair const& p) {
    return options.centroid_includes_eos ? centroid(p.post(), p.eos()) : centroid(p.post());
  };
  return SimilarityScore{Method::kCentroidCosine, cosine_similarity(pool(a).vector, pool(b).vector)};
}

SimilarityScore eos_cosine_score(EmbeddingPair const& a, EmbeddingPair const& b) {
  return SimilarityScore{Method::kEosCosine, cosine_similarity(a.eos(), b.eos())};
}

SimilarityScore score(Method method, EmbeddingPair const& a, EmbeddingPair const& b,
                      ScoringOptions const& options) {
  try {
    switch (method) {
      case Method::kDdr: return ddr_score(a, b);
      case Method::kCentroidCosine: return centroid_cosine_score(a, b, options);
      case Method::kEosCosine: return eos_cosine_score(a, b);
    }
  } catch (Error const& e) {
    throw Error(e.code(), std::string(to_string(method)) + ": " + e.what());
  }
  fail(ErrorCode::kInvalidArgument, "unknown scoring method");
}

}  // namespace ddrbench
