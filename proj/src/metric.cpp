#include "ddrbench/metric.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ddrbench/error.hpp"

namespace ddrbench {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch: return "dimension mismatch";
    case ErrorCode::kZeroNorm: return "zero-norm vector";
    case ErrorCode::kNonFinite: return "non-finite value";
    case ErrorCode::kLengthMismatch: return "length mismatch";
    case ErrorCode::kEmptyInput: return "empty input";
    case ErrorCode::kIndexOutOfRange: return "index out of range";
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kUndefined: return "undefined";
    case ErrorCode::kDegenerate: return "degenerate";
    case ErrorCode::kInsufficientCoverage: return "insufficient synonym coverage";
    case ErrorCode::kIo: return "i/o error";
    case ErrorCode::kFormat: return "format error";
    case ErrorCode::kVersionMismatch: return "version mismatch";
    case ErrorCode::kTransport: return "transport failure";
    case ErrorCode::kMalformedResponse: return "malformed response";
    case ErrorCode::kProviderInconsistency: return "provider inconsistency";
    case ErrorCode::kNotFound: return "not found";
    case ErrorCode::kHashMismatch: return "hash mismatch";
    case ErrorCode::kConfig: return "configuration error";
    case ErrorCode::kInternal: return "internal error";
  }
  return "unknown";
}

EmbeddingVector::EmbeddingVector(std::vector<double> components)
    : components_(std::move(components)) {
  if (components_.empty()) {
    fail(ErrorCode::kEmptyInput, "embedding vector must have dimension >= 1");
  }
  for (std::size_t i = 0; i < components_.size(); ++i) {
    if (!std::isfinite(components_[i])) {
      fail(ErrorCode::kNonFinite,
           "embedding component " + std::to_string(i) + " is not finite");
    }
  }
}

TokenEmbeddingSequence::TokenEmbeddingSequence(std::vector<EmbeddingVector> vectors)
    : vectors_(std::move(vectors)) {
  if (vectors_.empty()) {
    fail(ErrorCode::kEmptyInput, "token embedding sequence is empty");
  }
  auto const dim = vectors_.front().dimension();
  for (std::size_t i = 1; i < vectors_.size(); ++i) {
    if (vectors_[i].dimension() != dim) {
      fail(ErrorCode::kDimensionMismatch,
           "token " + std::to_string(i) + " has dimension " +
               std::to_string(vectors_[i].dimension()) + ", expected " +
               std::to_string(dim));
    }
  }
}

double cosine_similarity(EmbeddingVector const& u, EmbeddingVector const& v) {
  if (u.dimension() != v.dimension()) {
    fail(ErrorCode::kDimensionMismatch,
         "cosine of vectors with dimensions " + std::to_string(u.dimension()) +
             " and " + std::to_string(v.dimension()));
  }
  long double dot = 0, uu = 0, vv = 0;
  auto const a = u.components();
  auto const b = v.components();
  for (std::size_t i = 0; i < a.size(); ++i) {
    long double const x = a[i];
    long double const y = b[i];
    dot += x * y;
    uu += x * x;
    vv += y * y;
  }
  if (uu == 0) fail(ErrorCode::kZeroNorm, "first vector has zero norm");
  if (vv == 0) fail(ErrorCode::kZeroNorm, "second vector has zero norm");
  auto const s = static_cast<double>(dot / (std::sqrt(uu) * std::sqrt(vv)));
  return std::clamp(s, -1.0, 1.0);
}

double cosine_distance(EmbeddingVector const& u, EmbeddingVector const& v) {
  return 1.0 - cosine_similarity(u, v);
}

double chordal_distance(EmbeddingVector const& u, EmbeddingVector const& v) {
  return std::sqrt(2.0 * (1.0 - cosine_similarity(u, v)));
}

double sequence_max_distance(TokenEmbeddingSequence const& x,
                             TokenEmbeddingSequence const& y) {
  if (x.length() != y.length()) {
    fail(ErrorCode::kLengthMismatch,
         "sequences have lengths " + std::to_string(x.length()) + " and " +
             std::to_string(y.length()));
  }
  double best = 0.0;
  for (std::size_t i = 0; i < x.length(); ++i) {
    try {
      best = std::max(best, chordal_distance(x[i], y[i]));
    } catch (Error const& e) {
      throw Error(e.code(), "position " + std::to_string(i) + ": " + e.what());
    }
  }
  return best;
}

}  // namespace ddrbench
