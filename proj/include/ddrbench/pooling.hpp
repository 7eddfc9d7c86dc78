#pragma once

#include <cstddef>

#include "ddrbench/metric.hpp"

namespace ddrbench {

enum class PoolingMethod { kCentroid, kEos };

struct PooledVector {
  EmbeddingVector vector;
  PoolingMethod method;
};

/// Componentwise mean of the sequence's vectors.
PooledVector centroid(TokenEmbeddingSequence const& x);

/// Centroid over the sequence with one extra trailing vector (used when the
/// EOS state is counted as a token).
PooledVector centroid(TokenEmbeddingSequence const& x, EmbeddingVector const& extra);

PooledVector eos_vector(TokenEmbeddingSequence const& x, std::size_t eos_index);

}  // namespace ddrbench
