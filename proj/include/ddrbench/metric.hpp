#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ddrbench {

/// A finite, nonempty real vector. Construction validates the invariants,
/// so every EmbeddingVector in circulation is usable by the metrics below.
class EmbeddingVector {
 public:
  explicit EmbeddingVector(std::vector<double> components);
  EmbeddingVector(std::initializer_list<double> components)
      : EmbeddingVector(std::vector<double>(components)) {}

  std::size_t dimension() const noexcept { return components_.size(); }
  std::span<double const> components() const noexcept { return components_; }
  double operator[](std::size_t i) const noexcept { return components_[i]; }

  friend bool operator==(EmbeddingVector const&, EmbeddingVector const&) = default;

 private:
  std::vector<double> components_;
};

/// Ordered token vectors of a single text; all members share one dimension.
class TokenEmbeddingSequence {
 public:
  explicit TokenEmbeddingSequence(std::vector<EmbeddingVector> vectors);

  std::size_t length() const noexcept { return vectors_.size(); }
  std::size_t dimension() const noexcept { return vectors_.front().dimension(); }
  EmbeddingVector const& operator[](std::size_t i) const noexcept { return vectors_[i]; }
  std::span<EmbeddingVector const> vectors() const noexcept { return vectors_; }

  auto begin() const noexcept { return vectors_.begin(); }
  auto end() const noexcept { return vectors_.end(); }

  friend bool operator==(TokenEmbeddingSequence const&, TokenEmbeddingSequence const&) = default;

 private:
  std::vector<EmbeddingVector> vectors_;
};

// Throws Error{kDimensionMismatch} or Error{kZeroNorm}. The result is
// clamped to [-1, 1].
double cosine_similarity(EmbeddingVector const& u, EmbeddingVector const& v);

double cosine_distance(EmbeddingVector const& u, EmbeddingVector const& v);

// sqrt(2 (1 - cos)), i.e. the Euclidean distance between u/|u| and v/|v|.
double chordal_distance(EmbeddingVector const& u, EmbeddingVector const& v);

/// Product metric on equal-length sequences: the largest per-position
/// chordal distance. Vector-level errors are rethrown with the position.
double sequence_max_distance(TokenEmbeddingSequence const& x,
                             TokenEmbeddingSequence const& y);

}  // namespace ddrbench
