#include "ddrbench/pooling.hpp"

#include <string>
#include <vector>

#include "ddrbench/error.hpp"

namespace ddrbench {

namespace {

PooledVector mean_of(std::span<EmbeddingVector const> head, EmbeddingVector const* extra) {
  std::size_t const dim = head.front().dimension();
  std::vector<long double> sum(dim, 0.0L);
  auto add = [&](EmbeddingVector const& v) {
    if (v.dimension() != dim) {
      fail(ErrorCode::kDimensionMismatch, "centroid over vectors of differing dimension");
    }
    for (std::size_t k = 0; k < dim; ++k) sum[k] += v[k];
  };
  for (auto const& v : head) add(v);
  if (extra != nullptr) add(*extra);
  long double const count = static_cast<long double>(head.size() + (extra != nullptr ? 1 : 0));
  std::vector<double> mean(dim);
  for (std::size_t k = 0; k < dim; ++k) mean[k] = static_cast<double>(sum[k] / count);
  return PooledVector{EmbeddingVector(std::move(mean)), PoolingMethod::kCentroid};
}

}  // namespace

PooledVector centroid(TokenEmbeddingSequence const& x) { return mean_of(x.vectors(), nullptr); }

PooledVector centroid(TokenEmbeddingSequence const& x, EmbeddingVector const& extra) {
  return mean_of(x.vectors(), &extra);
}

PooledVector eos_vector(TokenEmbeddingSequence const& x, std::size_t eos_index) {
  if (eos_index >= x.length()) {
    fail(ErrorCode::kIndexOutOfRange, "eos index " + std::to_string(eos_index) +
                                          " outside sequence of length " +
                                          std::to_string(x.length()));
  }
  return PooledVector{x[eos_index], PoolingMethod::kEos};
}

}  // namespace ddrbench
