#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ddrbench/error.hpp"

namespace ddrbench {

/// Absolute tolerance used for flow feasibility checks throughout.
inline constexpr double kFeasibilityTolerance = 1e-9;

namespace detail {
void validate_signature(std::size_t point_count, std::span<double const> weights);
}

/// A weighted point set. `Point` is typically an EmbeddingVector or, for
/// score distributions, a plain double.
template <typename Point>
class Signature {
 public:
  Signature(std::vector<Point> points, std::vector<double> weights)
      : points_(std::move(points)), weights_(std::move(weights)) {
    detail::validate_signature(points_.size(), weights_);
  }

  /// Every point gets weight 1/size, so the signature carries unit mass.
  static Signature uniform(std::vector<Point> points) {
    auto const n = points.size();
    std::vector<double> weights(n, n == 0 ? 0.0 : 1.0 / static_cast<double>(n));
    return Signature(std::move(points), std::move(weights));
  }

  std::size_t size() const noexcept { return points_.size(); }
  std::vector<Point> const& points() const noexcept { return points_; }
  std::vector<double> const& weights() const noexcept { return weights_; }

 private:
  std::vector<Point> points_;
  std::vector<double> weights_;
};

/// Dense row-major m x n matrix of finite, nonnegative reals.
class GroundDistanceMatrix {
 public:
  GroundDistanceMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

  template <typename P, typename Q, typename Fn>
  static GroundDistanceMatrix between(Signature<P> const& p, Signature<Q> const& q, Fn&& distance) {
    std::vector<double> entries;
    entries.reserve(p.size() * q.size());
    for (auto const& a : p.points()) {
      for (auto const& b : q.points()) entries.push_back(distance(a, b));
    }
    return GroundDistanceMatrix(p.size(), q.size(), std::move(entries));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return entries_[i * cols_ + j]; }
  GroundDistanceMatrix transposed() const;
  GroundDistanceMatrix scaled(double factor) const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> entries_;
};

class FlowMatrix {
 public:
  FlowMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), entries_(rows * cols, 0.0) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return entries_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) noexcept { return entries_[i * cols_ + j]; }

  double total() const noexcept;
  double row_sum(std::size_t i) const noexcept;
  double col_sum(std::size_t j) const noexcept;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> entries_;
};

struct EmdResult {
  double value;
  FlowMatrix flow;
};

/// Exact EMD between two signatures given by their weights. Unequal total
/// masses are handled by partial transport of the smaller mass; the value is
/// the optimal work divided by the total flow.
EmdResult solve_emd(std::span<double const> p_weights,
                    std::span<double const> q_weights,
                    GroundDistanceMatrix const& d);

template <typename P, typename Q>
EmdResult solve_emd(Signature<P> const& p, Signature<Q> const& q, GroundDistanceMatrix const& d) {
  return solve_emd(std::span<double const>(p.weights()), std::span<double const>(q.weights()), d);
}

/// EMD between two unit-mass empirical distributions on the real line,
/// computed as the area between their empirical CDFs. Inputs are copied.
double emd_1d_unit_mass(std::span<double const> a, std::span<double const> b);

}  // namespace ddrbench
