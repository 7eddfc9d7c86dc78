#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ddrbench/error.hpp"
#include "ddrbench/metric.hpp"
#include "ddrbench/transport.hpp"
#include "support/oracles.hpp"

using namespace ddrbench;

namespace {

GroundDistanceMatrix abs_diff(std::vector<double> const& a, std::vector<double> const& b) {
  std::vector<double> e;
  for (double x : a)
    for (double y : b) e.push_back(std::abs(x - y));
  return GroundDistanceMatrix(a.size(), b.size(), e);
}

void expect_feasible(EmdResult const& r, std::vector<double> const& p, std::vector<double> const& q) {
  double P = 0, Q = 0;
  for (double w : p) P += w;
  for (double w : q) Q += w;
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_LE(r.flow.row_sum(i), p[i] + kFeasibilityTolerance);
  for (std::size_t j = 0; j < q.size(); ++j) EXPECT_LE(r.flow.col_sum(j), q[j] + kFeasibilityTolerance);
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < q.size(); ++j) EXPECT_GE(r.flow(i, j), -kFeasibilityTolerance);
  EXPECT_NEAR(r.flow.total(), std::min(P, Q), kFeasibilityTolerance);
}

}  // namespace

TEST(SolveEmd, SinglePointsCostTheirDistance) {
  std::vector<double> const w{1.0};
  auto const r = solve_emd(w, w, GroundDistanceMatrix(1, 1, {2.5}));
  EXPECT_DOUBLE_EQ(r.value, 2.5);
  EXPECT_DOUBLE_EQ(r.flow(0, 0), 1.0);
}

TEST(SolveEmd, IdenticalSignaturesCostZero) {
  std::vector<double> const pts{0.0, 1.0, 3.0};
  std::vector<double> const w{0.2, 0.3, 0.5};
  auto const r = solve_emd(w, w, abs_diff(pts, pts));
  EXPECT_NEAR(r.value, 0.0, 1e-15);
}

TEST(SolveEmd, HandWorkedLineExample) {
  // Mass 1/2 at 0 and 1/2 at 2 against all mass at 1: every unit moves 1.
  auto const r = solve_emd(std::vector<double>{0.5, 0.5}, std::vector<double>{1.0}, abs_diff({0, 2}, {1}));
  EXPECT_NEAR(r.value, 1.0, 1e-15);
}

TEST(SolveEmd, PartialTransportDividesByMovedMass) {
  // Only 1 unit of the 3 available moves, to the nearest point.
  auto const r = solve_emd(std::vector<double>{1.0, 2.0}, std::vector<double>{1.0}, abs_diff({0, 5}, {1}));
  EXPECT_NEAR(r.value, 1.0, 1e-15);
  EXPECT_NEAR(r.flow.total(), 1.0, 1e-15);
  EXPECT_NEAR(r.flow(0, 0), 1.0, 1e-15);
}

TEST(SolveEmd, Errors) {
  std::vector<double> const w{1.0, 1.0};
  EXPECT_THROW(solve_emd(w, w, GroundDistanceMatrix(2, 3, std::vector<double>(6, 1.0))), Error);
  EXPECT_THROW(solve_emd(std::vector<double>{}, w, GroundDistanceMatrix(0, 2, {})), Error);
  EXPECT_THROW(solve_emd(std::vector<double>{-1.0, 2.0}, w, GroundDistanceMatrix(2, 2, {0, 1, 1, 0})), Error);
  EXPECT_THROW(GroundDistanceMatrix(1, 2, {1.0, -1.0}), Error);
  EXPECT_THROW(GroundDistanceMatrix(1, 2, {1.0, NAN}), Error);
}

TEST(SolveEmd, MatchesVertexEnumeration) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> size(1, 4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int t = 0; t < 300; ++t) {
    int const m = size(rng), n = size(rng);
    std::vector<double> p(m), q(n), e;
    for (auto& w : p) w = unit(rng) < 0.1 ? 0.0 : unit(rng);
    for (auto& w : q) w = unit(rng) < 0.1 ? 0.0 : unit(rng);
    p[0] += 0.05;
    q[0] += 0.05;
    for (int k = 0; k < m * n; ++k) e.push_back(unit(rng) < 0.1 ? 0.0 : 10 * unit(rng));
    GroundDistanceMatrix const d(m, n, e);
    auto const r = solve_emd(p, q, d);
    EXPECT_NEAR(r.value, oracle::brute_force_emd(p, q, d), 1e-9) << "instance " << t;
    expect_feasible(r, p, q);
  }
}

TEST(SolveEmd, MetricSpaceProperties) {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  for (int t = 0; t < 100; ++t) {
    std::vector<EmbeddingVector> a, b;
    std::vector<double> wa, wb;
    for (int i = 0; i < 4; ++i) {
      a.emplace_back(oracle::gaussian_vector(rng, 3));
      wa.push_back(unit(rng));
    }
    for (int i = 0; i < 3; ++i) {
      b.emplace_back(oracle::gaussian_vector(rng, 3));
      wb.push_back(unit(rng));
    }
    Signature<EmbeddingVector> const p(a, wa), q(b, wb);
    auto const d = GroundDistanceMatrix::between(p, q, chordal_distance);
    auto const forward = solve_emd(p, q, d).value;
    EXPECT_NEAR(forward, solve_emd(q, p, d.transposed()).value, 1e-12);
    EXPECT_NEAR(solve_emd(p, q, d.scaled(3.0)).value, 3.0 * forward, 1e-12);
    EXPECT_GE(forward, 0.0);
  }
}

TEST(SolveEmd, DegenerateInstancesTerminate) {
  // Equal weights and equal costs everywhere produce many ties.
  for (std::size_t n = 1; n <= 12; ++n) {
    std::vector<double> const w(n, 1.0);
    auto const r = solve_emd(w, w, GroundDistanceMatrix(n, n, std::vector<double>(n * n, 1.0)));
    EXPECT_NEAR(r.value, 1.0, 1e-12);
  }
}

TEST(Emd1d, PointMasses) {
  std::vector<double> const a{0.25}, b{-1.5};
  EXPECT_EQ(emd_1d_unit_mass(a, b), 1.75);
}

TEST(Emd1d, ShiftInvariance) {
  std::vector<double> const a{0, 1, 5}, b{2, 3};
  std::vector<double> as{10, 11, 15}, bs{12, 13};
  EXPECT_NEAR(emd_1d_unit_mass(a, b), emd_1d_unit_mass(as, bs), 1e-12);
  EXPECT_THROW(emd_1d_unit_mass(std::vector<double>{}, b), Error);
}

TEST(Emd1d, MatchesGeneralSolver) {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> size(1, 50);
  std::normal_distribution<double> normal;
  for (int t = 0; t < 200; ++t) {
    std::vector<double> a(size(rng)), b(size(rng));
    for (auto& x : a) x = normal(rng);
    for (auto& x : b) x = normal(rng) + 0.5;
    if (t % 5 == 0) b[0] = a[0];  // include exact ties
    auto const d = abs_diff(a, b);
    auto const pa = Signature<double>::uniform(a), pb = Signature<double>::uniform(b);
    EXPECT_NEAR(emd_1d_unit_mass(a, b), solve_emd(pa, pb, d).value, 1e-9) << "instance " << t;
  }
}
