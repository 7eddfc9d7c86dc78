#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ddrbench/ddr.hpp"
#include "ddrbench/error.hpp"
#include "ddrbench/pooling.hpp"
#include "support/oracles.hpp"

using namespace ddrbench;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (Error const& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

EmbeddingPair identity_pair(std::string id, TokenEmbeddingSequence const& x) {
  return EmbeddingPair(std::move(id), x, x, x[x.length() - 1], "m");
}

EmbeddingVector at_angle(double degrees) {
  double const r = degrees * std::numbers::pi / 180.0;
  return {std::cos(r), std::sin(r)};
}

}  // namespace

TEST(Centroid, Examples) {
  EXPECT_EQ(centroid(TokenEmbeddingSequence({EmbeddingVector{3, -1}})).vector, (EmbeddingVector{3, -1}));
  auto const mid = centroid(TokenEmbeddingSequence({EmbeddingVector{0, 0}, EmbeddingVector{2, 2}}));
  EXPECT_EQ(mid.vector, (EmbeddingVector{1, 1}));
  EXPECT_EQ(mid.method, PoolingMethod::kCentroid);
}

TEST(Centroid, MatchesDirectSum) {
  std::mt19937_64 rng(31);
  auto const x = oracle::random_sequence(rng, 10, 6);
  auto const c = centroid(x).vector;
  for (std::size_t k = 0; k < 6; ++k) {
    double sum = 0;
    for (auto const& v : x) sum += v[k];
    EXPECT_NEAR(c[k], sum / 10, 1e-12);
  }
}

TEST(Centroid, PermutationInvariantAndIdempotent) {
  std::mt19937_64 rng(32);
  auto const x = oracle::random_sequence(rng, 7, 4);
  std::vector<EmbeddingVector> reversed(x.vectors().rbegin(), x.vectors().rend());
  auto const a = centroid(x).vector, b = centroid(TokenEmbeddingSequence(reversed)).vector;
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(a[k], b[k], 1e-12);

  EmbeddingVector const v{0.1, 0.7, -0.3};
  EXPECT_EQ(centroid(TokenEmbeddingSequence(std::vector<EmbeddingVector>(9, v))).vector, v);
}

TEST(Centroid, ExtraVectorCountsAsOneMoreToken) {
  TokenEmbeddingSequence const x({EmbeddingVector{0, 0}, EmbeddingVector{3, 3}});
  EXPECT_EQ(centroid(x, EmbeddingVector{6, 0}).vector, (EmbeddingVector{3, 1}));
  EXPECT_EQ(code_of([&] { centroid(x, EmbeddingVector{1, 2, 3}); }), ErrorCode::kDimensionMismatch);
}

TEST(EosVector, SelectsVerbatim) {
  TokenEmbeddingSequence const x({EmbeddingVector{1, 2}, EmbeddingVector{3, 4}, EmbeddingVector{0.1, 0.3}});
  auto const e = eos_vector(x, 2);
  EXPECT_EQ(e.vector, x[2]);
  EXPECT_EQ(e.method, PoolingMethod::kEos);
  EXPECT_EQ(eos_vector(TokenEmbeddingSequence({EmbeddingVector{5}}), 0).vector, EmbeddingVector{5});
  EXPECT_EQ(code_of([&] { eos_vector(x, 3); }), ErrorCode::kIndexOutOfRange);
}

TEST(EmbeddingPair, Invariants) {
  TokenEmbeddingSequence const two({EmbeddingVector{1, 0}, EmbeddingVector{0, 1}});
  TokenEmbeddingSequence const one({EmbeddingVector{1, 0, 0}});
  EXPECT_EQ(code_of([&] { EmbeddingPair("a", two, one, EmbeddingVector{1, 0, 0}, "m"); }),
            ErrorCode::kLengthMismatch);
  EXPECT_EQ(code_of([&] { EmbeddingPair("a", two, two, EmbeddingVector{1, 0, 0}, "m"); }),
            ErrorCode::kDimensionMismatch);
}

TEST(DdrScore, IdentityTransformGivesOne) {
  std::mt19937_64 rng(33);
  auto const a = oracle::random_sequence(rng, 5, 3);
  auto b_rows = std::vector<EmbeddingVector>(a.begin(), a.end());
  b_rows[2] = EmbeddingVector(oracle::gaussian_vector(rng, 3));
  auto const s = ddr_score(identity_pair("a", a), identity_pair("b", TokenEmbeddingSequence(b_rows)));
  EXPECT_EQ(s.method, Method::kDdr);
  EXPECT_NEAR(s.value, 1.0, 1e-12);
}

TEST(DdrScore, PostScaledByTwoGivesOne) {
  std::mt19937_64 rng(34);
  auto const a = oracle::random_sequence(rng, 4, 3);
  auto const b = oracle::random_sequence(rng, 4, 3);
  auto doubled = [](TokenEmbeddingSequence const& x) {
    std::vector<EmbeddingVector> rows;
    for (auto const& v : x) {
      std::vector<double> c(v.components().begin(), v.components().end());
      for (auto& e : c) e *= 2;
      rows.emplace_back(c);
    }
    return TokenEmbeddingSequence(rows);
  };
  EmbeddingPair const pa("a", a, doubled(a), a[0], "m"), pb("b", b, doubled(b), b[0], "m");
  EXPECT_NEAR(ddr_score(pa, pb).value, 1.0, 1e-12);
}

TEST(DdrScore, NinetyOverSixtyDegrees) {
  TokenEmbeddingSequence const pre_a({at_angle(0), at_angle(10)}), pre_b({at_angle(90), at_angle(10)});
  TokenEmbeddingSequence const post_a({at_angle(0), at_angle(20)}), post_b({at_angle(60), at_angle(20)});
  EmbeddingPair const a("a", pre_a, post_a, at_angle(0), "m"), b("b", pre_b, post_b, at_angle(0), "m");
  EXPECT_NEAR(ddr_score(a, b).value, std::sqrt(2.0), 1e-12);
}

TEST(DdrScore, SingleDifferingPositionIsRatioThere) {
  std::mt19937_64 rng(35);
  for (int t = 0; t < 50; ++t) {
    auto const a = oracle::random_pair(rng, "a", 6, 4, 5);
    std::vector<EmbeddingVector> pre(a.pre().begin(), a.pre().end()), post(a.post().begin(), a.post().end());
    pre[t % 6] = EmbeddingVector(oracle::gaussian_vector(rng, 4));
    post[t % 6] = EmbeddingVector(oracle::gaussian_vector(rng, 5));
    EmbeddingPair const b("b", TokenEmbeddingSequence(pre), TokenEmbeddingSequence(post), a.eos(), "synthetic");
    double const expected =
        chordal_distance(a.pre()[t % 6], pre[t % 6]) / chordal_distance(a.post()[t % 6], post[t % 6]);
    EXPECT_NEAR(ddr_score(a, b).value, expected, 1e-12);
  }
}

TEST(DdrScore, SymmetricAndScaleInvariant) {
  std::mt19937_64 rng(36);
  for (int t = 0; t < 100; ++t) {
    auto const a = oracle::random_pair(rng, "a", 5, 3, 4);
    auto const b = oracle::perturbed_pair(rng, a, "b");
    double const ab = ddr_score(a, b).value;
    EXPECT_EQ(ab, ddr_score(b, a).value);
    EXPECT_GT(ab, 0.0);
    EmbeddingPair const scaled("a", oracle::rescale_each(rng, a.pre()), oracle::rescale_each(rng, a.post()), a.eos(),
                               a.model_tag());
    EXPECT_NEAR(ddr_score(scaled, b).value, ab, 1e-12 * std::max(1.0, ab));
  }
}

TEST(DdrScore, Errors) {
  std::mt19937_64 rng(37);
  auto const a = oracle::random_pair(rng, "a", 4, 3, 3);
  EXPECT_EQ(code_of([&] { ddr_score(a, a); }), ErrorCode::kUndefined);

  auto const shorter = oracle::random_pair(rng, "s", 3, 3, 3);
  EXPECT_EQ(code_of([&] { ddr_score(a, shorter); }), ErrorCode::kLengthMismatch);

  std::vector<EmbeddingVector> pre(a.pre().begin(), a.pre().end());
  pre[1] = EmbeddingVector(oracle::gaussian_vector(rng, 3));
  EmbeddingPair const same_post("b", TokenEmbeddingSequence(pre), a.post(), a.eos(), a.model_tag());
  EXPECT_EQ(code_of([&] { ddr_score(a, same_post); }), ErrorCode::kDegenerate);

  EmbeddingPair const other_model("c", TokenEmbeddingSequence(pre), a.post(), a.eos(), "other");
  EXPECT_EQ(code_of([&] { ddr_score(a, other_model); }), ErrorCode::kInvalidArgument);
}

TEST(PooledScores, Examples) {
  std::mt19937_64 rng(38);
  auto const a = oracle::random_pair(rng, "a", 4, 3, 3);
  EXPECT_NEAR(centroid_cosine_score(a, a).value, 1.0, 1e-15);
  EXPECT_NEAR(eos_cosine_score(a, a).value, 1.0, 1e-15);

  TokenEmbeddingSequence const x({EmbeddingVector{1, 0}, EmbeddingVector{1, 0}});
  TokenEmbeddingSequence const y({EmbeddingVector{0, 1}, EmbeddingVector{0, 1}});
  EmbeddingPair const px("x", x, x, EmbeddingVector{2, 1}, "m"), py("y", y, y, EmbeddingVector{-2, -1}, "m");
  EXPECT_NEAR(centroid_cosine_score(px, py).value, 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(eos_cosine_score(px, py).value, -1.0);
}

TEST(PooledScores, AreCompositionsOfPoolingAndMetric) {
  std::mt19937_64 rng(39);
  auto const a = oracle::random_pair(rng, "a", 6, 3, 5);
  auto const b = oracle::random_pair(rng, "b", 4, 3, 5);
  EXPECT_EQ(centroid_cosine_score(a, b).value, cosine_similarity(centroid(a.post()).vector, centroid(b.post()).vector));
  EXPECT_EQ(eos_cosine_score(a, b).value, cosine_similarity(a.eos(), b.eos()));
  EXPECT_EQ(centroid_cosine_score(a, b, {.centroid_includes_eos = true}).value,
            cosine_similarity(centroid(a.post(), a.eos()).vector, centroid(b.post(), b.eos()).vector));
}

TEST(Score, DispatchAndLengthContract) {
  std::mt19937_64 rng(40);
  auto const a = oracle::random_pair(rng, "a", 4, 3, 3);
  auto const b = oracle::random_pair(rng, "b", 6, 3, 3);
  EXPECT_EQ(code_of([&] { score(Method::kDdr, a, b); }), ErrorCode::kLengthMismatch);
  EXPECT_NO_THROW(score(Method::kCentroidCosine, a, b));
  EXPECT_NO_THROW(score(Method::kEosCosine, a, b));
  EXPECT_EQ(score(Method::kCentroidCosine, a, a).value, centroid_cosine_score(a, a).value);

  try {
    score(Method::kDdr, a, a);
    FAIL();
  } catch (Error const& e) {
    EXPECT_NE(std::string(e.what()).find("ddr"), std::string::npos);
  }
}

TEST(Method, NamesRoundTrip) {
  for (auto m : kAllMethods) EXPECT_EQ(parse_method(to_string(m)), m);
  EXPECT_FALSE(parse_method("bleu").has_value());
}
