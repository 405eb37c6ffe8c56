// SPDX-License-Identifier: MIT
#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"
#include "scf/completion.hpp"
#include "scf/metrics.hpp"
#include "scf/rng.hpp"

using scf::BinaryMap;
using scf::Field3D;
using scf::GridSpec;
using scf::KeypointSet;
using scf::PRF;
using scf::ScoreNormalization;
using testutil::make_grid;

namespace {

BinaryMap random_map(int w, int h, std::uint64_t seed, double density) {
  BinaryMap m(w, h);
  scf::Xoshiro256pp rng(seed);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) m.set(x, y, rng.uniform01() < density);
  return m;
}

double square_variant_score(bool keep_corners) {
  BinaryMap corners, middles;
  testutil::split_polygon({{12, 12}, {36, 12}, {36, 36}, {12, 36}}, 48, 48,
                          corners, middles);
  const BinaryMap& kept = keep_corners ? corners : middles;
  const BinaryMap& missing = keep_corners ? middles : corners;

  KeypointSet kps;
  for (const scf::ContourFragment& frag : scf::trace_contours(kept)) {
    if (frag.closed() || frag.pixels.size() < 2) continue;
    for (const scf::Keypoint& k : scf::endpoint_keypoints(frag))
      kps.push_back(k);
  }
  const GridSpec g = make_grid(48, 48, 24);
  const Field3D c =
      scf::marginalized_field(kps, g, scf::default_walk_params(g));
  return scf::completion_score(c, missing).score;
}

}  // namespace

TEST(CompletionScore, EmptyMissingScoresZero) {
  const GridSpec g = make_grid(8, 8, 4);
  const Field3D f = testutil::random_field(g, 3);
  EXPECT_EQ(scf::completion_score(f, BinaryMap(8, 8)).score, 0.0);
  EXPECT_EQ(
      scf::completion_score(f, BinaryMap(8, 8), ScoreNormalization::Cosine).score,
      0.0);
}

TEST(CompletionScore, CosineEqualsOneOnExactConstantSupport) {
  const GridSpec g = make_grid(10, 10, 6);
  Field3D f(g);
  BinaryMap missing(10, 10);
  for (int x = 2; x <= 7; ++x) {
    f.at(x, 4, 2) = 0.7;
    missing.set(x, 4, true);
  }
  const auto r =
      scf::completion_score(f, missing, ScoreNormalization::Cosine);
  EXPECT_NEAR(r.score, 1.0, 1e-12);

  // support wider than the missing set drags the cosine below 1
  Field3D wide = f;
  wide.at(1, 1, 0) = 0.7;
  const double partial =
      scf::completion_score(wide, missing, ScoreNormalization::Cosine).score;
  EXPECT_GT(partial, 0.0);
  EXPECT_LT(partial, 1.0);
}

TEST(CompletionScore, RawSumsThePerPixelMaxima) {
  const GridSpec g = make_grid(6, 6, 4);
  Field3D f(g);
  f.at(1, 1, 0) = 0.5;
  f.at(2, 1, 0) = 0.2;
  f.at(2, 1, 3) = 0.9;  // max over theta wins
  BinaryMap missing(6, 6);
  missing.set(1, 1, true);
  missing.set(2, 1, true);
  missing.set(3, 3, true);  // field is zero here
  EXPECT_NEAR(scf::completion_score(f, missing).score, 1.4, 1e-15);
}

TEST(CompletionScore, RawIsLinearInTheField) {
  const GridSpec g = make_grid(9, 7, 6);
  const BinaryMap missing = random_map(9, 7, 17, 0.4);
  const Field3D f = testutil::random_field(g, 8);
  const double base = scf::completion_score(f, missing).score;

  for (const double a : {0.3, 2.5}) {
    Field3D scaled(g);
    for (std::size_t i = 0; i < f.values.size(); ++i)
      scaled.values[i] = a * f.values[i];
    EXPECT_NEAR(scf::completion_score(scaled, missing).score, a * base,
                1e-12 * std::max(1.0, a * base));
  }

  // additivity across spatially disjoint supports
  Field3D left(g), right(g), both(g);
  for (int t = 0; t < 6; ++t)
    for (int y = 0; y < 7; ++y)
      for (int x = 0; x < 9; ++x) {
        const double v = f.at(x, y, t);
        (x < 4 ? left : right).at(x, y, t) = v;
        both.at(x, y, t) = v;
      }
  const double sum = scf::completion_score(left, missing).score +
                     scf::completion_score(right, missing).score;
  EXPECT_NEAR(scf::completion_score(both, missing).score, sum, 1e-12);
}

TEST(CompletionScore, RejectsMismatchedDims) {
  const GridSpec g = make_grid(8, 8, 4);
  EXPECT_THROW(scf::completion_score(Field3D(g), BinaryMap(8, 7)),
               std::invalid_argument);
}

TEST(CompletionScore, CornersPredictMissingMiddlesBetterThanTheReverse) {
  const double corner_kept = square_variant_score(true);
  const double middle_kept = square_variant_score(false);
  EXPECT_GT(corner_kept, middle_kept);
  EXPECT_GT(corner_kept, 0.0);
}

TEST(Prf, IdenticalMapsScorePerfect) {
  const BinaryMap m = random_map(12, 12, 4, 0.3);
  for (const int tol : {0, 3}) {
    const PRF r = scf::prf(m, m, tol);
    EXPECT_EQ(r.precision, 1.0);
    EXPECT_EQ(r.recall, 1.0);
    EXPECT_EQ(r.f1, 1.0);
    EXPECT_EQ(r.match_tolerance, tol);
  }
}

TEST(Prf, EmptyMapsScoreZero) {
  BinaryMap truth(8, 8);
  truth.set(3, 3, true);
  const PRF r = scf::prf(BinaryMap(8, 8), truth, 2);
  EXPECT_EQ(r.precision, 0.0);
  EXPECT_EQ(r.recall, 0.0);
  EXPECT_EQ(r.f1, 0.0);
  const PRF rr = scf::prf(BinaryMap(8, 8), BinaryMap(8, 8), 2);
  EXPECT_EQ(rr.f1, 0.0);
}

TEST(Prf, ShiftedSegmentHandCount) {
  BinaryMap truth(12, 12), predicted(12, 12);
  for (int y = 2; y <= 7; ++y) truth.set(5, y, true);       // 6 px
  for (int y = 3; y <= 9; ++y) predicted.set(6, y, true);   // 7 px
  const PRF r = scf::prf(predicted, truth, 1);
  // predicted (6,9) is 2 away from the nearest truth pixel; everything else
  // matches within Chebyshev distance 1
  EXPECT_NEAR(r.precision, 6.0 / 7.0, 1e-15);
  EXPECT_EQ(r.recall, 1.0);
  EXPECT_NEAR(r.f1, 12.0 / 13.0, 1e-15);

  const PRF tight = scf::prf(predicted, truth, 0);
  EXPECT_EQ(tight.precision, 0.0);
  EXPECT_EQ(tight.recall, 0.0);
}

TEST(Prf, PrecisionAndRecallSwapWithArguments) {
  const BinaryMap a = random_map(16, 16, 21, 0.2);
  const BinaryMap b = random_map(16, 16, 22, 0.2);
  for (const int tol : {0, 1, 2}) {
    const PRF ab = scf::prf(a, b, tol);
    const PRF ba = scf::prf(b, a, tol);
    EXPECT_EQ(ab.precision, ba.recall);
    EXPECT_EQ(ab.recall, ba.precision);
  }
}

TEST(Prf, MonotoneInTolerance) {
  const BinaryMap a = random_map(20, 20, 31, 0.15);
  const BinaryMap b = random_map(20, 20, 32, 0.15);
  PRF prev = scf::prf(a, b, 0);
  for (int tol = 1; tol <= 4; ++tol) {
    const PRF cur = scf::prf(a, b, tol);
    EXPECT_GE(cur.precision, prev.precision);
    EXPECT_GE(cur.recall, prev.recall);
    prev = cur;
  }
}

TEST(Prf, DisjointMapsAtZeroTolerance) {
  BinaryMap a(8, 8), b(8, 8);
  a.set(1, 1, true);
  b.set(5, 5, true);
  const PRF r = scf::prf(a, b, 0);
  EXPECT_EQ(r.precision, 0.0);
  EXPECT_EQ(r.recall, 0.0);
  EXPECT_EQ(r.f1, 0.0);
}

TEST(Prf, RejectsBadArguments) {
  EXPECT_THROW(scf::prf(BinaryMap(4, 4), BinaryMap(4, 5), 1),
               std::invalid_argument);
  EXPECT_THROW(scf::prf(BinaryMap(4, 4), BinaryMap(4, 4), -1),
               std::invalid_argument);
}
