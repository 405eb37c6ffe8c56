// SPDX-License-Identifier: MIT
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "scf/completion.hpp"
#include "scf/trace.hpp"

using scf::Field3D;
using scf::GridSpec;
using scf::Keypoint;
using scf::KeypointSet;
using scf::Role;
using scf::SampledVector;
using scf::TracedPath;
using scf::TraceParams;
using scf::TraceStop;
using scf::VectorField2D;
using testutil::make_grid;

namespace {

constexpr double kPi = std::numbers::pi;

VectorField2D uniform_vf(int w, int h, double angle, double mag) {
  VectorField2D vf;
  vf.spec = make_grid(w, h, 4);
  vf.best_theta.assign(static_cast<std::size_t>(w) * h, angle);
  vf.magnitude.assign(static_cast<std::size_t>(w) * h, mag);
  return vf;
}

Keypoint kp(double x, double y, double theta, Role role) {
  Keypoint k;
  k.x = x;
  k.y = y;
  k.theta = theta;
  k.role = role;
  return k;
}

Field3D collinear_field(bool swap_roles) {
  const GridSpec g = make_grid(32, 32, 36);
  KeypointSet kps{kp(8, 16, 0.0, Role::Source), kp(24, 16, 0.0, Role::Sink)};
  if (swap_roles)
    for (Keypoint& k : kps) {
      k.role = (k.role == Role::Source) ? Role::Sink : Role::Source;
      k.theta = scf::wrap_angle(k.theta + kPi);
    }
  return scf::completion_field(kps, g, scf::default_walk_params(g));
}

}  // namespace

TEST(ExtractVectorField, ConstantFieldTieBreaksToBinZero) {
  const GridSpec g = make_grid(6, 5, 8);
  Field3D f(g);
  for (double& v : f.values) v = 0.25;
  const VectorField2D vf = scf::extract_vector_field(f);
  for (std::size_t i = 0; i < vf.magnitude.size(); ++i) {
    EXPECT_EQ(vf.best_theta[i], 0.0);
    EXPECT_EQ(vf.magnitude[i], 0.25);
  }
}

TEST(ExtractVectorField, SingleDelta) {
  const GridSpec g = make_grid(8, 8, 8);
  const Field3D f = testutil::delta_field(g, 3, 3, 5);
  const VectorField2D vf = scf::extract_vector_field(f);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * 8 + x;
      if (x == 3 && y == 3) {
        EXPECT_EQ(vf.magnitude[i], 1.0);
        EXPECT_NEAR(vf.best_theta[i], 5 * g.dtheta(), 1e-15);
      } else {
        EXPECT_EQ(vf.magnitude[i], 0.0);
      }
    }
}

TEST(ExtractVectorField, TieBreakIgnoresNonArgmaxPermutations) {
  const GridSpec g = make_grid(4, 4, 6);
  Field3D a(g), b(g);
  // argmax value 5 in bins 0 and 2; equal non-argmax values permuted
  const double bins_a[6] = {5, 3, 5, 1, 3, 1};
  const double bins_b[6] = {5, 1, 5, 3, 1, 3};
  for (int t = 0; t < 6; ++t)
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 4; ++x) {
        a.at(x, y, t) = bins_a[t];
        b.at(x, y, t) = bins_b[t];
      }
  const VectorField2D va = scf::extract_vector_field(a);
  const VectorField2D vb = scf::extract_vector_field(b);
  EXPECT_EQ(va.best_theta, vb.best_theta);
  EXPECT_EQ(va.magnitude, vb.magnitude);
  EXPECT_EQ(va.best_theta[0], 0.0);  // lowest tied bin wins
}

TEST(ExtractVectorField, CollinearGapPointsAlongPlusX) {
  const Field3D c = collinear_field(false);
  const VectorField2D vf = scf::extract_vector_field(c);
  const double dtheta = c.spec.dtheta();
  for (int x = 9; x <= 23; ++x) {
    const double bt = vf.best_theta[static_cast<std::size_t>(16) * 32 + x];
    const double dev = std::min(bt, 2.0 * kPi - bt);
    EXPECT_LE(dev, dtheta + 1e-12) << "column " << x;
  }
}

TEST(SampleVector, NodeQueryReturnsThatCellsVector) {
  VectorField2D vf = uniform_vf(5, 4, 0.0, 0.0);
  vf.best_theta[1 * 5 + 2] = 1.1;
  vf.magnitude[1 * 5 + 2] = 0.8;
  const SampledVector v = scf::sample_vector(vf, 2.0, 1.0);
  EXPECT_NEAR(v.magnitude, 0.8, 1e-12);
  EXPECT_NEAR(v.dir_x, std::cos(1.1), 1e-12);
  EXPECT_NEAR(v.dir_y, std::sin(1.1), 1e-12);
}

TEST(SampleVector, MidwayEqualAnglesKeepsMagnitude) {
  VectorField2D vf = uniform_vf(4, 4, 0.0, 0.0);
  vf.magnitude[0] = 0.6;  // (0,0) angle 0
  vf.magnitude[1] = 0.6;  // (1,0) angle 0
  const SampledVector v = scf::sample_vector(vf, 0.5, 0.0);
  EXPECT_NEAR(v.dir_x, 1.0, 1e-12);
  EXPECT_NEAR(v.dir_y, 0.0, 1e-12);
  EXPECT_NEAR(v.magnitude, 0.6, 1e-12);
}

TEST(SampleVector, MidwayPerpendicularAnglesAverageAsVectors) {
  VectorField2D vf = uniform_vf(4, 4, 0.0, 0.0);
  const double m = 0.9;
  vf.magnitude[0] = m;           // (0,0) angle 0
  vf.magnitude[1] = m;           // (1,0) angle pi/2
  vf.best_theta[1] = kPi / 2.0;
  const SampledVector v = scf::sample_vector(vf, 0.5, 0.0);
  const double r = std::sqrt(2.0) / 2.0;
  EXPECT_NEAR(v.dir_x, r, 1e-9);
  EXPECT_NEAR(v.dir_y, r, 1e-9);
  EXPECT_NEAR(v.magnitude, m * r, 1e-12);
}

TEST(SampleVector, RejectsOutOfDomainAndSignalsStall) {
  const VectorField2D vf = uniform_vf(5, 5, 0.0, 1.0);
  EXPECT_THROW(scf::sample_vector(vf, -0.1, 2.0), std::out_of_range);
  EXPECT_THROW(scf::sample_vector(vf, 4.5, 2.0), std::out_of_range);
  EXPECT_THROW(scf::sample_vector(vf, 2.0, 5.0), std::out_of_range);

  const VectorField2D dead = uniform_vf(5, 5, 0.7, 0.0);
  EXPECT_EQ(scf::sample_vector(dead, 2.0, 2.0).magnitude, 0.0);
}

TEST(TracePath, StartWithinRadiusConvergesImmediately) {
  const VectorField2D vf = uniform_vf(12, 12, 0.0, 1.0);
  const TracedPath p = scf::trace_path(vf, 5.0, 5.0, 6.0, 5.0);
  EXPECT_TRUE(p.converged);
  EXPECT_EQ(p.reason, TraceStop::Converged);
  EXPECT_EQ(p.steps_taken, 0);
  ASSERT_EQ(p.points.size(), 1u);
  EXPECT_EQ(p.points[0], (std::pair<double, double>(5.0, 5.0)));
}

TEST(TracePath, UniformFieldWalksStraight) {
  const VectorField2D vf = uniform_vf(16, 16, 0.0, 1.0);
  TraceParams tp;
  tp.step_size = 1.0;
  tp.radius = 0.5;
  const TracedPath p = scf::trace_path(vf, 2.0, 8.0, 10.0, 8.0, tp);
  EXPECT_TRUE(p.converged);
  EXPECT_EQ(p.steps_taken, 8);
  ASSERT_EQ(p.points.size(), 9u);
  for (int i = 0; i < 9; ++i) {
    EXPECT_NEAR(p.points[i].first, 2.0 + i, 1e-12);
    EXPECT_NEAR(p.points[i].second, 8.0, 1e-12);
  }
}

TEST(TracePath, BackwardPointingFieldIsWalkedInReverse) {
  // theta* = pi describes the same undirected ridge as theta* = 0; the
  // initial reference points at the end, so every sample is sign-aligned
  // forward and the trace is identical to the theta* = 0 one
  const VectorField2D vf = uniform_vf(16, 16, kPi, 1.0);
  TraceParams tp;
  tp.step_size = 1.0;
  tp.radius = 0.5;
  const TracedPath p = scf::trace_path(vf, 2.0, 8.0, 10.0, 8.0, tp);
  EXPECT_TRUE(p.converged);
  EXPECT_EQ(p.steps_taken, 8);
  ASSERT_EQ(p.points.size(), 9u);
  for (int i = 0; i < 9; ++i) {
    EXPECT_NEAR(p.points[i].first, 2.0 + i, 1e-12);
    EXPECT_NEAR(p.points[i].second, 8.0, 1e-12);
  }
}

TEST(TracePath, SidewaysFieldExitsTheDomain) {
  // +y field perpendicular to the bearing: the dot product with the
  // reference is zero, so nothing is flipped and the tracer marches
  // straight up and off the grid
  const VectorField2D vf = uniform_vf(12, 12, kPi / 2.0, 1.0);
  const TracedPath p = scf::trace_path(vf, 2.0, 2.0, 10.0, 2.0);
  EXPECT_FALSE(p.converged);
  EXPECT_EQ(p.reason, TraceStop::DomainExit);
  for (const auto& [px, py] : p.points) {
    EXPECT_NEAR(px, 2.0, 1e-12);
    EXPECT_LE(py, 11.0);
  }
}

TEST(TracePath, DiagonalFieldExitsTheDomain) {
  // field at pi/4 stays sign-aligned with the reference throughout: the
  // tracer drifts to the far corner and leaves the grid
  const VectorField2D vf = uniform_vf(12, 12, kPi / 4.0, 1.0);
  const TracedPath p = scf::trace_path(vf, 2.0, 2.0, 10.0, 2.0);
  EXPECT_FALSE(p.converged);
  EXPECT_EQ(p.reason, TraceStop::DomainExit);
  for (const auto& [px, py] : p.points) {
    EXPECT_LE(px, 11.0);
    EXPECT_LE(py, 11.0);
  }
}

TEST(TracePath, AlternatingSignRidgeIsStillTraversable) {
  // cells along the ridge disagree on the half-turn sign (argmax noise on
  // symmetric fields does this); per-cell alignment to the previous step
  // keeps the mix coherent across every sign seam
  const GridSpec g = make_grid(16, 16, 4);
  Field3D f(g);
  for (int x = 0; x < 16; ++x) {
    const int t = (x % 2 == 0) ? 0 : 2;  // theta bins 0 and pi
    f.values[scf::state_index(g, x, 8, t)] = 1.0;
  }
  const VectorField2D vf = scf::extract_vector_field(f);
  TraceParams tp;
  tp.step_size = 1.0;
  tp.radius = 0.5;
  const TracedPath p = scf::trace_path(vf, 2.0, 8.0, 13.0, 8.0, tp);
  EXPECT_TRUE(p.converged);
  EXPECT_EQ(p.steps_taken, 11);
  for (const auto& [px, py] : p.points) EXPECT_NEAR(py, 8.0, 1e-12);
}

TEST(TracePath, MaxStepsReported) {
  const VectorField2D vf = uniform_vf(64, 12, kPi / 2.0, 1.0);
  TraceParams tp;
  tp.max_steps = 5;
  const TracedPath p = scf::trace_path(vf, 2.0, 2.0, 60.0, 2.0, tp);
  EXPECT_FALSE(p.converged);
  EXPECT_EQ(p.reason, TraceStop::MaxSteps);
  EXPECT_EQ(p.steps_taken, 5);
}

TEST(TracePath, StallOnZeroField) {
  const VectorField2D vf = uniform_vf(12, 12, 0.0, 0.0);
  const TracedPath p = scf::trace_path(vf, 2.0, 2.0, 10.0, 2.0);
  EXPECT_FALSE(p.converged);
  EXPECT_EQ(p.reason, TraceStop::Stall);
  EXPECT_EQ(p.steps_taken, 0);
}

TEST(TracePath, RejectsBadArguments) {
  const VectorField2D vf = uniform_vf(12, 12, 0.0, 1.0);
  TraceParams tp;
  tp.step_size = 0.0;
  EXPECT_THROW(scf::trace_path(vf, 1, 1, 5, 5, tp), std::invalid_argument);
  EXPECT_THROW(scf::trace_path(vf, -1.0, 1, 5, 5), std::invalid_argument);
  EXPECT_THROW(scf::trace_path(vf, 1, 1, 5, 12.0), std::invalid_argument);
}

TEST(TracePath, DeterministicOnARealField) {
  const VectorField2D vf = scf::extract_vector_field(collinear_field(false));
  const TracedPath a = scf::trace_path(vf, 8, 16, 24, 16);
  const TracedPath b = scf::trace_path(vf, 8, 16, 24, 16);
  EXPECT_EQ(a.points, b.points);
  EXPECT_EQ(a.converged, b.converged);
  EXPECT_EQ(a.steps_taken, b.steps_taken);
  EXPECT_TRUE(a.converged);
}

TEST(TracePath, ConsecutivePointsExactlyStepSizeApart) {
  const VectorField2D vf = scf::extract_vector_field(collinear_field(false));
  TraceParams tp;
  tp.step_size = 0.5;
  const TracedPath p = scf::trace_path(vf, 8, 16, 24, 16, tp);
  ASSERT_GE(p.points.size(), 2u);
  for (std::size_t i = 1; i < p.points.size(); ++i) {
    const double d = std::hypot(p.points[i].first - p.points[i - 1].first,
                                p.points[i].second - p.points[i - 1].second);
    EXPECT_NEAR(d, tp.step_size, 1e-12);
  }
}

TEST(TracePath, ReversedTraceOnTheDualFieldStaysClose) {
  // radius 0.75 (still above the sqrt(2)/2 termination floor) keeps the
  // convergence truncation at either end below the 1-cell bound
  const VectorField2D forward = scf::extract_vector_field(collinear_field(false));
  const VectorField2D backward = scf::extract_vector_field(collinear_field(true));
  TraceParams tp;
  tp.radius = 0.75;
  const TracedPath ab = scf::trace_path(forward, 8, 16, 24, 16, tp);
  const TracedPath ba = scf::trace_path(backward, 24, 16, 8, 16, tp);
  EXPECT_TRUE(ab.converged);
  EXPECT_TRUE(ba.converged);
  EXPECT_LE(testutil::hausdorff(ab.points, ba.points), 1.0);
}
