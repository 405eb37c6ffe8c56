// SPDX-License-Identifier: MIT
#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "scf/grid.hpp"

// Path extraction. The field's per-cell best orientation defines a vector
// field; a greedy tracer integrates it from a start point until it lands
// within a termination radius of the requested end point.

namespace scf {

// Per spatial cell: the argmax heading over theta bins (ties broken toward
// the lowest bin index, so equal-valued non-argmax bins never matter) and
// the field value there.
struct VectorField2D {
  GridSpec spec;
  std::vector<double> best_theta;  // bin-left angle of an argmax bin
  std::vector<double> magnitude;   // max over theta of the field
};

inline VectorField2D extract_vector_field(const Field3D& f) {
  validate(f.spec);
  const int W = f.spec.width_cells, H = f.spec.height_cells,
            T = f.spec.theta_cells;
  VectorField2D vf;
  vf.spec = f.spec;
  const std::size_t cells = static_cast<std::size_t>(W) * H;
  vf.best_theta.assign(cells, 0.0);
  vf.magnitude.assign(cells, 0.0);
  const std::int64_t plane = static_cast<std::int64_t>(W) * H;
  for (std::size_t i = 0; i < cells; ++i) {
    int best = 0;
    double best_val = f.values[i];
    for (int t = 1; t < T; ++t) {
      const double v = f.values[static_cast<std::int64_t>(t) * plane + i];
      if (v > best_val) {
        best_val = v;
        best = t;
      }
    }
    vf.best_theta[i] = best * f.spec.dtheta();
    vf.magnitude[i] = best_val;
  }
  return vf;
}

struct SampledVector {
  double dir_x = 0.0, dir_y = 0.0;  // unit direction; zero on stall
  double magnitude = 0.0;
};

// Bilinear interpolation of the four surrounding cell vectors
// magnitude * (cos best_theta, sin best_theta). Interpolating vectors
// rather than angles sidesteps the 0/2pi seam. A zero interpolated vector
// is returned with magnitude 0 (the tracer's stall signal).
//
// The argmax heading of a ridge built from symmetric walks is only defined
// up to a half turn, and neighbouring cells are free to disagree on the
// sign; mixing such cells head-on cancels the tangent and leaves noise.
// With a nonzero reference direction, every cell vector is sign-aligned to
// it (flipped when the dot product is negative) before mixing.
inline SampledVector sample_vector_oriented(const VectorField2D& vf, double x,
                                            double y, double ref_x,
                                            double ref_y) {
  const int W = vf.spec.width_cells, H = vf.spec.height_cells;
  if (!(x >= 0.0) || !(x <= W - 1) || !(y >= 0.0) || !(y <= H - 1))
    throw std::out_of_range("sample_vector: point outside [0,W-1]x[0,H-1]");
  int x0 = static_cast<int>(x), y0 = static_cast<int>(y);
  if (x0 > W - 2) x0 = W - 2;
  if (y0 > H - 2) y0 = H - 2;
  const double fx = x - x0, fy = y - y0;
  double vx = 0.0, vy = 0.0;
  for (int dy = 0; dy < 2; ++dy) {
    for (int dx = 0; dx < 2; ++dx) {
      const std::size_t i =
          static_cast<std::size_t>(y0 + dy) * W + (x0 + dx);
      const double wgt = (dx ? fx : 1.0 - fx) * (dy ? fy : 1.0 - fy);
      if (wgt == 0.0) continue;
      const double m = vf.magnitude[i];
      double cx = m * std::cos(vf.best_theta[i]);
      double cy = m * std::sin(vf.best_theta[i]);
      if (cx * ref_x + cy * ref_y < 0.0) {
        cx = -cx;
        cy = -cy;
      }
      vx += wgt * cx;
      vy += wgt * cy;
    }
  }
  SampledVector out;
  out.magnitude = std::hypot(vx, vy);
  if (out.magnitude > 0.0) {
    out.dir_x = vx / out.magnitude;
    out.dir_y = vy / out.magnitude;
  }
  return out;
}

inline SampledVector sample_vector(const VectorField2D& vf, double x,
                                   double y) {
  return sample_vector_oriented(vf, x, y, 0.0, 0.0);
}

enum class TraceStop { Converged, MaxSteps, DomainExit, Stall };

struct TracedPath {
  std::vector<std::pair<double, double>> points;
  bool converged = false;
  int steps_taken = 0;
  TraceStop reason = TraceStop::MaxSteps;
};

struct TraceParams {
  double step_size = 0.5;  // cells per step
  double radius = 1.5;     // termination distance from the end point
  int max_steps = 0;       // 0: defaults to 8 * (W + H)
};

// Greedy integrator: repeatedly move step_size along the sampled direction.
// The argmax heading is only defined up to pi on ridges built from
// symmetric walks, so each sample is sign-aligned to the previous step
// direction (the first to the bearing toward the end). Alignment happens
// per contributing cell, which keeps the bilinear mix from cancelling where
// neighbouring cells disagree by a half turn.
inline TracedPath trace_path(const VectorField2D& vf, double start_x,
                             double start_y, double end_x, double end_y,
                             const TraceParams& tp = {}) {
  validate(vf.spec);
  const int W = vf.spec.width_cells, H = vf.spec.height_cells;
  if (!(tp.step_size > 0.0) || !(tp.radius > 0.0))
    throw std::invalid_argument("trace_path: step_size and radius must be > 0");
  const int max_steps = tp.max_steps > 0 ? tp.max_steps : 8 * (W + H);
  auto inside = [&](double x, double y) {
    return x >= 0.0 && x <= W - 1 && y >= 0.0 && y <= H - 1;
  };
  if (!inside(start_x, start_y) || !inside(end_x, end_y))
    throw std::invalid_argument("trace_path: endpoints outside the domain");

  TracedPath path;
  path.points.emplace_back(start_x, start_y);
  double x = start_x, y = start_y;
  double ref_x = end_x - start_x, ref_y = end_y - start_y;
  for (int s = 0; s < max_steps; ++s) {
    if (std::hypot(end_x - x, end_y - y) <= tp.radius) {
      path.converged = true;
      path.reason = TraceStop::Converged;
      return path;
    }
    const SampledVector v = sample_vector_oriented(vf, x, y, ref_x, ref_y);
    if (v.magnitude <= 0.0) {
      path.reason = TraceStop::Stall;
      return path;
    }
    x += tp.step_size * v.dir_x;
    y += tp.step_size * v.dir_y;
    ref_x = v.dir_x;
    ref_y = v.dir_y;
    ++path.steps_taken;
    if (!inside(x, y)) {
      path.reason = TraceStop::DomainExit;
      return path;
    }
    path.points.emplace_back(x, y);
  }
  if (std::hypot(end_x - x, end_y - y) <= tp.radius) {
    path.converged = true;
    path.reason = TraceStop::Converged;
  } else {
    path.reason = TraceStop::MaxSteps;
  }
  return path;
}

}  // namespace scf
