// SPDX-License-Identifier: MIT
#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "scf/grid.hpp"
#include "scf/parallel.hpp"

// One time step of the directional random walk density:
//   1. upwind advection along x by cos(theta), one cell per unit time,
//   2. upwind advection along y by sin(theta),
//   3. three-tap diffusion over the periodic heading axis,
//   4. uniform decay exp(-1/tau).
// The passes run sequentially on separate buffers (no in-place update), so
// each pass sees only the previous pass's output. Two backends produce the
// same operator: a direct stencil evaluation and a small-kernel convolution.

namespace scf {

enum class BoundaryMode {
  Absorbing,        // mass crossing a spatial edge is lost
  PeriodicSpatial,  // spatial axes wrap; conservation test mode
};

enum class Backend {
  FiniteDifference,
  Convolution,
};

struct stability_error : std::domain_error {
  using std::domain_error::domain_error;
};

// Per-step coefficients. cos/sin are tabulated at each bin's left edge
// angle ti * dtheta. When theta_cells is a multiple of 4 the tables are
// built from one quadrant, so a quarter-turn permutation of bins permutes
// the tables bit-exactly and the axis-aligned headings are exact.
struct StepWeights {
  GridSpec spec;
  double lambda = 0.0;
  double decay = 1.0;
  std::vector<double> cos_theta;
  std::vector<double> sin_theta;
};

inline StepWeights make_step_weights(const GridSpec& g, const WalkParams& p) {
  validate(g);
  validate(p);
  StepWeights w;
  w.spec = g;
  w.lambda = diffusion_lambda(p, g);
  if (w.lambda > 0.5)
    throw stability_error(
        "step: heading diffusion unstable, sigma^2/(2*dtheta^2) = " +
        std::to_string(w.lambda) + " exceeds 1/2");
  w.decay = std::exp(-1.0 / p.tau);
  const int n = g.theta_cells;
  w.cos_theta.resize(n);
  w.sin_theta.resize(n);
  if (n % 4 == 0) {
    const int quarter = n / 4;
    for (int t = 0; t < n; ++t) {
      const int q = t / quarter;
      const double a = (t % quarter) * g.dtheta();
      const double c = std::cos(a);
      const double s = std::sin(a);
      switch (q) {
        case 0: w.cos_theta[t] = c;  w.sin_theta[t] = s;  break;
        case 1: w.cos_theta[t] = -s; w.sin_theta[t] = c;  break;
        case 2: w.cos_theta[t] = -c; w.sin_theta[t] = -s; break;
        default: w.cos_theta[t] = s; w.sin_theta[t] = -c; break;
      }
    }
  } else {
    for (int t = 0; t < n; ++t) {
      w.cos_theta[t] = std::cos(t * g.dtheta());
      w.sin_theta[t] = std::sin(t * g.dtheta());
    }
  }
  return w;
}

namespace detail {

inline void check_step_args(const Field3D& p, const StepWeights& w) {
  if (!(p.spec == w.spec))
    throw std::invalid_argument("step: field and weights disagree on the grid");
  if (static_cast<std::int64_t>(p.values.size()) != p.spec.cell_count())
    throw std::invalid_argument("step: field storage size mismatch");
}

// x advection, upwind by the sign of cos(theta).
inline void advect_x(const Field3D& in, Field3D& out, const StepWeights& w,
                     BoundaryMode mode) {
  const int W = w.spec.width_cells, H = w.spec.height_cells,
            T = w.spec.theta_cells;
  const bool wrap = mode == BoundaryMode::PeriodicSpatial;
  parallel_for(0, T, [&](std::int64_t ti) {
    const double c = w.cos_theta[ti];
    const double* src = in.values.data() + ti * static_cast<std::int64_t>(W) * H;
    double* dst = out.values.data() + ti * static_cast<std::int64_t>(W) * H;
    for (int y = 0; y < H; ++y) {
      const double* row = src + static_cast<std::int64_t>(y) * W;
      double* orow = dst + static_cast<std::int64_t>(y) * W;
      if (c >= 0.0) {
        const double left = wrap ? row[W - 1] : 0.0;
        orow[0] = row[0] - c * row[0] + c * left;
        for (int x = 1; x < W; ++x)
          orow[x] = row[x] - c * row[x] + c * row[x - 1];
      } else {
        for (int x = 0; x < W - 1; ++x)
          orow[x] = row[x] - c * row[x + 1] + c * row[x];
        const double right = wrap ? row[0] : 0.0;
        orow[W - 1] = row[W - 1] - c * right + c * row[W - 1];
      }
    }
  });
}

// y advection, upwind by the sign of sin(theta).
inline void advect_y(const Field3D& in, Field3D& out, const StepWeights& w,
                     BoundaryMode mode) {
  const int W = w.spec.width_cells, H = w.spec.height_cells,
            T = w.spec.theta_cells;
  const bool wrap = mode == BoundaryMode::PeriodicSpatial;
  parallel_for(0, T, [&](std::int64_t ti) {
    const double s = w.sin_theta[ti];
    const double* src = in.values.data() + ti * static_cast<std::int64_t>(W) * H;
    double* dst = out.values.data() + ti * static_cast<std::int64_t>(W) * H;
    if (s >= 0.0) {
      for (int y = 0; y < H; ++y) {
        const double* row = src + static_cast<std::int64_t>(y) * W;
        const double* below =
            y > 0 ? row - W : (wrap ? src + static_cast<std::int64_t>(H - 1) * W : nullptr);
        double* orow = dst + static_cast<std::int64_t>(y) * W;
        if (below) {
          for (int x = 0; x < W; ++x)
            orow[x] = row[x] - s * row[x] + s * below[x];
        } else {
          for (int x = 0; x < W; ++x) orow[x] = row[x] - s * row[x];
        }
      }
    } else {
      for (int y = 0; y < H; ++y) {
        const double* row = src + static_cast<std::int64_t>(y) * W;
        const double* above =
            y < H - 1 ? row + W : (wrap ? src : nullptr);
        double* orow = dst + static_cast<std::int64_t>(y) * W;
        if (above) {
          for (int x = 0; x < W; ++x)
            orow[x] = row[x] - s * above[x] + s * row[x];
        } else {
          for (int x = 0; x < W; ++x) orow[x] = row[x] + s * row[x];
        }
      }
    }
  });
}

// Heading diffusion (always periodic) with the decay factor fused in.
inline void diffuse_theta_decay(const Field3D& in, Field3D& out,
                                const StepWeights& w) {
  const int W = w.spec.width_cells, H = w.spec.height_cells,
            T = w.spec.theta_cells;
  const std::int64_t plane = static_cast<std::int64_t>(W) * H;
  const double lam = w.lambda;
  const double mid = 1.0 - 2.0 * lam;
  const double k = w.decay;
  parallel_for(0, T, [&](std::int64_t ti) {
    const double* cur = in.values.data() + ti * plane;
    const double* prev = in.values.data() + ((ti + T - 1) % T) * plane;
    const double* next = in.values.data() + ((ti + 1) % T) * plane;
    double* dst = out.values.data() + ti * plane;
    for (std::int64_t i = 0; i < plane; ++i)
      dst[i] = k * (lam * prev[i] + mid * cur[i] + lam * next[i]);
  });
}

// Convolution backend. Each pass is a correlation with a tiny kernel:
// out[i] = sum_k weight[k] * in[i + offset[k]], with zero padding or
// wrapping at the ends of the axis.
struct AxisKernel {
  int offsets[3] = {0, 0, 0};
  double weights[3] = {0.0, 0.0, 0.0};
  int taps = 0;
};

inline AxisKernel advection_kernel(double c) {
  AxisKernel k;
  k.taps = 2;
  if (c >= 0.0) {
    k.offsets[0] = 0;  k.weights[0] = 1.0 - c;
    k.offsets[1] = -1; k.weights[1] = c;
  } else {
    k.offsets[0] = 0;  k.weights[0] = 1.0 + c;
    k.offsets[1] = 1;  k.weights[1] = -c;
  }
  return k;
}

inline AxisKernel heading_kernel(double lambda) {
  AxisKernel k;
  k.taps = 3;
  k.offsets[0] = -1; k.weights[0] = lambda;
  k.offsets[1] = 0;  k.weights[1] = 1.0 - 2.0 * lambda;
  k.offsets[2] = 1;  k.weights[2] = lambda;
  return k;
}

// axis: 0 = x, 1 = y, 2 = theta. kernels has one entry per heading bin for
// the spatial axes and a single entry for the heading axis.
inline void convolve_axis(const Field3D& in, Field3D& out, int axis,
                          const std::vector<AxisKernel>& kernels, bool wrap) {
  const int W = in.spec.width_cells, H = in.spec.height_cells,
            T = in.spec.theta_cells;
  const std::int64_t plane = static_cast<std::int64_t>(W) * H;
  const int extent = axis == 0 ? W : axis == 1 ? H : T;
  const std::int64_t stride = axis == 0 ? 1 : axis == 1 ? W : plane;
  parallel_for(0, T, [&](std::int64_t ti) {
    const AxisKernel& k = kernels[axis == 2 ? 0 : ti];
    for (int y = 0; y < H; ++y) {
      const std::int64_t base = ti * plane + static_cast<std::int64_t>(y) * W;
      for (int x = 0; x < W; ++x) {
        const std::int64_t i = base + x;
        const int along = axis == 0 ? x : axis == 1 ? y : static_cast<int>(ti);
        double sum = 0.0;
        for (int tap = 0; tap < k.taps; ++tap) {
          int j = along + k.offsets[tap];
          if (j < 0 || j >= extent) {
            if (!wrap) continue;
            j = (j % extent + extent) % extent;
          }
          sum += k.weights[tap] *
                 in.values[i + static_cast<std::int64_t>(j - along) * stride];
        }
        out.values[i] = sum;
      }
    }
  });
}

inline void step_into_fd(const Field3D& in, Field3D& out, Field3D& scratch,
                         const StepWeights& w, BoundaryMode mode) {
  advect_x(in, scratch, w, mode);
  advect_y(scratch, out, w, mode);
  scratch.values.swap(out.values);
  diffuse_theta_decay(scratch, out, w);
}

inline void step_into_conv(const Field3D& in, Field3D& out, Field3D& scratch,
                           const StepWeights& w, BoundaryMode mode) {
  const int T = w.spec.theta_cells;
  const bool wrap = mode == BoundaryMode::PeriodicSpatial;
  std::vector<AxisKernel> kx(T), ky(T);
  for (int t = 0; t < T; ++t) {
    kx[t] = advection_kernel(w.cos_theta[t]);
    ky[t] = advection_kernel(w.sin_theta[t]);
  }
  const std::vector<AxisKernel> kt{heading_kernel(w.lambda)};
  convolve_axis(in, scratch, 0, kx, wrap);
  convolve_axis(scratch, out, 1, ky, wrap);
  scratch.values.swap(out.values);
  convolve_axis(scratch, out, 2, kt, true);
  const double k = w.decay;
  parallel_for(0, w.spec.theta_cells, [&](std::int64_t ti) {
    const std::int64_t plane =
        static_cast<std::int64_t>(w.spec.width_cells) * w.spec.height_cells;
    double* dst = out.values.data() + ti * plane;
    for (std::int64_t i = 0; i < plane; ++i) dst[i] *= k;
  });
}

inline void step_into(const Field3D& in, Field3D& out, Field3D& scratch,
                      const StepWeights& w, BoundaryMode mode, Backend be) {
  if (be == Backend::FiniteDifference)
    step_into_fd(in, out, scratch, w, mode);
  else
    step_into_conv(in, out, scratch, w, mode);
}

}  // namespace detail

inline Field3D step_fd(const Field3D& p, const StepWeights& w,
                       BoundaryMode mode = BoundaryMode::Absorbing) {
  detail::check_step_args(p, w);
  Field3D out(p.spec), scratch(p.spec);
  detail::step_into_fd(p, out, scratch, w, mode);
  return out;
}

inline Field3D step_conv(const Field3D& p, const StepWeights& w,
                         BoundaryMode mode = BoundaryMode::Absorbing) {
  detail::check_step_args(p, w);
  Field3D out(p.spec), scratch(p.spec);
  detail::step_into_conv(p, out, scratch, w, mode);
  return out;
}

inline Field3D step(const Field3D& p, const StepWeights& w,
                    BoundaryMode mode = BoundaryMode::Absorbing,
                    Backend be = Backend::FiniteDifference) {
  detail::check_step_args(p, w);
  Field3D out(p.spec), scratch(p.spec);
  detail::step_into(p, out, scratch, w, mode, be);
  return out;
}

// Marches the density and calls visit(t, state) for t = 0 .. t_max,
// including the initial condition at t = 0.
template <class Visit>
inline void propagate_visit(const Field3D& p_init, const WalkParams& params,
                            BoundaryMode mode, Backend be, Visit&& visit) {
  const StepWeights w = make_step_weights(p_init.spec, params);
  detail::check_step_args(p_init, w);
  visit(0, p_init);
  if (params.t_max == 0) return;
  Field3D cur = p_init, next(p_init.spec), scratch(p_init.spec);
  for (int t = 1; t <= params.t_max; ++t) {
    detail::step_into(cur, next, scratch, w, mode, be);
    cur.values.swap(next.values);
    visit(t, cur);
  }
}

// Full sequence of snapshots, t = 0 .. t_max.
inline std::vector<Field3D> propagate_snapshots(
    const Field3D& p_init, const WalkParams& params,
    BoundaryMode mode = BoundaryMode::Absorbing,
    Backend be = Backend::FiniteDifference) {
  std::vector<Field3D> out;
  out.reserve(static_cast<std::size_t>(params.t_max) + 1);
  propagate_visit(p_init, params, mode, be,
                  [&](int, const Field3D& f) { out.push_back(f); });
  return out;
}

// Running time sum over all snapshots; constant memory.
inline Field3D propagate_sum(const Field3D& p_init, const WalkParams& params,
                             BoundaryMode mode = BoundaryMode::Absorbing,
                             Backend be = Backend::FiniteDifference) {
  Field3D sum(p_init.spec);
  propagate_visit(p_init, params, mode, be, [&](int, const Field3D& f) {
    const std::size_t n = sum.values.size();
    for (std::size_t i = 0; i < n; ++i) sum.values[i] += f.values[i];
  });
  return sum;
}

}  // namespace scf
