// SPDX-License-Identifier: MIT
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

// State space for the completion engine: a dense discretization of
// position and heading, [0, W) x [0, H) x [0, 2pi). One spatial cell per
// image pixel (dx = dy = 1 by convention). Heading is periodic; space is
// not (boundary behaviour is chosen at propagation time).

namespace scf {

struct GridSpec {
  int width_cells = 0;
  int height_cells = 0;
  int theta_cells = 0;
  double dx = 1.0;
  double dy = 1.0;

  // Always derived, never stored: theta_cells uniquely fixes the bin width.
  double dtheta() const {
    return 2.0 * std::numbers::pi / static_cast<double>(theta_cells);
  }

  std::int64_t cell_count() const {
    return static_cast<std::int64_t>(width_cells) * height_cells * theta_cells;
  }

  bool operator==(const GridSpec&) const = default;
};

inline void validate(const GridSpec& g) {
  if (g.width_cells < 2 || g.height_cells < 2)
    throw std::invalid_argument("grid: width_cells and height_cells must be >= 2");
  if (g.theta_cells < 4)
    throw std::invalid_argument("grid: theta_cells must be >= 4");
  if (!(g.dx > 0.0) || !(g.dy > 0.0))
    throw std::invalid_argument("grid: dx and dy must be positive");
}

// Flat index of state (xi, yi, ti): x fastest, then y, then theta.
// ti wraps modulo theta_cells (heading is periodic); xi and yi do not.
inline std::int64_t state_index(const GridSpec& g, int xi, int yi, int ti) {
  if (xi < 0 || xi >= g.width_cells || yi < 0 || yi >= g.height_cells)
    throw std::out_of_range("state_index: spatial index outside grid");
  int t = ti % g.theta_cells;
  if (t < 0) t += g.theta_cells;
  return (static_cast<std::int64_t>(t) * g.height_cells + yi) * g.width_cells +
         xi;
}

struct StateCoords {
  int xi = 0;
  int yi = 0;
  int ti = 0;
  bool operator==(const StateCoords&) const = default;
};

inline StateCoords state_coords(const GridSpec& g, std::int64_t index) {
  if (index < 0 || index >= g.cell_count())
    throw std::out_of_range("state_coords: index outside grid");
  const int xi = static_cast<int>(index % g.width_cells);
  const std::int64_t rest = index / g.width_cells;
  const int yi = static_cast<int>(rest % g.height_cells);
  const int ti = static_cast<int>(rest / g.height_cells);
  return {xi, yi, ti};
}

// Dense nonnegative scalar field over the state grid. Values are doubles
// internally; serialization narrows to float32.
struct Field3D {
  GridSpec spec;
  std::vector<double> values;

  Field3D() = default;
  explicit Field3D(const GridSpec& g) : spec(g) {
    validate(g);
    values.assign(static_cast<std::size_t>(g.cell_count()), 0.0);
  }

  double& at(int xi, int yi, int ti) {
    return values[static_cast<std::size_t>(state_index(spec, xi, yi, ti))];
  }
  double at(int xi, int yi, int ti) const {
    return values[static_cast<std::size_t>(state_index(spec, xi, yi, ti))];
  }
};

inline double total_mass(const Field3D& f) {
  double sum = 0.0;
  for (double v : f.values) sum += v;
  return sum;
}

inline double peak_value(const Field3D& f) {
  double peak = 0.0;
  for (double v : f.values)
    if (v > peak) peak = v;
  return peak;
}

// Parameters of the underlying directional random walk. sigma is the
// standard deviation of the per-unit-time heading change (radians), tau
// the mean lifetime in time units, t_max the number of unit time steps.
// t_max = 0 is allowed and means "initial condition only".
struct WalkParams {
  double sigma = 0.0;
  double tau = 1.0;
  int t_max = 1;
};

inline void validate(const WalkParams& p) {
  if (!(p.sigma >= 0.0)) throw std::invalid_argument("walk: sigma must be >= 0");
  if (!(p.tau > 0.0)) throw std::invalid_argument("walk: tau must be > 0");
  if (p.t_max < 0) throw std::invalid_argument("walk: t_max must be >= 0");
}

// Heading-diffusion coefficient of the explicit scheme. Stability of the
// three-tap heading stencil requires lambda <= 1/2.
inline double diffusion_lambda(const WalkParams& p, const GridSpec& g) {
  const double dt = g.dtheta();
  return p.sigma * p.sigma / (2.0 * dt * dt);
}

// Defaults tied to the grid: sigma at 0.7 heading bins (lambda = 0.245,
// comfortably stable), tau at half the grid diagonal, horizon long enough
// for a walk to cross the grid twice.
inline WalkParams default_walk_params(const GridSpec& g) {
  WalkParams p;
  p.sigma = 0.7 * g.dtheta();
  p.tau = 0.5 * std::hypot(static_cast<double>(g.width_cells),
                           static_cast<double>(g.height_cells));
  p.t_max = 2 * (g.width_cells + g.height_cells);
  return p;
}

// Wraps an angle into [0, 2pi).
inline double wrap_angle(double a) {
  const double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a < 0.0) a += two_pi;
  return a;
}

// Nearest heading bin for an angle; 2pi wraps back to bin 0.
inline int theta_bin(const GridSpec& g, double theta) {
  const int t = static_cast<int>(std::lround(wrap_angle(theta) / g.dtheta()));
  return t % g.theta_cells;
}

}  // namespace scf
