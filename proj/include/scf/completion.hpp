// SPDX-License-Identifier: MIT
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "scf/grid.hpp"
#include "scf/keypoints.hpp"
#include "scf/parallel.hpp"
#include "scf/propagate.hpp"

// Completion fields. A walk leaves a source state, wanders under the
// heading-diffusion / decay dynamics, and is scored by whether it reaches a
// sink state. The field factorizes: C(s) = U(s) * V(s), where U sums the
// forward density from the sources over all times and V is the same
// quantity for time-reversed walks out of the sinks.
//
// Heading conventions. A keypoint's theta is the walk heading carried at
// that point. For a Source that is the launch direction. For an explicit
// Sink it is the direction of travel with which a completing walk arrives,
// so the time-reversed launch flips it by pi (flip_theta at rasterization)
// and the propagated result is flipped back over the heading axis. Auto
// keypoints store the direction pointing off the fragment end into the gap;
// when marginalization casts an Auto keypoint as a sink, the arrival
// direction is its stored heading plus pi.

namespace scf {

struct degenerate_field_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Either multiply the time-summed factors (default) or multiply snapshots
// per time step and sum the products.
enum class TimeCombination { Marginalized, PerTimestep };

inline void validate_keypoints(const KeypointSet& kps, const GridSpec& g) {
  validate(g);
  bool any_auto = false, any_explicit = false;
  for (const Keypoint& k : kps) {
    if (!(k.x >= 0.0) || !(k.x < g.width_cells) || !(k.y >= 0.0) ||
        !(k.y < g.height_cells))
      throw std::invalid_argument("keypoints: position outside the grid");
    if (!(k.weight > 0.0))
      throw std::invalid_argument("keypoints: weight must be > 0");
    (k.role == Role::Auto ? any_auto : any_explicit) = true;
  }
  if (any_auto && any_explicit)
    throw std::invalid_argument(
        "keypoints: auto and explicit roles cannot be mixed in one set");
}

// Nearest-cell, nearest-bin rasterization of the selected keypoints.
// flip_theta adds pi to every heading before binning (used to launch
// time-reversed walks). filter == nullopt takes every keypoint.
inline Field3D rasterize(const KeypointSet& kps, std::optional<Role> filter,
                         const GridSpec& g, bool flip_theta = false) {
  validate_keypoints(kps, g);
  Field3D out(g);
  bool any = false;
  for (const Keypoint& k : kps) {
    if (filter && k.role != *filter) continue;
    any = true;
    int xi = static_cast<int>(std::lround(k.x));
    int yi = static_cast<int>(std::lround(k.y));
    if (xi >= g.width_cells) xi = g.width_cells - 1;
    if (yi >= g.height_cells) yi = g.height_cells - 1;
    const int ti = theta_bin(g, flip_theta ? k.theta + std::numbers::pi : k.theta);
    out.values[static_cast<std::size_t>(state_index(g, xi, yi, ti))] += k.weight;
  }
  if (!any)
    throw std::invalid_argument("rasterize: no keypoint matches the role filter");
  return out;
}

// Reverses every heading: out(x, y, theta) = in(x, y, theta + pi).
// Exact for even theta_cells; odd counts shift by the nearest whole bin.
inline Field3D flip_theta_axis(const Field3D& f) {
  const int T = f.spec.theta_cells;
  const int shift = static_cast<int>(
      std::lround(std::numbers::pi / f.spec.dtheta()));
  Field3D out(f.spec);
  const std::int64_t plane =
      static_cast<std::int64_t>(f.spec.width_cells) * f.spec.height_cells;
  for (int t = 0; t < T; ++t) {
    const std::int64_t src = static_cast<std::int64_t>((t + shift) % T) * plane;
    const std::int64_t dst = static_cast<std::int64_t>(t) * plane;
    for (std::int64_t i = 0; i < plane; ++i)
      out.values[dst + i] = f.values[src + i];
  }
  return out;
}

// Time-marginalized forward density from the Source keypoints, t = 0..t_max.
inline Field3D source_field(const KeypointSet& kps, const GridSpec& g,
                            const WalkParams& params,
                            BoundaryMode mode = BoundaryMode::Absorbing,
                            Backend be = Backend::FiniteDifference) {
  return propagate_sum(rasterize(kps, Role::Source, g), params, mode, be);
}

// Likelihood of reaching a Sink, computed by propagating the heading-flipped
// sink states forward and flipping the result back.
inline Field3D sink_field(const KeypointSet& kps, const GridSpec& g,
                          const WalkParams& params,
                          BoundaryMode mode = BoundaryMode::Absorbing,
                          Backend be = Backend::FiniteDifference) {
  return flip_theta_axis(propagate_sum(
      rasterize(kps, Role::Sink, g, /*flip_theta=*/true), params, mode, be));
}

struct CompletionOptions {
  TimeCombination combine = TimeCombination::Marginalized;
  bool normalize_peak = true;
};

// C = U * V elementwise. With normalize_peak the result is scaled so its
// largest value is 1; an all-zero product (no walk connects the sets) is an
// error in that case.
inline Field3D completion_field(const KeypointSet& kps, const GridSpec& g,
                                const WalkParams& params,
                                BoundaryMode mode = BoundaryMode::Absorbing,
                                Backend be = Backend::FiniteDifference,
                                const CompletionOptions& opt = {}) {
  Field3D c(g);
  if (opt.combine == TimeCombination::Marginalized) {
    const Field3D u = source_field(kps, g, params, mode, be);
    const Field3D v = sink_field(kps, g, params, mode, be);
    for (std::size_t i = 0; i < c.values.size(); ++i)
      c.values[i] = u.values[i] * v.values[i];
  } else {
    // Lockstep march of both factors; product accumulated per time step.
    const Field3D u0 = rasterize(kps, Role::Source, g);
    const Field3D v0 = rasterize(kps, Role::Sink, g, /*flip_theta=*/true);
    const StepWeights w = make_step_weights(g, params);
    Field3D u = u0, v = v0, next(g), scratch(g);
    const int shift =
        static_cast<int>(std::lround(std::numbers::pi / g.dtheta()));
    const std::int64_t plane =
        static_cast<std::int64_t>(g.width_cells) * g.height_cells;
    // v marches in flipped-heading space; the product pairs bin t of u with
    // bin t + pi of v, which undoes the flip without copying.
    auto accumulate = [&] {
      for (int t = 0; t < g.theta_cells; ++t) {
        const std::int64_t dst = static_cast<std::int64_t>(t) * plane;
        const std::int64_t src =
            static_cast<std::int64_t>((t + shift) % g.theta_cells) * plane;
        for (std::int64_t i = 0; i < plane; ++i)
          c.values[dst + i] += u.values[dst + i] * v.values[src + i];
      }
    };
    accumulate();
    for (int t = 1; t <= params.t_max; ++t) {
      detail::step_into(u, next, scratch, w, mode, be);
      u.values.swap(next.values);
      detail::step_into(v, next, scratch, w, mode, be);
      v.values.swap(next.values);
      accumulate();
    }
  }
  if (opt.normalize_peak) {
    const double peak = peak_value(c);
    if (peak <= 0.0)
      throw degenerate_field_error(
          "completion_field: no walk connects sources to sinks "
          "(all-zero product)");
    for (double& v : c.values) v /= peak;
  }
  return c;
}

struct MarginalizeOptions {
  TimeCombination combine = TimeCombination::Marginalized;
  // Pairs (i, j) of keypoint indices that never serve as each other's
  // source/sink (e.g. the two ends of the same fragment). Symmetric.
  std::vector<std::pair<std::size_t, std::size_t>> excluded_pairs;
  std::ostream* log = nullptr;
};

struct MarginalizeStats {
  int contributed = 0;
  int skipped = 0;  // assignments whose product field was all zero
};

namespace detail {

inline bool pair_excluded(const MarginalizeOptions& opt, std::size_t a,
                          std::size_t b) {
  for (const auto& [i, j] : opt.excluded_pairs)
    if ((i == a && j == b) || (i == b && j == a)) return true;
  return false;
}

}  // namespace detail

// Completion over all source/sink assignments of an Auto keypoint set: each
// keypoint in turn is the sole source and the others are sinks (arrival
// heading = stored heading + pi). Every assignment's field is normalized to
// unit mass before accumulation, and the accumulated field is normalized to
// peak 1. Assignments whose product is all zero are skipped, not fatal.
//
// Because the dynamics are linear, the sink factor of assignment i is the
// heading-flipped sum of the single-keypoint propagations F_j (j != i), so
// every F_j is computed once and reused across assignments.
inline Field3D marginalized_field(const KeypointSet& kps, const GridSpec& g,
                                  const WalkParams& params,
                                  BoundaryMode mode = BoundaryMode::Absorbing,
                                  Backend be = Backend::FiniteDifference,
                                  const MarginalizeOptions& opt = {},
                                  MarginalizeStats* stats = nullptr) {
  validate_keypoints(kps, g);
  if (kps.size() < 2)
    throw std::invalid_argument("marginalized_field: needs at least 2 keypoints");
  for (const Keypoint& k : kps)
    if (k.role != Role::Auto)
      throw std::invalid_argument("marginalized_field: keypoints must be Auto");

  const std::size_t n = kps.size();
  MarginalizeStats local;
  Field3D acc(g);

  if (opt.combine == TimeCombination::Marginalized) {
    std::vector<Field3D> f(n);
    parallel_for(0, static_cast<std::int64_t>(n), [&](std::int64_t j) {
      KeypointSet one{kps[static_cast<std::size_t>(j)]};
      one[0].role = Role::Source;
      f[static_cast<std::size_t>(j)] =
          propagate_sum(rasterize(one, Role::Source, g), params, mode, be);
    });
    std::vector<Field3D> contributions(n);
    parallel_for(0, static_cast<std::int64_t>(n), [&](std::int64_t ii) {
      const std::size_t i = static_cast<std::size_t>(ii);
      Field3D vsum(g);
      bool any_sink = false;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i || detail::pair_excluded(opt, i, j)) continue;
        any_sink = true;
        for (std::size_t cidx = 0; cidx < vsum.values.size(); ++cidx)
          vsum.values[cidx] += f[j].values[cidx];
      }
      if (!any_sink) return;
      Field3D ci(g);
      const Field3D v = flip_theta_axis(vsum);
      double mass = 0.0;
      for (std::size_t cidx = 0; cidx < ci.values.size(); ++cidx) {
        ci.values[cidx] = f[i].values[cidx] * v.values[cidx];
        mass += ci.values[cidx];
      }
      if (mass > 0.0) {
        for (double& value : ci.values) value /= mass;
        contributions[i] = std::move(ci);
      }
    });
    for (std::size_t i = 0; i < n; ++i) {
      if (contributions[i].values.empty()) {
        ++local.skipped;
        if (opt.log)
          *opt.log << "marginalized_field: assignment " << i
                   << " produced an empty field, skipped\n";
        continue;
      }
      ++local.contributed;
      for (std::size_t cidx = 0; cidx < acc.values.size(); ++cidx)
        acc.values[cidx] += contributions[i].values[cidx];
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      KeypointSet assigned;
      assigned.reserve(n);
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i && detail::pair_excluded(opt, i, j)) continue;
        Keypoint k = kps[j];
        if (j == i) {
          k.role = Role::Source;
        } else {
          k.role = Role::Sink;
          k.theta = wrap_angle(k.theta + std::numbers::pi);
        }
        assigned.push_back(k);
      }
      if (assigned.size() < 2) continue;
      CompletionOptions copt;
      copt.combine = TimeCombination::PerTimestep;
      copt.normalize_peak = false;
      const Field3D ci = completion_field(assigned, g, params, mode, be, copt);
      const double mass = total_mass(ci);
      if (mass <= 0.0) {
        ++local.skipped;
        if (opt.log)
          *opt.log << "marginalized_field: assignment " << i
                   << " produced an empty field, skipped\n";
        continue;
      }
      ++local.contributed;
      for (std::size_t cidx = 0; cidx < acc.values.size(); ++cidx)
        acc.values[cidx] += ci.values[cidx] / mass;
    }
  }

  if (stats) *stats = local;
  const double peak = peak_value(acc);
  if (peak <= 0.0)
    throw degenerate_field_error(
        "marginalized_field: every assignment produced an empty field");
  for (double& v : acc.values) v /= peak;
  return acc;
}

}  // namespace scf
