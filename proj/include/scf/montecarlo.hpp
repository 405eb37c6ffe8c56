// SPDX-License-Identifier: MIT
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "scf/completion.hpp"
#include "scf/grid.hpp"
#include "scf/keypoints.hpp"
#include "scf/parallel.hpp"
#include "scf/rng.hpp"

// Particle estimator of the same walk the grid solver integrates: move one
// cell along the current heading per unit time, perturb the heading by
// N(0, sigma^2), survive each step with probability exp(-1/tau). Visited
// cells accumulate integer counts. Used as an independent cross-check on
// the field solver; the two share nothing but GridSpec and WalkParams.
//
// Determinism: walker i draws from its own stream derived from
// (rng_seed, i), and integer counts merge exactly in any order, so the
// result is bit-identical for every worker count.

namespace scf {

struct WalkerConfig {
  std::int64_t n_walkers = 0;
  std::uint64_t rng_seed = 0;
  WalkParams params;
  // Sub-cell by default: a deterministic walk is accepted at the sink cell,
  // never one cell short of it.
  double sink_radius = 0.75;  // cells, Euclidean
  // Heading acceptance half-width at a sink; unset = 2 * dtheta.
  std::optional<double> sink_theta_window;
  BoundaryMode boundary = BoundaryMode::Absorbing;
};

inline void validate(const WalkerConfig& cfg) {
  validate(cfg.params);
  if (cfg.n_walkers < 1)
    throw std::invalid_argument("walkers: n_walkers must be >= 1");
  if (!(cfg.sink_radius > 0.0))
    throw std::invalid_argument("walkers: sink_radius must be > 0");
  if (cfg.sink_theta_window && !(*cfg.sink_theta_window >= 0.0))
    throw std::invalid_argument("walkers: sink_theta_window must be >= 0");
}

struct WalkHistogram {
  Field3D field;  // counts / n_walkers
  std::int64_t launched = 0;
  std::int64_t accepted = 0;   // completion runs only
  std::int64_t survivors = 0;  // alive and in-grid after the full horizon
};

namespace detail {

// Signed smallest angular difference, in [-pi, pi).
inline double angle_diff(double a, double b) {
  double d = wrap_angle(a - b);
  if (d >= std::numbers::pi) d -= 2.0 * std::numbers::pi;
  return d;
}

struct LaunchMixture {
  std::vector<Keypoint> kps;
  std::vector<double> cumulative;  // normalized to end at 1
};

inline LaunchMixture launch_mixture(const KeypointSet& kps, Role role) {
  LaunchMixture m;
  double total = 0.0;
  for (const Keypoint& k : kps)
    if (k.role == role) {
      m.kps.push_back(k);
      total += k.weight;
    }
  if (m.kps.empty())
    throw std::invalid_argument("walkers: no keypoint with the launch role");
  double run = 0.0;
  for (const Keypoint& k : m.kps) {
    run += k.weight / total;
    m.cumulative.push_back(run);
  }
  m.cumulative.back() = 1.0;
  return m;
}

inline const Keypoint& pick(const LaunchMixture& m, double u) {
  for (std::size_t i = 0; i + 1 < m.cumulative.size(); ++i)
    if (u < m.cumulative[i]) return m.kps[i];
  return m.kps.back();
}

// Walks every index in [lo, hi) and accumulates into counts. sinks empty:
// every visit is recorded directly (source mode). sinks present: visits are
// buffered and flushed only if the walker reaches a sink (completion mode).
struct ChunkTally {
  std::vector<std::uint32_t> counts;
  std::int64_t accepted = 0;
  std::int64_t survivors = 0;
};

inline void walk_chunk(const GridSpec& g, const WalkerConfig& cfg,
                       const LaunchMixture& launch,
                       const std::vector<Keypoint>& sinks, std::int64_t lo,
                       std::int64_t hi, ChunkTally& tally) {
  const int W = g.width_cells, H = g.height_cells;
  const bool periodic = cfg.boundary == BoundaryMode::PeriodicSpatial;
  const double survive_p = std::exp(-1.0 / cfg.params.tau);
  const double window =
      cfg.sink_theta_window ? *cfg.sink_theta_window : 2.0 * g.dtheta();
  const bool completion = !sinks.empty();
  tally.counts.assign(static_cast<std::size_t>(g.cell_count()), 0);
  std::vector<std::int64_t> trail;
  trail.reserve(static_cast<std::size_t>(cfg.params.t_max) + 1);

  for (std::int64_t widx = lo; widx < hi; ++widx) {
    Xoshiro256pp rng = walker_rng(cfg.rng_seed, static_cast<std::uint64_t>(widx));
    GaussianSampler gauss;
    const Keypoint& start = pick(launch, rng.uniform01());
    double x = start.x, y = start.y, th = start.theta;
    trail.clear();
    bool alive = true;
    for (int t = 0; t <= cfg.params.t_max; ++t) {
      if (periodic) {
        x -= W * std::floor(x / W);
        y -= H * std::floor(y / H);
      }
      int xi = static_cast<int>(std::lround(x));
      int yi = static_cast<int>(std::lround(y));
      if (periodic) {
        xi %= W;  // x in [W - 0.5, W) rounds to W
        yi %= H;
      } else if (xi < 0 || xi >= W || yi < 0 || yi >= H) {
        alive = false;  // walked off the grid, absorbed
        break;
      }
      const std::int64_t s = state_index(g, xi, yi, theta_bin(g, th));
      if (completion) {
        trail.push_back(s);
        bool hit = false;
        for (const Keypoint& sk : sinks) {
          if (std::hypot(x - sk.x, y - sk.y) <= cfg.sink_radius &&
              std::abs(angle_diff(th, sk.theta)) <= window) {
            hit = true;
            break;
          }
        }
        if (hit) {
          ++tally.accepted;
          for (const std::int64_t v : trail)
            ++tally.counts[static_cast<std::size_t>(v)];
          alive = false;  // absorbed by the sink
          break;
        }
      } else {
        ++tally.counts[static_cast<std::size_t>(s)];
      }
      if (t == cfg.params.t_max) break;
      if (rng.uniform01() >= survive_p) {
        alive = false;
        break;
      }
      x += std::cos(th);
      y += std::sin(th);
      th = wrap_angle(th + cfg.params.sigma * gauss.sample(rng));
    }
    if (alive) ++tally.survivors;
  }
}

inline WalkHistogram run_walkers(const KeypointSet& kps, const GridSpec& g,
                                 const WalkerConfig& cfg, Role launch_role,
                                 std::vector<Keypoint> sinks) {
  validate(cfg);
  validate_keypoints(kps, g);
  const LaunchMixture launch = launch_mixture(kps, launch_role);
  const unsigned chunks = chunk_count(cfg.n_walkers);
  std::vector<ChunkTally> tallies(chunks);
  parallel_chunks(0, cfg.n_walkers,
                  [&](unsigned chunk, std::int64_t lo, std::int64_t hi) {
                    walk_chunk(g, cfg, launch, sinks, lo, hi, tallies[chunk]);
                  });
  WalkHistogram out;
  out.field = Field3D(g);
  out.launched = cfg.n_walkers;
  std::vector<std::uint64_t> total(static_cast<std::size_t>(g.cell_count()), 0);
  for (const ChunkTally& t : tallies) {
    out.accepted += t.accepted;
    out.survivors += t.survivors;
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += t.counts[i];
  }
  for (std::size_t i = 0; i < total.size(); ++i)
    out.field.values[i] =
        static_cast<double>(total[i]) / static_cast<double>(cfg.n_walkers);
  return out;
}

}  // namespace detail

// Visit histogram of walkers launched from the Source keypoints, recording
// every state they pass through while alive.
inline WalkHistogram simulate_source_histogram(const KeypointSet& kps,
                                               const GridSpec& g,
                                               const WalkerConfig& cfg) {
  return detail::run_walkers(kps, g, cfg, Role::Source, {});
}

// Histogram restricted to walkers that reach a Sink: a walker's visits count
// only if it comes within sink_radius of a sink with a heading within the
// acceptance window, checked at every step including launch. Estimates the
// source-to-sink passage density directly, with no factorization assumption.
inline WalkHistogram simulate_completion_histogram(const KeypointSet& kps,
                                                   const GridSpec& g,
                                                   const WalkerConfig& cfg) {
  std::vector<Keypoint> sinks;
  for (const Keypoint& k : kps)
    if (k.role == Role::Sink) sinks.push_back(k);
  if (sinks.empty())
    throw std::invalid_argument("walkers: completion run needs Sink keypoints");
  return detail::run_walkers(kps, g, cfg, Role::Source, std::move(sinks));
}

}  // namespace scf
