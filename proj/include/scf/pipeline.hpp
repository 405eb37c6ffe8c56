// SPDX-License-Identifier: MIT
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "scf/completion.hpp"
#include "scf/grid.hpp"
#include "scf/image.hpp"
#include "scf/keypoints.hpp"
#include "scf/trace.hpp"

// End-to-end flows.
//   guide_contours: connect contour fragments across a masked-out region and
//     return the union of the original edges with the traced completions.
//   complete_in_noise: recover object boundaries from a noisy image by
//     downscaling (averaging the noise down), detecting edges at the small
//     scale, transporting the detected fragments back up, and letting the
//     completion field bridge the gaps.

namespace scf {

struct PipelineConfig {
  int downscale_factor = 4;
  double detector_threshold = 0.3;  // fraction of the max gradient
  int theta_cells = 24;             // heading resolution of the field grid
  // Unset: sigma = 0.7 * dtheta, tau = 0.5 * diag, t_max = 2 * (W + H).
  std::optional<WalkParams> walk;
  TraceParams trace;
  int fit_window = 5;
  // A keypoint pair is traced only if the field sampled at the pair's
  // midpoint exceeds this fraction of the field peak.
  double pair_midpoint_threshold = 1e-3;
  int max_keypoints = 0;  // 0: no cap
};

inline void validate(const PipelineConfig& cfg) {
  if (cfg.downscale_factor < 1)
    throw std::invalid_argument("pipeline: downscale_factor must be >= 1");
  if (!(cfg.detector_threshold > 0.0) || !(cfg.detector_threshold < 1.0))
    throw std::invalid_argument("pipeline: detector_threshold must be in (0,1)");
  if (cfg.theta_cells < 4)
    throw std::invalid_argument("pipeline: theta_cells must be >= 4");
  if (cfg.fit_window < 2)
    throw std::invalid_argument("pipeline: fit_window must be >= 2");
  if (cfg.max_keypoints < 0)
    throw std::invalid_argument("pipeline: max_keypoints must be >= 0");
}

// Exact f x f block average; trailing rows/columns that do not fill a block
// are dropped. Averaging n i.i.d. noise samples divides the noise standard
// deviation by f = sqrt(n), which is why detection runs at the small scale.
inline GrayImage box_downscale(const GrayImage& img, int factor) {
  if (factor < 1)
    throw std::invalid_argument("box_downscale: factor must be >= 1");
  if (factor == 1) return img;
  const int w = img.width / factor, h = img.height / factor;
  if (w < 1 || h < 1)
    throw std::invalid_argument("box_downscale: image smaller than one block");
  GrayImage out(w, h);
  const double inv = 1.0 / (static_cast<double>(factor) * factor);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double sum = 0.0;
      for (int by = 0; by < factor; ++by)
        for (int bx = 0; bx < factor; ++bx)
          sum += img.at(x * factor + bx, y * factor + by);
      out.at(x, y) = sum * inv;
    }
  return out;
}

namespace detail {

inline double pixel_clamped(const GrayImage& img, int x, int y) {
  x = std::clamp(x, 0, img.width - 1);
  y = std::clamp(y, 0, img.height - 1);
  return img.at(x, y);
}

}  // namespace detail

// Central-difference gradient magnitude, thresholded at a fraction of its
// maximum, thinned to one-pixel lines by non-maximum suppression along the
// gradient. The suppression comparison is strict on the forward neighbor
// and non-strict on the backward one, so a two-pixel plateau keeps exactly
// one pixel.
inline BinaryMap detect_edges_simple(const GrayImage& img, double threshold) {
  if (!(threshold > 0.0) || !(threshold < 1.0))
    throw std::invalid_argument("detect_edges: threshold must be in (0,1)");
  const int W = img.width, H = img.height;
  std::vector<double> gx(static_cast<std::size_t>(W) * H),
      gy(gx.size()), mag(gx.size());
  double max_mag = 0.0;
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * W + x;
      gx[i] = 0.5 * (detail::pixel_clamped(img, x + 1, y) -
                     detail::pixel_clamped(img, x - 1, y));
      gy[i] = 0.5 * (detail::pixel_clamped(img, x, y + 1) -
                     detail::pixel_clamped(img, x, y - 1));
      mag[i] = std::hypot(gx[i], gy[i]);
      max_mag = std::max(max_mag, mag[i]);
    }
  BinaryMap out(W, H);
  if (max_mag <= 0.0) return out;
  const double cut = threshold * max_mag;
  // Gradient direction quantized to four axes; (dx, dy) spans the axis.
  static constexpr int kAxis[4][2] = {{1, 0}, {1, 1}, {0, 1}, {-1, 1}};
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * W + x;
      if (mag[i] < cut) continue;
      double a = std::atan2(gy[i], gx[i]);
      if (a < 0.0) a += std::numbers::pi;  // orientation, not direction
      const int sector =
          static_cast<int>(std::floor(a / (std::numbers::pi / 4.0) + 0.5)) % 4;
      int dx = kAxis[sector][0], dy = kAxis[sector][1];
      // Orient the axis up-gradient so a two-cell magnitude tie (a step
      // edge exactly between cells) keeps the darker flank: strict test
      // down-gradient, non-strict up-gradient.
      if (gx[i] * dx + gy[i] * dy < 0.0) {
        dx = -dx;
        dy = -dy;
      }
      auto mag_at = [&](int xx, int yy) {
        return xx >= 0 && xx < W && yy >= 0 && yy < H
                   ? mag[static_cast<std::size_t>(yy) * W + xx]
                   : 0.0;
      };
      if (mag[i] >= mag_at(x + dx, y + dy) && mag[i] > mag_at(x - dx, y - dy))
        out.set(x, y, true);
    }
  return out;
}

namespace detail {

inline void plot(BinaryMap& m, int x, int y) {
  if (m.in_bounds(x, y)) m.set(x, y, true);
}

inline void rasterize_segment(BinaryMap& m, double x0d, double y0d, double x1d,
                              double y1d) {
  int x0 = static_cast<int>(std::lround(x0d));
  int y0 = static_cast<int>(std::lround(y0d));
  const int x1 = static_cast<int>(std::lround(x1d));
  const int y1 = static_cast<int>(std::lround(y1d));
  const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    plot(m, x0, y0);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

inline void rasterize_points(BinaryMap& m,
                             const std::vector<std::pair<double, double>>& pts) {
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    rasterize_segment(m, pts[i].first, pts[i].second, pts[i + 1].first,
                      pts[i + 1].second);
  if (pts.size() == 1)
    plot(m, static_cast<int>(std::lround(pts[0].first)),
         static_cast<int>(std::lround(pts[0].second)));
}

inline WalkParams pipeline_walk_params(const PipelineConfig& cfg,
                                       const GridSpec& g) {
  return cfg.walk ? *cfg.walk : default_walk_params(g);
}

struct PairCandidate {
  std::size_t i = 0, j = 0;
  double strength = 0.0;
};

// All keypoint pairs whose field midpoint clears the threshold, strongest
// first. Ties fall back to index order.
inline std::vector<PairCandidate> select_pairs(const VectorField2D& vf,
                                               const KeypointSet& kps,
                                               double threshold_fraction) {
  double peak = 0.0;
  for (const double v : vf.magnitude) peak = std::max(peak, v);
  std::vector<PairCandidate> out;
  if (peak <= 0.0) return out;
  const double cut = threshold_fraction * peak;
  const double max_x = vf.spec.width_cells - 1.0;
  const double max_y = vf.spec.height_cells - 1.0;
  for (std::size_t i = 0; i < kps.size(); ++i)
    for (std::size_t j = i + 1; j < kps.size(); ++j) {
      const double mx = std::clamp(0.5 * (kps[i].x + kps[j].x), 0.0, max_x);
      const double my = std::clamp(0.5 * (kps[i].y + kps[j].y), 0.0, max_y);
      const double s = sample_vector(vf, mx, my).magnitude;
      if (s > cut) out.push_back({i, j, s});
    }
  std::stable_sort(out.begin(), out.end(),
                   [](const PairCandidate& a, const PairCandidate& b) {
                     return a.strength > b.strength;
                   });
  return out;
}

// Marginalized field + pair tracing shared by both flows. Converged paths
// are rasterized into `completed`; every attempted path is returned.
inline std::vector<TracedPath> complete_keypoints(const KeypointSet& kps,
                                                  const PipelineConfig& cfg,
                                                  BinaryMap& completed) {
  std::vector<TracedPath> paths;
  if (kps.size() < 2) return paths;
  GridSpec g;
  g.width_cells = completed.width;
  g.height_cells = completed.height;
  g.theta_cells = cfg.theta_cells;
  const WalkParams params = pipeline_walk_params(cfg, g);
  Field3D field;
  try {
    field = marginalized_field(kps, g, params);
  } catch (const degenerate_field_error&) {
    return paths;  // nothing connects; leave the edges as they are
  }
  const VectorField2D vf = extract_vector_field(field);
  for (const PairCandidate& pc :
       select_pairs(vf, kps, cfg.pair_midpoint_threshold)) {
    TracedPath p = trace_path(vf, kps[pc.i].x, kps[pc.i].y, kps[pc.j].x,
                              kps[pc.j].y, cfg.trace);
    if (p.converged) rasterize_points(completed, p.points);
    paths.push_back(std::move(p));
  }
  return paths;
}

// Keeps the first `cap` keypoints in detection order when a cap is set.
inline void cap_keypoints(KeypointSet& kps, int cap) {
  if (cap > 0 && static_cast<int>(kps.size()) > cap)
    kps.resize(static_cast<std::size_t>(cap));
}

}  // namespace detail

struct GuideResult {
  BinaryMap completed;
  std::vector<TracedPath> paths;
};

// Bridges edge fragments across the masked region: keypoints where contours
// meet the mask, a field marginalized over them, traced completions unioned
// with the input edges. Never removes an edge pixel.
inline GuideResult guide_contours(const BinaryMap& edges, const BinaryMap& mask,
                                  const PipelineConfig& cfg = {}) {
  validate(cfg);
  if (edges.width != mask.width || edges.height != mask.height)
    throw std::invalid_argument("guide_contours: edge/mask size mismatch");
  GuideResult r;
  r.completed = edges;
  KeypointSet kps = mask_keypoints(edges, mask, cfg.fit_window);
  detail::cap_keypoints(kps, cfg.max_keypoints);
  r.paths = detail::complete_keypoints(kps, cfg, r.completed);
  return r;
}

// Boundary recovery in noise. Detection happens on the box-downscaled image;
// the detected fragments are transported back to full resolution (block
// centers: coordinates scale by the factor plus (factor - 1) / 2), drawn as
// polylines, and their endpoint keypoints seed the completion field that
// bridges the remaining gaps.
inline BinaryMap complete_in_noise(const GrayImage& img,
                                   const PipelineConfig& cfg = {}) {
  validate(cfg);
  const int f = cfg.downscale_factor;
  const GrayImage small = box_downscale(img, f);
  const BinaryMap small_edges =
      detect_edges_simple(small, cfg.detector_threshold);
  const std::vector<ContourFragment> frags = trace_contours(small_edges);

  BinaryMap out(img.width, img.height);
  const double off = (f - 1) / 2.0;
  KeypointSet kps;
  std::vector<std::pair<double, double>> pts;
  for (const ContourFragment& frag : frags) {
    pts.clear();
    for (const PixelCoord& p : frag.pixels)
      pts.emplace_back(p.x * static_cast<double>(f) + off,
                       p.y * static_cast<double>(f) + off);
    detail::rasterize_points(out, pts);
    if (frag.closed() || frag.pixels.size() < 2) continue;
    for (Keypoint k : endpoint_keypoints(frag, cfg.fit_window)) {
      k.x = k.x * f + off;  // heading is scale-invariant
      k.y = k.y * f + off;
      kps.push_back(k);
    }
  }
  detail::cap_keypoints(kps, cfg.max_keypoints);
  detail::complete_keypoints(kps, cfg, out);
  return out;
}

}  // namespace scf
