// SPDX-License-Identifier: MIT
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "scf/grid.hpp"
#include "scf/image.hpp"
#include "scf/keypoints.hpp"
#include "scf/rng.hpp"

// Shared fixtures: deterministic random fields, synthetic shapes and
// images, and small statistics used by both the unit and acceptance suites.

namespace testutil {

inline scf::GridSpec make_grid(int w, int h, int t) {
  scf::GridSpec g;
  g.width_cells = w;
  g.height_cells = h;
  g.theta_cells = t;
  return g;
}

inline scf::Field3D delta_field(const scf::GridSpec& g, int x, int y, int t,
                                double w = 1.0) {
  scf::Field3D f(g);
  f.values[static_cast<std::size_t>(scf::state_index(g, x, y, t))] = w;
  return f;
}

inline scf::Field3D random_field(const scf::GridSpec& g, std::uint64_t seed) {
  scf::Field3D f(g);
  scf::Xoshiro256pp rng(seed);
  for (double& v : f.values) v = rng.uniform01();
  return f;
}

inline double max_rel_diff(const std::vector<double>& a,
                           const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double scale = std::max({std::abs(a[i]), std::abs(b[i]), 1e-300});
    worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
  }
  return worst;
}

inline double pearson(const std::vector<double>& a,
                      const std::vector<double>& b) {
  const std::size_t n = a.size();
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

// Largest distance from any point of a to its nearest point of b, both ways.
inline double hausdorff(const std::vector<std::pair<double, double>>& a,
                        const std::vector<std::pair<double, double>>& b) {
  auto one_way = [](const std::vector<std::pair<double, double>>& from,
                    const std::vector<std::pair<double, double>>& to) {
    double worst = 0.0;
    for (const auto& [x, y] : from) {
      double best = 1e300;
      for (const auto& [u, v] : to)
        best = std::min(best, std::hypot(x - u, y - v));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(one_way(a, b), one_way(b, a));
}

inline void draw_segment(scf::BinaryMap& m, int x0, int y0, int x1, int y1) {
  const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    if (m.in_bounds(x0, y0)) m.set(x0, y0, true);
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

// Pixels of one Bresenham segment in drawing order, endpoints included.
inline std::vector<scf::PixelCoord> segment_pixels(int x0, int y0, int x1,
                                                   int y1) {
  std::vector<scf::PixelCoord> out;
  const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    out.push_back({x0, y0});
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
  return out;
}

// Additive clamped gaussian pixel noise, deterministic per seed.
inline void add_noise(scf::GrayImage& img, double sigma, std::uint64_t seed) {
  scf::Xoshiro256pp rng(seed);
  scf::GaussianSampler gauss;
  for (double& v : img.pixels) {
    v += sigma * gauss.sample(rng);
    v = std::clamp(v, 0.0, 1.0);
  }
}

// Blocky letter "E": readable structure with corners, junctions and long
// straight strokes. Filled region at `ink`, background `bg`.
inline scf::GrayImage letter_image(int size, double bg, double ink) {
  scf::GrayImage img(size, size, bg);
  auto fill = [&](int x0, int y0, int x1, int y1) {
    for (int y = y0; y < y1; ++y)
      for (int x = x0; x < x1; ++x) img.at(x, y) = ink;
  };
  const int m = size / 8;           // outer margin
  const int s = size / 6;           // stroke width
  const int w = size - 2 * m;
  fill(m, m, m + s, size - m);                          // spine
  fill(m, m, m + w * 3 / 4, m + s);                     // top arm
  fill(m, (size - s) / 2, m + w * 5 / 8, (size + s) / 2);  // middle arm
  fill(m, size - m - s, m + w * 3 / 4, size - m);       // bottom arm
  return img;
}

// Pixel chain along a circular arc, thinned so that no pixel is 8-adjacent
// to its second neighbour (corner cuts would read as junctions when the
// chain is drawn into a map).
inline std::vector<scf::PixelCoord> arc_chain(double cx, double cy, double r,
                                              double a0, double a1,
                                              bool closed_ring) {
  std::vector<scf::PixelCoord> pts;
  const int n = 8000;
  for (int i = 0; i <= n; ++i) {
    const double a = a0 + (a1 - a0) * i / n;
    const scf::PixelCoord p{static_cast<int>(std::lround(cx + r * std::cos(a))),
                            static_cast<int>(std::lround(cy + r * std::sin(a)))};
    if (pts.empty() || !(p == pts.back())) pts.push_back(p);
  }
  if (closed_ring && pts.size() > 1 && pts.front() == pts.back())
    pts.pop_back();
  bool changed = true;
  while (changed) {
    changed = false;
    const std::size_t m = pts.size();
    for (std::size_t i = 0; i < m; ++i) {
      if (!closed_ring && (i == 0 || i + 1 == m)) continue;
      const scf::PixelCoord& prev = pts[(i + m - 1) % m];
      const scf::PixelCoord& next = pts[(i + 1) % m];
      if (scf::adjacent8(prev, next)) {
        pts.erase(pts.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        break;
      }
    }
  }
  return pts;
}

// Splits a closed polygon outline into two disjoint maps: per side, the
// quarter of pixels nearest each vertex lands in `corners`, the central
// half in `middles`.
inline void split_polygon(const std::vector<scf::PixelCoord>& verts, int w,
                          int h, scf::BinaryMap& corners,
                          scf::BinaryMap& middles) {
  corners = scf::BinaryMap(w, h);
  middles = scf::BinaryMap(w, h);
  const std::size_t n = verts.size();
  for (std::size_t i = 0; i < n; ++i) {
    const scf::PixelCoord a = verts[i];
    const scf::PixelCoord b = verts[(i + 1) % n];
    const auto px = segment_pixels(a.x, a.y, b.x, b.y);
    const std::size_t len = px.size();
    for (std::size_t p = 0; p < len; ++p) {
      const bool near_vertex = p * 4 < len || p * 4 >= 3 * len;
      scf::BinaryMap& dst = near_vertex ? corners : middles;
      if (dst.in_bounds(px[p].x, px[p].y)) dst.set(px[p].x, px[p].y, true);
    }
  }
}

// Boundary of the inked (darker than threshold) region: an inked pixel with
// at least one 4-neighbor outside the region.
inline scf::BinaryMap region_boundary(const scf::GrayImage& img,
                                      double threshold) {
  scf::BinaryMap out(img.width, img.height);
  auto filled = [&](int x, int y) {
    return x >= 0 && x < img.width && y >= 0 && y < img.height &&
           img.at(x, y) < threshold;
  };
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      if (filled(x, y) && (!filled(x - 1, y) || !filled(x + 1, y) ||
                           !filled(x, y - 1) || !filled(x, y + 1)))
        out.set(x, y, true);
  return out;
}

}  // namespace testutil
