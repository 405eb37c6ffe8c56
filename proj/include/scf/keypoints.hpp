// SPDX-License-Identifier: MIT
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "scf/grid.hpp"

// Keypoints are oriented anchor states for completion: a position in cell
// coordinates plus a heading. They are either placed explicitly (Source /
// Sink) or derived from the endpoints of binary contour fragments (Auto,
// heading pointing away from the fragment body, into the gap).

namespace scf {

enum class Role { Source, Sink, Auto };

struct Keypoint {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  // radians in [0, 2pi)
  double weight = 1.0;
  Role role = Role::Auto;
};

using KeypointSet = std::vector<Keypoint>;

struct BinaryMap {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  BinaryMap() = default;
  BinaryMap(int w, int h) : width(w), height(h) {
    if (w < 0 || h < 0) throw std::invalid_argument("binary map: negative size");
    bits.assign(static_cast<std::size_t>(w) * h, 0);
  }

  bool in_bounds(int x, int y) const {
    return x >= 0 && x < width && y >= 0 && y < height;
  }
  bool at(int x, int y) const {
    return bits[static_cast<std::size_t>(y) * width + x] != 0;
  }
  void set(int x, int y, bool v) {
    bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0;
  }
  std::int64_t on_count() const {
    std::int64_t n = 0;
    for (auto b : bits) n += b != 0;
    return n;
  }
};

struct PixelCoord {
  int x = 0;
  int y = 0;
  bool operator==(const PixelCoord&) const = default;
};

inline bool adjacent8(PixelCoord a, PixelCoord b) {
  const int dx = a.x - b.x, dy = a.y - b.y;
  return (dx != 0 || dy != 0) && dx >= -1 && dx <= 1 && dy >= -1 && dy <= 1;
}

// A simple 8-connected pixel chain. Closed chains are marked by repeating
// the first pixel at the end; no other pixel repeats.
struct ContourFragment {
  std::vector<PixelCoord> pixels;

  bool closed() const {
    return pixels.size() >= 3 && pixels.front() == pixels.back();
  }
  // Number of distinct pixels (the closing repeat does not count).
  std::size_t distinct_size() const {
    return closed() ? pixels.size() - 1 : pixels.size();
  }
};

namespace detail {

// 4-connected steps first so walks hug the line instead of cutting corners.
inline constexpr int kNeigh[8][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1},
                                     {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};

}  // namespace detail

// Partitions the ON pixels into fragments. A pixel whose ON neighbours
// form 3 or more contiguous groups around its ring is a junction (three or
// more branches meet there): walks never pass through junctions, so each
// branch becomes its own fragment. Counting groups rather than raw
// neighbours keeps the inner elbow of an axis-aligned corner a chain pixel
// (its two arms touch diagonally and would otherwise read as 3 neighbours).
// Junction pixels are then attached to an adjacent fragment end (one per
// end per sweep) so that every ON pixel lands in exactly one fragment;
// junction clusters touching no open end become fragments of their own.
inline std::vector<ContourFragment> trace_contours(const BinaryMap& map) {
  const int W = map.width, H = map.height;
  const std::size_t n = static_cast<std::size_t>(W) * H;
  std::vector<std::uint8_t> junction(n, 0), claimed(n, 0);
  std::vector<std::uint8_t> chain_degree(n, 0);
  auto idx = [W](int x, int y) { return static_cast<std::size_t>(y) * W + x; };

  // Ring offsets in cyclic order: consecutive entries are spatially
  // adjacent, so OFF->ON transitions count the neighbour groups.
  constexpr int kRing[8][2] = {{1, 0},  {1, 1},   {0, 1},  {-1, 1},
                               {-1, 0}, {-1, -1}, {0, -1}, {1, -1}};
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      if (!map.at(x, y)) continue;
      bool on[8];
      for (int k = 0; k < 8; ++k) {
        const int nx = x + kRing[k][0], ny = y + kRing[k][1];
        on[k] = map.in_bounds(nx, ny) && map.at(nx, ny);
      }
      int groups = 0;
      for (int k = 0; k < 8; ++k)
        if (on[k] && !on[(k + 7) % 8]) ++groups;
      junction[idx(x, y)] = groups >= 3;
    }
  // A chain walk may take a diagonal step only when neither corner it cuts
  // across is ON: an ON corner is either a junction being bypassed or a
  // different branch, and threading past it would splice branches together.
  auto traversable = [&](PixelCoord from, int nx, int ny) {
    if (!map.in_bounds(nx, ny) || !map.at(nx, ny)) return false;
    if (junction[idx(nx, ny)]) return false;
    if (nx != from.x && ny != from.y &&
        (map.at(from.x, ny) || map.at(nx, from.y)))
      return false;
    return true;
  };

  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      const std::size_t i = idx(x, y);
      if (!map.at(x, y) || junction[i]) continue;
      int d = 0;
      for (const auto& o : detail::kNeigh)
        if (traversable({x, y}, x + o[0], y + o[1])) ++d;
      chain_degree[i] = static_cast<std::uint8_t>(d);
    }

  std::vector<ContourFragment> frags;

  auto walk_chain = [&](int sx, int sy) {
    ContourFragment frag;
    PixelCoord cur{sx, sy};
    claimed[idx(sx, sy)] = 1;
    frag.pixels.push_back(cur);
    for (;;) {
      bool advanced = false;
      for (const auto& o : detail::kNeigh) {
        const int nx = cur.x + o[0], ny = cur.y + o[1];
        if (!traversable(cur, nx, ny) || claimed[idx(nx, ny)]) continue;
        cur = {nx, ny};
        claimed[idx(nx, ny)] = 1;
        frag.pixels.push_back(cur);
        advanced = true;
        break;
      }
      if (!advanced) break;
    }
    return frag;
  };

  // Open chains start at pixels with at most one chain neighbour.
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      const std::size_t i = idx(x, y);
      if (!map.at(x, y) || claimed[i] || junction[i] || chain_degree[i] > 1)
        continue;
      frags.push_back(walk_chain(x, y));
    }
  // Whatever non-junction pixels remain sit on cycles.
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      const std::size_t i = idx(x, y);
      if (!map.at(x, y) || claimed[i] || junction[i]) continue;
      ContourFragment frag = walk_chain(x, y);
      if (frag.pixels.size() >= 3 &&
          adjacent8(frag.pixels.back(), frag.pixels.front()))
        frag.pixels.push_back(frag.pixels.front());
      frags.push_back(std::move(frag));
    }

  // Attach junction pixels to adjacent open ends, at most one junction per
  // end per sweep; attached junctions expose new ends to the next sweep.
  std::vector<PixelCoord> junctions;
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x)
      if (map.at(x, y) && junction[idx(x, y)]) junctions.push_back({x, y});

  bool progress = true;
  while (progress) {
    progress = false;
    struct End {
      std::size_t frag;
      bool back;
      PixelCoord pixel;
      bool used = false;
    };
    std::vector<End> ends;
    for (std::size_t f = 0; f < frags.size(); ++f) {
      if (frags[f].closed()) continue;
      ends.push_back({f, true, frags[f].pixels.back()});
      if (frags[f].pixels.size() > 1)
        ends.push_back({f, false, frags[f].pixels.front()});
    }
    for (const PixelCoord& j : junctions) {
      if (claimed[idx(j.x, j.y)]) continue;
      for (auto& e : ends) {
        if (e.used || !adjacent8(j, e.pixel)) continue;
        if (e.back)
          frags[e.frag].pixels.push_back(j);
        else
          frags[e.frag].pixels.insert(frags[e.frag].pixels.begin(), j);
        claimed[idx(j.x, j.y)] = 1;
        e.used = true;
        progress = true;
        break;
      }
    }
  }

  // Remaining junction clusters (blobs, isolated crossings) become chains
  // of their own.
  for (const PixelCoord& j : junctions) {
    if (claimed[idx(j.x, j.y)]) continue;
    ContourFragment frag;
    PixelCoord cur = j;
    claimed[idx(cur.x, cur.y)] = 1;
    frag.pixels.push_back(cur);
    for (;;) {
      bool advanced = false;
      for (const auto& o : detail::kNeigh) {
        const int nx = cur.x + o[0], ny = cur.y + o[1];
        if (!map.in_bounds(nx, ny)) continue;
        const std::size_t k = idx(nx, ny);
        if (!map.at(nx, ny) || claimed[k] || !junction[k]) continue;
        cur = {nx, ny};
        claimed[k] = 1;
        frag.pixels.push_back(cur);
        advanced = true;
        break;
      }
      if (!advanced) break;
    }
    frags.push_back(std::move(frag));
  }

  return frags;
}

namespace detail {

// Total-least-squares line direction of a pixel window (principal axis of
// the scatter). Returns a unit vector; orientation is resolved by the
// caller.
inline std::pair<double, double> tls_direction(
    const std::vector<PixelCoord>& pts, std::size_t begin, std::size_t count) {
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    mx += pts[begin + i].x;
    my += pts[begin + i].y;
  }
  mx /= static_cast<double>(count);
  my /= static_cast<double>(count);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double dx = pts[begin + i].x - mx;
    const double dy = pts[begin + i].y - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 && syy == 0.0)
    throw std::runtime_error("endpoint fit: degenerate window");
  const double a = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
  return {std::cos(a), std::sin(a)};
}

inline Keypoint end_keypoint(const std::vector<PixelCoord>& pixels, bool back,
                             int fit_window) {
  const std::size_t n = pixels.size();
  const std::size_t k =
      std::min<std::size_t>(static_cast<std::size_t>(fit_window), n);
  const std::size_t begin = back ? n - k : 0;
  auto [dx, dy] = tls_direction(pixels, begin, k);
  const PixelCoord end = back ? pixels.back() : pixels.front();
  const PixelCoord inner = back ? pixels[n - 2] : pixels[1];
  double cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    cx += pixels[begin + i].x;
    cy += pixels[begin + i].y;
  }
  cx /= static_cast<double>(k);
  cy /= static_cast<double>(k);
  // Point away from the fragment body: first by the window centroid, with
  // the neighbouring pixel as a tie-break for symmetric windows.
  double ref_x = end.x - cx, ref_y = end.y - cy;
  if (ref_x * dx + ref_y * dy == 0.0) {
    ref_x = end.x - inner.x;
    ref_y = end.y - inner.y;
  }
  if (ref_x * dx + ref_y * dy < 0.0) {
    dx = -dx;
    dy = -dy;
  }
  Keypoint kp;
  kp.x = end.x;
  kp.y = end.y;
  kp.theta = wrap_angle(std::atan2(dy, dx));
  kp.weight = 1.0;
  kp.role = Role::Auto;
  return kp;
}

}  // namespace detail

// Keypoints for the two ends of an open fragment, headings pointing off the
// ends. Returned in order [front end, back end].
inline std::vector<Keypoint> endpoint_keypoints(const ContourFragment& frag,
                                                int fit_window = 5) {
  if (fit_window < 2)
    throw std::invalid_argument("endpoint_keypoints: fit_window must be >= 2");
  if (frag.closed()) return {};
  if (frag.pixels.size() < 2)
    throw std::invalid_argument("endpoint_keypoints: fragment too short");
  return {detail::end_keypoint(frag.pixels, false, fit_window),
          detail::end_keypoint(frag.pixels, true, fit_window)};
}

// Keypoints where edge contours meet a masked region: the mask is cut out
// of the edge map, and every resulting fragment end that touches the mask
// yields one Auto keypoint oriented into the mask.
inline KeypointSet mask_keypoints(const BinaryMap& edges, const BinaryMap& mask,
                                  int fit_window = 5) {
  if (edges.width != mask.width || edges.height != mask.height)
    throw std::invalid_argument("mask_keypoints: edge and mask sizes differ");
  BinaryMap cut(edges.width, edges.height);
  for (int y = 0; y < edges.height; ++y)
    for (int x = 0; x < edges.width; ++x)
      cut.set(x, y, edges.at(x, y) && !mask.at(x, y));

  auto touches_mask = [&](PixelCoord p) {
    for (const auto& o : detail::kNeigh) {
      const int nx = p.x + o[0], ny = p.y + o[1];
      if (mask.in_bounds(nx, ny) && mask.at(nx, ny)) return true;
    }
    return false;
  };

  KeypointSet out;
  for (const ContourFragment& frag : trace_contours(cut)) {
    if (frag.closed() || frag.pixels.size() < 2) continue;
    const auto ends = endpoint_keypoints(frag, fit_window);
    if (touches_mask(frag.pixels.front())) out.push_back(ends[0]);
    if (touches_mask(frag.pixels.back())) out.push_back(ends[1]);
  }
  return out;
}

}  // namespace scf
