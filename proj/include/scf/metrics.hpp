// SPDX-License-Identifier: MIT
#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "scf/grid.hpp"
#include "scf/keypoints.hpp"

// Quantitative scoring: how strongly a completion field supports a set of
// missing pixels, and tolerance-matched precision/recall for edge maps.

namespace scf {

enum class ScoreNormalization { Raw, Cosine };

struct ScoreReport {
  double score = 0.0;
  ScoreNormalization normalization = ScoreNormalization::Raw;
};

// Dot product of the field's per-pixel maximum over theta with the missing
// mask. Raw: the plain sum over missing pixels (linear in the field).
// Cosine: raw divided by the L2 norms of both factors, in [0, 1].
inline ScoreReport completion_score(
    const Field3D& c, const BinaryMap& missing,
    ScoreNormalization normalization = ScoreNormalization::Raw) {
  validate(c.spec);
  if (missing.width != c.spec.width_cells ||
      missing.height != c.spec.height_cells)
    throw std::invalid_argument("completion_score: map/field size mismatch");
  const int W = c.spec.width_cells, H = c.spec.height_cells,
            T = c.spec.theta_cells;
  const std::int64_t plane = static_cast<std::int64_t>(W) * H;
  double raw = 0.0, field_sq = 0.0;
  std::int64_t on = 0;
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const std::int64_t i = static_cast<std::int64_t>(y) * W + x;
      double best = c.values[static_cast<std::size_t>(i)];
      for (int t = 1; t < T; ++t)
        best = std::max(best,
                        c.values[static_cast<std::size_t>(t * plane + i)]);
      field_sq += best * best;
      if (missing.at(x, y)) {
        raw += best;
        ++on;
      }
    }
  }
  ScoreReport r;
  r.normalization = normalization;
  if (normalization == ScoreNormalization::Raw) {
    r.score = raw;
  } else {
    const double denom = std::sqrt(field_sq) * std::sqrt(static_cast<double>(on));
    r.score = denom > 0.0 ? raw / denom : 0.0;
  }
  return r;
}

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int match_tolerance = 0;
};

namespace detail {

// ON iff any source pixel lies within Chebyshev distance <= tol.
inline BinaryMap box_dilate(const BinaryMap& m, int tol) {
  if (tol == 0) return m;
  // Separable: horizontal run-max, then vertical.
  BinaryMap horiz(m.width, m.height), out(m.width, m.height);
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x) {
      bool on = false;
      for (int d = -tol; d <= tol && !on; ++d) {
        const int xx = x + d;
        on = xx >= 0 && xx < m.width && m.at(xx, y);
      }
      if (on) horiz.set(x, y, true);
    }
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x) {
      bool on = false;
      for (int d = -tol; d <= tol && !on; ++d) {
        const int yy = y + d;
        on = yy >= 0 && yy < m.height && horiz.at(x, yy);
      }
      if (on) out.set(x, y, true);
    }
  return out;
}

// Fraction of ON pixels of `of` that land on the tol-dilated `near`;
// 0 when `of` is empty.
inline double matched_fraction(const BinaryMap& of, const BinaryMap& near,
                               int tol) {
  const BinaryMap region = box_dilate(near, tol);
  std::int64_t on = 0, hit = 0;
  for (int y = 0; y < of.height; ++y)
    for (int x = 0; x < of.width; ++x)
      if (of.at(x, y)) {
        ++on;
        if (region.at(x, y)) ++hit;
      }
  return on > 0 ? static_cast<double>(hit) / static_cast<double>(on) : 0.0;
}

}  // namespace detail

// Set-distance matching: a predicted pixel is a true positive if any truth
// pixel is within Chebyshev distance <= tolerance, and symmetrically for
// recall. No one-to-one assignment. Empty denominators score 0.
inline PRF prf(const BinaryMap& predicted, const BinaryMap& truth,
               int tolerance) {
  if (predicted.width != truth.width || predicted.height != truth.height)
    throw std::invalid_argument("prf: map dimensions differ");
  if (tolerance < 0) throw std::invalid_argument("prf: tolerance must be >= 0");
  PRF r;
  r.match_tolerance = tolerance;
  r.precision = detail::matched_fraction(predicted, truth, tolerance);
  r.recall = detail::matched_fraction(truth, predicted, tolerance);
  const double pr = r.precision + r.recall;
  r.f1 = pr > 0.0 ? 2.0 * r.precision * r.recall / pr : 0.0;
  return r;
}

}  // namespace scf
