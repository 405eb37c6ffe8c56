// SPDX-License-Identifier: MIT
#pragma once

#include <stdexcept>
#include <vector>

#include "scf/keypoints.hpp"

// Grayscale raster with intensities in [0, 1]. Binary maps follow the
// ink-on-paper convention: ON means dark.

namespace scf {

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;  // row-major, x fastest

  GrayImage() = default;
  GrayImage(int w, int h, double fill = 0.0) : width(w), height(h) {
    if (w <= 0 || h <= 0)
      throw std::invalid_argument("image: dimensions must be positive");
    pixels.assign(static_cast<std::size_t>(w) * h, fill);
  }

  double at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
  double& at(int x, int y) {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
};

// ON where the image is darker than the threshold.
inline BinaryMap to_binary(const GrayImage& img, double threshold = 0.5) {
  BinaryMap m(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      if (img.at(x, y) < threshold) m.set(x, y, true);
  return m;
}

// ON pixels render as ink (0.0), OFF as paper (1.0).
inline GrayImage to_image(const BinaryMap& m) {
  GrayImage img(m.width, m.height, 1.0);
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x)
      if (m.at(x, y)) img.at(x, y) = 0.0;
  return img;
}

}  // namespace scf
