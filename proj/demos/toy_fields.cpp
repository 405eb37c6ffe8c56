// SPDX-License-Identifier: MIT
//
// Renders the three classic toy configurations (a collinear pair, a circle
// of tangential keypoints, a square of corner keypoints) as PGM images with
// their traced completions, into the current directory.

#include <cmath>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include "scf/scf.hpp"

namespace {

scf::GridSpec grid32() {
  scf::GridSpec g;
  g.width_cells = 32;
  g.height_cells = 32;
  g.theta_cells = 36;
  return g;
}

void overlay_path(scf::GrayImage& img, const scf::TracedPath& p) {
  for (const auto& [x, y] : p.points) {
    const int xi = static_cast<int>(std::lround(x));
    const int yi = static_cast<int>(std::lround(y));
    if (xi >= 0 && xi < img.width && yi >= 0 && yi < img.height)
      img.at(xi, yi) = 0.0;
  }
}

void collinear() {
  const scf::GridSpec g = grid32();
  scf::KeypointSet kps{{8.0, 16.0, 0.0, 1.0, scf::Role::Source},
                       {24.0, 16.0, 0.0, 1.0, scf::Role::Sink}};
  const scf::Field3D c =
      scf::completion_field(kps, g, scf::default_walk_params(g));
  scf::GrayImage img = scf::render_field(c);
  const scf::TracedPath p =
      scf::trace_path(scf::extract_vector_field(c), 8, 16, 24, 16);
  overlay_path(img, p);
  scf::write_pgm(img, "demo_collinear.pgm");
  std::cout << "demo_collinear.pgm: straight completion, "
            << p.points.size() << " path points\n";
}

void circle() {
  const scf::GridSpec g = grid32();
  const double cx = 16.0, cy = 16.0, r = 10.0;
  // Three 80-degree arcs alternate with three 40-degree gaps; keypoints sit
  // at the arc ends with tangents pointing into the gaps.
  scf::KeypointSet kps;
  for (int gap = 0; gap < 3; ++gap) {
    const double a0 = gap * 2.0 * std::numbers::pi / 3.0;
    const double a1 = a0 + 40.0 * std::numbers::pi / 180.0;
    kps.push_back({cx + r * std::cos(a0), cy + r * std::sin(a0),
                   scf::wrap_angle(a0 + std::numbers::pi / 2.0), 1.0,
                   scf::Role::Auto});
    kps.push_back({cx + r * std::cos(a1), cy + r * std::sin(a1),
                   scf::wrap_angle(a1 - std::numbers::pi / 2.0), 1.0,
                   scf::Role::Auto});
  }
  const scf::Field3D c =
      scf::marginalized_field(kps, g, scf::default_walk_params(g));
  scf::GrayImage img = scf::render_field(c);
  const scf::VectorField2D vf = scf::extract_vector_field(c);
  for (int gap = 0; gap < 3; ++gap)
    overlay_path(img, scf::trace_path(vf, kps[2 * gap].x, kps[2 * gap].y,
                                      kps[2 * gap + 1].x, kps[2 * gap + 1].y));
  scf::write_pgm(img, "demo_circle.pgm");
  std::cout << "demo_circle.pgm: circular completion across 3 gaps\n";
}

void square() {
  const scf::GridSpec g = grid32();
  const double lo = 8.0, hi = 24.0;
  // Two keypoints per corner, each aimed along one of the missing sides.
  scf::KeypointSet kps;
  auto corner = [&](double x, double y, double t1, double t2) {
    kps.push_back({x, y, scf::wrap_angle(t1), 1.0, scf::Role::Auto});
    kps.push_back({x, y, scf::wrap_angle(t2), 1.0, scf::Role::Auto});
  };
  const double pi = std::numbers::pi;
  corner(lo, lo, 0.0, pi / 2.0);
  corner(hi, lo, pi, pi / 2.0);
  corner(hi, hi, pi, 3.0 * pi / 2.0);
  corner(lo, hi, 0.0, 3.0 * pi / 2.0);
  const scf::Field3D c =
      scf::marginalized_field(kps, g, scf::default_walk_params(g));
  scf::GrayImage img = scf::render_field(c);
  const scf::VectorField2D vf = scf::extract_vector_field(c);
  overlay_path(img, scf::trace_path(vf, lo, lo, hi, lo));
  overlay_path(img, scf::trace_path(vf, hi, lo, hi, hi));
  overlay_path(img, scf::trace_path(vf, hi, hi, lo, hi));
  overlay_path(img, scf::trace_path(vf, lo, hi, lo, lo));
  scf::write_pgm(img, "demo_square.pgm");
  std::cout << "demo_square.pgm: square sides completed from corners\n";
}

}  // namespace

int main() {
  collinear();
  circle();
  square();
  return 0;
}
