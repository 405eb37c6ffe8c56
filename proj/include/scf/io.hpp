// SPDX-License-Identifier: MIT
#pragma once

#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "scf/grid.hpp"
#include "scf/image.hpp"
#include "scf/keypoints.hpp"
#include "scf/trace.hpp"

// File formats. All of them round-trip byte-identically:
//   images      binary PGM (P5), maxval 255 only
//   fields      "SCF1" magic, three u32 dims, then f32 values, all
//               little-endian, x fastest, then y, then theta
//   keypoints   text, one per line: x y theta_deg role weight
//   paths       text, one "x y" pair per line

namespace scf {

struct parse_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string read_binary_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw parse_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

inline void write_binary_file(const std::string& path,
                              const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw parse_error("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw parse_error("short write to " + path);
}

inline void put_u32le(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

inline std::uint32_t get_u32le(const std::string& s, std::size_t at) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(s[at])) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(s[at + 1])) << 8 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(s[at + 2])) << 16 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(s[at + 3])) << 24;
}

// PNM-style token reader: whitespace separates tokens, '#' starts a comment
// running to end of line.
struct PnmScanner {
  const std::string& data;
  std::size_t pos = 0;

  void skip_space_and_comments() {
    while (pos < data.size()) {
      const char c = data[pos];
      if (c == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos;
      } else {
        break;
      }
    }
  }

  int next_int(const char* what) {
    skip_space_and_comments();
    std::size_t start = pos;
    while (pos < data.size() &&
           std::isdigit(static_cast<unsigned char>(data[pos])))
      ++pos;
    if (pos == start || pos - start > 9)
      throw parse_error(std::string("pgm: expected ") + what);
    return std::stoi(data.substr(start, pos - start));
  }
};

}  // namespace detail

inline GrayImage read_pgm(const std::string& path) {
  const std::string data = detail::read_binary_file(path);
  if (data.size() < 2 || data[0] != 'P' || data[1] != '5')
    throw parse_error("pgm: not a P5 file: " + path);
  detail::PnmScanner sc{data, 2};
  const int w = sc.next_int("width");
  const int h = sc.next_int("height");
  const int maxval = sc.next_int("maxval");
  if (w <= 0 || h <= 0) throw parse_error("pgm: bad dimensions");
  if (maxval != 255) throw parse_error("pgm: only maxval 255 is supported");
  ++sc.pos;  // single whitespace byte before the raster
  const std::size_t need = static_cast<std::size_t>(w) * h;
  if (sc.pos + need > data.size()) throw parse_error("pgm: truncated raster");
  GrayImage img(w, h);
  for (std::size_t i = 0; i < need; ++i)
    img.pixels[i] =
        static_cast<unsigned char>(data[sc.pos + i]) / 255.0;
  return img;
}

inline void write_pgm(const GrayImage& img, const std::string& path) {
  std::string out = "P5\n" + std::to_string(img.width) + " " +
                    std::to_string(img.height) + "\n255\n";
  out.reserve(out.size() + img.pixels.size());
  for (const double v : img.pixels) {
    const double c = v < 0.0 ? 0.0 : v > 1.0 ? 1.0 : v;
    out.push_back(static_cast<char>(std::lround(c * 255.0)));
  }
  detail::write_binary_file(path, out);
}

// Max over theta, normalized to the peak, dark = high value.
inline GrayImage render_field(const Field3D& f) {
  const int W = f.spec.width_cells, H = f.spec.height_cells,
            T = f.spec.theta_cells;
  const std::int64_t plane = static_cast<std::int64_t>(W) * H;
  GrayImage img(W, H, 1.0);
  double peak = 0.0;
  std::vector<double> best(static_cast<std::size_t>(plane), 0.0);
  for (std::int64_t i = 0; i < plane; ++i) {
    double b = f.values[static_cast<std::size_t>(i)];
    for (int t = 1; t < T; ++t)
      b = std::max(b, f.values[static_cast<std::size_t>(t * plane + i)]);
    best[static_cast<std::size_t>(i)] = b;
    peak = std::max(peak, b);
  }
  if (peak <= 0.0) return img;  // blank page
  for (std::int64_t i = 0; i < plane; ++i)
    img.pixels[static_cast<std::size_t>(i)] =
        1.0 - best[static_cast<std::size_t>(i)] / peak;
  return img;
}

inline void write_field_dump(const Field3D& f, const std::string& path) {
  validate(f.spec);
  std::string out = "SCF1";
  detail::put_u32le(out, static_cast<std::uint32_t>(f.spec.width_cells));
  detail::put_u32le(out, static_cast<std::uint32_t>(f.spec.height_cells));
  detail::put_u32le(out, static_cast<std::uint32_t>(f.spec.theta_cells));
  out.reserve(out.size() + 4 * f.values.size());
  for (const double v : f.values)
    detail::put_u32le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  detail::write_binary_file(path, out);
}

inline Field3D read_field_dump(const std::string& path) {
  const std::string data = detail::read_binary_file(path);
  if (data.size() < 16 || data.compare(0, 4, "SCF1") != 0)
    throw parse_error("field dump: bad magic in " + path);
  GridSpec g;
  g.width_cells = static_cast<int>(detail::get_u32le(data, 4));
  g.height_cells = static_cast<int>(detail::get_u32le(data, 8));
  g.theta_cells = static_cast<int>(detail::get_u32le(data, 12));
  validate(g);
  const std::size_t n = static_cast<std::size_t>(g.cell_count());
  if (data.size() != 16 + 4 * n)
    throw parse_error("field dump: payload size mismatch in " + path);
  Field3D f(g);
  for (std::size_t i = 0; i < n; ++i)
    f.values[i] = static_cast<double>(
        std::bit_cast<float>(detail::get_u32le(data, 16 + 4 * i)));
  return f;
}

namespace detail {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace detail

inline const char* role_name(Role r) {
  switch (r) {
    case Role::Source: return "source";
    case Role::Sink: return "sink";
    default: return "auto";
  }
}

inline std::string format_keypoints(const KeypointSet& kps) {
  std::string out = "# x y theta_deg role weight\n";
  for (const Keypoint& k : kps) {
    out += detail::format_double(k.x) + " " + detail::format_double(k.y) +
           " " +
           detail::format_double(k.theta * 180.0 / std::numbers::pi) + " " +
           role_name(k.role) + " " + detail::format_double(k.weight) + "\n";
  }
  return out;
}

inline KeypointSet parse_keypoints(const std::string& text) {
  KeypointSet out;
  std::istringstream lines(text);
  std::string line;
  int lineno = 0;
  bool any_auto = false, any_explicit = false;
  while (std::getline(lines, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    double x, y, deg;
    std::string role;
    if (!(fields >> x)) continue;  // blank line
    if (!(fields >> y >> deg >> role))
      throw parse_error("keypoints: line " + std::to_string(lineno) +
                        ": need x y theta_deg role [weight]");
    Keypoint k;
    k.x = x;
    k.y = y;
    k.theta = wrap_angle(deg * std::numbers::pi / 180.0);
    if (role == "source")
      k.role = Role::Source;
    else if (role == "sink")
      k.role = Role::Sink;
    else if (role == "auto")
      k.role = Role::Auto;
    else
      throw parse_error("keypoints: line " + std::to_string(lineno) +
                        ": unknown role '" + role + "'");
    double w;
    if (fields >> w) {
      if (!(w > 0.0))
        throw parse_error("keypoints: line " + std::to_string(lineno) +
                          ": weight must be > 0");
      k.weight = w;
    }
    std::string extra;
    if (fields >> extra)
      throw parse_error("keypoints: line " + std::to_string(lineno) +
                        ": trailing fields");
    (k.role == Role::Auto ? any_auto : any_explicit) = true;
    out.push_back(k);
  }
  if (any_auto && any_explicit)
    throw parse_error("keypoints: auto and explicit roles cannot be mixed");
  return out;
}

inline KeypointSet read_keypoint_file(const std::string& path) {
  return parse_keypoints(detail::read_binary_file(path));
}

inline void write_keypoint_file(const KeypointSet& kps,
                                const std::string& path) {
  detail::write_binary_file(path, format_keypoints(kps));
}

inline std::string format_path(const TracedPath& p) {
  std::string out;
  for (const auto& [x, y] : p.points)
    out += detail::format_double(x) + " " + detail::format_double(y) + "\n";
  return out;
}

inline void write_path_file(const TracedPath& p, const std::string& path) {
  detail::write_binary_file(path, format_path(p));
}

}  // namespace scf
