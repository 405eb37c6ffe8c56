// SPDX-License-Identifier: MIT
//
// scf: compute completion fields, trace paths, extract keypoints, run the
// particle cross-check, drive the end-to-end pipelines, and score results.
//
// Exit codes: 0 success, 1 argument or file errors, 2 numerical failures
// (unstable parameters, degenerate fields), 3 trace did not converge.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "scf/scf.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitUnconverged = 3;

struct GridArg {
  int w = 0, h = 0, t = 0;
};

scf::GridSpec parse_grid(const std::string& s) {
  GridArg g;
  char tail = 0;
  if (std::sscanf(s.c_str(), "%dx%dx%d%c", &g.w, &g.h, &g.t, &tail) != 3)
    throw scf::parse_error("--grid expects WxHxT, e.g. 32x32x36");
  scf::GridSpec spec;
  spec.width_cells = g.w;
  spec.height_cells = g.h;
  spec.theta_cells = g.t;
  scf::validate(spec);
  return spec;
}

std::pair<double, double> parse_point(const std::string& s, const char* flag) {
  double x = 0.0, y = 0.0;
  char tail = 0;
  if (std::sscanf(s.c_str(), "%lf,%lf%c", &x, &y, &tail) != 2)
    throw scf::parse_error(std::string(flag) + " expects X,Y");
  return {x, y};
}

// Shared numeric flags for the field and oracle commands.
struct WalkFlags {
  std::string grid;
  std::optional<double> sigma, tau;
  std::optional<int> tmax;
  std::string boundary = "absorbing";
  std::string backend = "fd";

  void attach(CLI::App* cmd) {
    cmd->add_option("--grid", grid, "state space as WxHxT (theta bins)")
        ->required();
    cmd->add_option("--sigma", sigma, "heading diffusion per step, radians");
    cmd->add_option("--tau", tau, "decay constant, steps");
    cmd->add_option("--tmax", tmax, "propagation horizon, steps");
    cmd->add_option("--boundary", boundary, "absorbing|periodic")
        ->check(CLI::IsMember({"absorbing", "periodic"}));
    cmd->add_option("--backend", backend, "fd|conv")
        ->check(CLI::IsMember({"fd", "conv"}));
  }

  scf::GridSpec spec() const { return parse_grid(grid); }

  scf::WalkParams params(const scf::GridSpec& g) const {
    scf::WalkParams p = scf::default_walk_params(g);
    if (sigma) p.sigma = *sigma;
    if (tau) p.tau = *tau;
    if (tmax) p.t_max = *tmax;
    return p;
  }

  scf::BoundaryMode mode() const {
    return boundary == "periodic" ? scf::BoundaryMode::PeriodicSpatial
                                  : scf::BoundaryMode::Absorbing;
  }

  scf::Backend be() const {
    return backend == "conv" ? scf::Backend::Convolution
                             : scf::Backend::FiniteDifference;
  }
};

void write_outputs(const scf::Field3D& f, const std::string& out,
                   const std::string& render) {
  scf::write_field_dump(f, out);
  if (!render.empty()) scf::write_pgm(scf::render_field(f), render);
}

// Role mix decides what the field means: sources alone give the forward
// visit density, sinks alone the arrival likelihood, both the completion
// field, and an all-auto set the assignment-marginalized field.
int run_compute(const WalkFlags& wf, const std::string& kp_path,
                const std::string& out, const std::string& render) {
  const scf::KeypointSet kps = scf::read_keypoint_file(kp_path);
  const scf::GridSpec g = wf.spec();
  const scf::WalkParams params = wf.params(g);
  bool src = false, snk = false, aut = false;
  for (const scf::Keypoint& k : kps) {
    if (k.role == scf::Role::Source) src = true;
    if (k.role == scf::Role::Sink) snk = true;
    if (k.role == scf::Role::Auto) aut = true;
  }
  scf::Field3D f;
  if (aut)
    f = scf::marginalized_field(kps, g, params, wf.mode(), wf.be());
  else if (src && snk)
    f = scf::completion_field(kps, g, params, wf.mode(), wf.be());
  else if (src)
    f = scf::source_field(kps, g, params, wf.mode(), wf.be());
  else if (snk)
    f = scf::sink_field(kps, g, params, wf.mode(), wf.be());
  else
    throw scf::parse_error("keypoint file is empty");
  write_outputs(f, out, render);
  return 0;
}

int run_trace(const std::string& field_path, const std::string& from,
              const std::string& to, const scf::TraceParams& tp,
              const std::string& out) {
  const scf::Field3D f = scf::read_field_dump(field_path);
  const scf::VectorField2D vf = scf::extract_vector_field(f);
  const auto [sx, sy] = parse_point(from, "--from");
  const auto [ex, ey] = parse_point(to, "--to");
  const scf::TracedPath p = scf::trace_path(vf, sx, sy, ex, ey, tp);
  scf::write_path_file(p, out);
  if (!p.converged) {
    const char* why = p.reason == scf::TraceStop::Stall ? "stall"
                      : p.reason == scf::TraceStop::DomainExit
                          ? "left the domain"
                          : "step limit";
    std::cerr << "trace: did not converge (" << why << ") after "
              << p.steps_taken << " steps\n";
    return kExitUnconverged;
  }
  return 0;
}

int run_keypoints(const std::string& edges_path, const std::string& mask_path,
                  int window, const std::string& out) {
  const scf::BinaryMap edges = scf::to_binary(scf::read_pgm(edges_path));
  scf::KeypointSet kps;
  if (mask_path.empty()) {
    for (const scf::ContourFragment& frag : scf::trace_contours(edges)) {
      if (frag.closed() || frag.pixels.size() < 2) continue;
      for (const scf::Keypoint& k : scf::endpoint_keypoints(frag, window))
        kps.push_back(k);
    }
  } else {
    kps = scf::mask_keypoints(edges, scf::to_binary(scf::read_pgm(mask_path)),
                              window);
  }
  scf::write_keypoint_file(kps, out);
  return 0;
}

int run_oracle(const WalkFlags& wf, const std::string& kp_path,
               std::int64_t walkers, std::uint64_t seed, double sink_radius,
               std::optional<double> window, const std::string& out,
               const std::string& render) {
  const scf::KeypointSet kps = scf::read_keypoint_file(kp_path);
  const scf::GridSpec g = wf.spec();
  scf::WalkerConfig cfg;
  cfg.n_walkers = walkers;
  cfg.rng_seed = seed;
  cfg.params = wf.params(g);
  cfg.sink_radius = sink_radius;
  cfg.sink_theta_window = window;
  cfg.boundary = wf.mode();
  bool snk = false, aut = false;
  for (const scf::Keypoint& k : kps) {
    if (k.role == scf::Role::Sink) snk = true;
    if (k.role == scf::Role::Auto) aut = true;
  }
  if (aut)
    throw scf::parse_error(
        "oracle needs explicit source/sink roles (auto is not simulated)");
  const scf::WalkHistogram h = snk ? scf::simulate_completion_histogram(kps, g, cfg)
                                   : scf::simulate_source_histogram(kps, g, cfg);
  write_outputs(h.field, out, render);
  std::cout << "launched=" << h.launched << " accepted=" << h.accepted
            << " survivors=" << h.survivors << "\n";
  if (snk && h.accepted == 0) {
    std::cerr << "oracle: no walker reached a sink within the budget\n";
    return kExitNumerical;
  }
  return 0;
}

int run_pipeline(const std::string& image_path, const std::string& mode,
                 const std::string& mask_path, const scf::PipelineConfig& cfg,
                 const std::string& out) {
  scf::BinaryMap result;
  if (mode == "guide") {
    if (mask_path.empty())
      throw scf::parse_error("pipeline --mode guide needs --mask");
    const scf::BinaryMap edges = scf::to_binary(scf::read_pgm(image_path));
    const scf::BinaryMap mask = scf::to_binary(scf::read_pgm(mask_path));
    result = scf::guide_contours(edges, mask, cfg).completed;
  } else {
    result = scf::complete_in_noise(scf::read_pgm(image_path), cfg);
  }
  scf::write_pgm(scf::to_image(result), out);
  return 0;
}

int run_score_field(const std::string& field_path, const std::string& missing,
                    const std::string& normalization) {
  const scf::Field3D f = scf::read_field_dump(field_path);
  const scf::BinaryMap miss = scf::to_binary(scf::read_pgm(missing));
  const scf::ScoreNormalization norm = normalization == "cosine"
                                           ? scf::ScoreNormalization::Cosine
                                           : scf::ScoreNormalization::Raw;
  const scf::ScoreReport r = scf::completion_score(f, miss, norm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", r.score);
  std::cout << "score=" << buf << " normalization=" << normalization << "\n";
  return 0;
}

int run_score_maps(const std::string& pred, const std::string& truth,
                   int tol) {
  const scf::PRF r = scf::prf(scf::to_binary(scf::read_pgm(pred)),
                              scf::to_binary(scf::read_pgm(truth)), tol);
  char buf[128];
  std::snprintf(buf, sizeof buf, "precision=%.10g recall=%.10g f1=%.10g",
                r.precision, r.recall, r.f1);
  std::cout << buf << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochastic completion fields: contour completion toolkit"};
  app.require_subcommand(1);

  // compute
  auto* compute = app.add_subcommand(
      "compute", "propagate keypoints into a completion field dump");
  WalkFlags cwf;
  cwf.attach(compute);
  std::string c_kps, c_out, c_render;
  compute->add_option("--keypoints", c_kps, "keypoint text file")->required();
  compute->add_option("--out", c_out, "field dump to write")->required();
  compute->add_option("--render", c_render, "also write a PGM rendering");

  // trace
  auto* trace = app.add_subcommand("trace", "trace a path through a field dump");
  std::string t_field, t_from, t_to, t_out;
  scf::TraceParams t_params;
  trace->add_option("--field", t_field, "field dump")->required();
  trace->add_option("--from", t_from, "start as X,Y")->required();
  trace->add_option("--to", t_to, "end as X,Y")->required();
  trace->add_option("--step", t_params.step_size, "step size, cells");
  trace->add_option("--radius", t_params.radius, "termination radius, cells");
  trace->add_option("--max-steps", t_params.max_steps,
                    "step limit (0: 8*(W+H))");
  trace->add_option("--out", t_out, "path file to write")->required();

  // keypoints
  auto* keypoints = app.add_subcommand(
      "keypoints", "extract endpoint keypoints from an edge map");
  std::string k_edges, k_mask, k_out;
  int k_window = 5;
  keypoints->add_option("--edges", k_edges, "edge map PGM (dark = edge)")
      ->required();
  keypoints->add_option("--mask", k_mask,
                        "mask PGM; only fragment ends at the mask emit");
  keypoints->add_option("--window", k_window, "tangent fit window, pixels");
  keypoints->add_option("--out", k_out, "keypoint file to write")->required();

  // oracle
  auto* oracle = app.add_subcommand(
      "oracle", "particle-simulation cross-check of a field");
  WalkFlags owf;
  owf.attach(oracle);
  std::string o_kps, o_out, o_render;
  std::int64_t o_walkers = 100000;
  std::uint64_t o_seed = 1;
  double o_sink_radius = 0.75;
  std::optional<double> o_window;
  oracle->add_option("--keypoints", o_kps, "keypoint text file")->required();
  oracle->add_option("--walkers", o_walkers, "number of walkers");
  oracle->add_option("--seed", o_seed, "RNG seed");
  oracle->add_option("--sink-radius", o_sink_radius,
                     "sink acceptance radius, cells");
  oracle->add_option("--theta-window", o_window,
                     "sink heading half-window, radians (default 2*dtheta)");
  oracle->add_option("--out", o_out, "histogram dump to write")->required();
  oracle->add_option("--render", o_render, "also write a PGM rendering");

  // pipeline
  auto* pipeline = app.add_subcommand(
      "pipeline", "end-to-end guide or noise-completion flow");
  std::string p_image, p_mode, p_mask, p_out;
  scf::PipelineConfig p_cfg;
  std::optional<double> p_sigma, p_tau;
  std::optional<int> p_tmax;
  pipeline->add_option("--image", p_image,
                       "edge-map PGM (guide) or grayscale PGM (noise)")
      ->required();
  pipeline->add_option("--mode", p_mode, "guide|noise")
      ->required()
      ->check(CLI::IsMember({"guide", "noise"}));
  pipeline->add_option("--mask", p_mask, "mask PGM (guide mode)");
  pipeline->add_option("--factor", p_cfg.downscale_factor,
                       "downscale factor (noise mode)");
  pipeline->add_option("--threshold", p_cfg.detector_threshold,
                       "edge detector threshold, fraction of max gradient");
  pipeline->add_option("--theta-cells", p_cfg.theta_cells,
                       "heading bins of the field grid");
  pipeline->add_option("--sigma", p_sigma, "heading diffusion per step");
  pipeline->add_option("--tau", p_tau, "decay constant, steps");
  pipeline->add_option("--tmax", p_tmax, "propagation horizon, steps");
  pipeline->add_option("--step", p_cfg.trace.step_size, "trace step, cells");
  pipeline->add_option("--radius", p_cfg.trace.radius,
                       "trace termination radius, cells");
  pipeline->add_option("--window", p_cfg.fit_window,
                       "tangent fit window, pixels");
  pipeline->add_option("--max-keypoints", p_cfg.max_keypoints,
                       "cap on keypoints (0: none)");
  pipeline->add_option("--out", p_out, "completed edge map PGM")->required();

  // score
  auto* score = app.add_subcommand(
      "score", "score a field against missing pixels, or an edge map "
               "against truth");
  std::string s_field, s_missing, s_norm = "raw", s_pred, s_truth;
  int s_tol = 2;
  score->add_option("--field", s_field, "field dump");
  score->add_option("--missing", s_missing, "missing-pixel PGM (dark = on)");
  score->add_option("--normalization", s_norm, "raw|cosine")
      ->check(CLI::IsMember({"raw", "cosine"}));
  score->add_option("--pred", s_pred, "predicted edge PGM");
  score->add_option("--truth", s_truth, "ground-truth edge PGM");
  score->add_option("--tol", s_tol, "match tolerance, pixels");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (compute->parsed())
      return run_compute(cwf, c_kps, c_out, c_render);
    if (trace->parsed()) return run_trace(t_field, t_from, t_to, t_params, t_out);
    if (keypoints->parsed())
      return run_keypoints(k_edges, k_mask, k_window, k_out);
    if (oracle->parsed())
      return run_oracle(owf, o_kps, o_walkers, o_seed, o_sink_radius, o_window,
                        o_out, o_render);
    if (pipeline->parsed()) {
      if (p_sigma || p_tau || p_tmax) {
        // Partial overrides resolve against the image-sized grid defaults.
        const scf::GrayImage img = scf::read_pgm(p_image);
        scf::GridSpec g;
        g.width_cells = img.width;
        g.height_cells = img.height;
        g.theta_cells = p_cfg.theta_cells;
        scf::WalkParams wp = scf::default_walk_params(g);
        if (p_sigma) wp.sigma = *p_sigma;
        if (p_tau) wp.tau = *p_tau;
        if (p_tmax) wp.t_max = *p_tmax;
        p_cfg.walk = wp;
      }
      return run_pipeline(p_image, p_mode, p_mask, p_cfg, p_out);
    }
    if (score->parsed()) {
      if (!s_field.empty() && !s_missing.empty())
        return run_score_field(s_field, s_missing, s_norm);
      if (!s_pred.empty() && !s_truth.empty())
        return run_score_maps(s_pred, s_truth, s_tol);
      throw scf::parse_error(
          "score needs --field with --missing, or --pred with --truth");
    }
  } catch (const scf::stability_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const scf::degenerate_field_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return 0;
}
