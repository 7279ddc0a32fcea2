// anchorweave command line: retrieval, loop runs, revisit evaluation and the
// session server.

#include <csignal>
#include <cstdio>
#include <iostream>

#include "CLI11.hpp"

#include "anchorweave/error.hpp"
#include "anchorweave/evaluation.hpp"
#include "anchorweave/http_server.hpp"
#include "anchorweave/io.hpp"
#include "anchorweave/kernels.hpp"
#include "anchorweave/metrics.hpp"

namespace aw = anchorweave;
namespace fs = std::filesystem;
using aw::io::Json;

namespace {

std::string read_text(const fs::path& p) {
  const auto bytes = aw::read_file(p.string());
  return std::string(bytes.begin(), bytes.end());
}

aw::LoopConfig load_config(const std::string& path) {
  if (path.empty()) return {};
  return aw::io::loop_config_from_json(aw::io::read_json(path));
}

int cmd_retrieve(const std::string& bank_dir, const std::string& traj_file, const std::string& intr_file, int d,
                 int k, double tau, int scale, double radius) {
  const aw::MemoryBank bank = aw::io::load_bank(bank_dir);
  if (bank.empty()) throw aw::Error(aw::ErrorCode::validation, "bank is empty");
  const aw::Intrinsics intr = intr_file.empty() ? bank.latest().cloud.capture_intrinsics
                                                : aw::io::intrinsics_from_json(aw::io::read_json(intr_file));
  const std::vector<aw::Pose> traj = aw::io::poses_from_json(aw::io::read_json(traj_file));
  aw::RetrievalConfig cfg;
  cfg.budget = k;
  cfg.tau = tau;
  cfg.coverage_scale = scale;
  cfg.splat_radius = radius;
  const auto chunks = aw::assembly::plan_chunks(traj, d);
  Json out = Json::array();
  for (const auto& r : aw::retrieval::retrieve_all_chunks(bank, chunks, intr, cfg)) out.push_back(aw::io::to_json(r));
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_build_bank(std::uint64_t seed, const std::string& config, const std::string& out) {
  const aw::LoopConfig cfg = load_config(config);
  const aw::SceneSpec spec = aw::scene::make_scene(seed);
  const auto poses = aw::loop::default_context_trajectory(cfg.context_frames);
  const auto context = aw::loop::render_context(spec, poses, cfg.intrinsics);
  const auto estimator = aw::ground_truth_estimator(spec);
  const aw::SessionState state = aw::loop::start_session(cfg, context, *estimator);
  aw::io::save_bank(out, state.bank);
  aw::io::write_json(fs::path(out) / "scene.json", aw::io::to_json(spec));
  aw::io::write_json(fs::path(out) / "poses.json", aw::io::poses_to_json(poses));
  std::cout << "wrote " << state.bank.size() << " memories to " << out << "\n";
  return 0;
}

int cmd_run_loop(const std::optional<std::uint64_t>& seed, const std::string& context_dir, const std::string& script,
                 const std::string& config, const std::string& out, bool export_anchors) {
  const aw::LoopConfig cfg = load_config(config);
  const aw::ActionScript actions = aw::actions::parse_script(read_text(script));

  aw::SceneSpec spec;
  aw::SessionState start;
  std::shared_ptr<aw::GeometryEstimator> estimator;
  if (seed) {
    spec = aw::scene::make_scene(*seed);
    estimator = aw::ground_truth_estimator(spec);
    const auto context =
        aw::loop::render_context(spec, aw::loop::default_context_trajectory(cfg.context_frames), cfg.intrinsics);
    start = aw::loop::start_session(cfg, context, *estimator);
  } else {
    spec = aw::io::scene_from_json(aw::io::read_json(fs::path(context_dir) / "scene.json"));
    estimator = aw::ground_truth_estimator(spec);
    start = aw::loop::resume_session(cfg, aw::io::load_bank(context_dir));
  }

  const aw::SessionState done = aw::loop::run_script(start, actions, *estimator);
  aw::io::export_session(out, done);

  Json frames = Json::array();
  double psnr_sum = 0.0, ssim_sum = 0.0, hole_sum = 0.0;
  std::size_t scored = 0;
  for (const aw::GeneratedFrame& g : done.generated) {
    const aw::RgbImage truth = aw::scene::render_ground_truth(spec, g.pose, cfg.intrinsics).rgb;
    const aw::Mask keep = aw::metrics::invert_mask(g.composite.hole_mask);
    const double holes = static_cast<double>(aw::count_set(g.composite.hole_mask)) /
                         static_cast<double>(keep.pixels().size());
    hole_sum += holes;
    Json f = {{"index", g.index}, {"hole_fraction", holes}};
    if (aw::count_set(keep) > 0) {
      const double p = aw::metrics::psnr(g.composite.rgb, truth, keep);
      const double s = aw::metrics::ssim(g.composite.rgb, truth, keep);
      f["psnr"] = p;
      f["ssim"] = s;
      psnr_sum += p;
      ssim_sum += s;
      ++scored;
    }
    frames.push_back(std::move(f));
  }
  Json coverage = Json::array();
  for (const auto& seg : done.trace) {
    for (const auto& r : seg.retrievals) coverage.push_back(r.final_coverage_fraction);
  }
  const double n = static_cast<double>(done.generated.size());
  aw::io::write_json(fs::path(out) / "metrics.json",
                     {{"frames", frames},
                      {"generated", done.generated.size()},
                      {"mean_psnr", scored ? psnr_sum / static_cast<double>(scored) : 0.0},
                      {"mean_ssim", scored ? ssim_sum / static_cast<double>(scored) : 0.0},
                      {"mean_hole_fraction", n > 0 ? hole_sum / n : 0.0},
                      {"chunk_coverage", coverage}});

  if (export_anchors) {
    for (std::size_t s = 0; s < done.trace.size(); ++s) {
      const auto& seg = done.trace[s];
      const aw::AnchorBundle bundle = aw::assembly::assemble(done.bank, seg.chunks, seg.retrievals, cfg.budget,
                                                             cfg.intrinsics, cfg.splat_radius);
      aw::io::export_bundle(fs::path(out) / "anchors" / ("segment_" + std::to_string(s)), bundle, cfg.chunk_length);
    }
  }
  std::cout << "generated " << done.generated.size() << " frames into " << out << "\n";
  return 0;
}

int cmd_eval(int scenes, const std::vector<int>& budgets, bool local_global, const std::string& config,
             const std::string& out) {
  const aw::LoopConfig cfg = load_config(config);
  Json report;
  const auto rows = aw::eval::budget_trend(budgets, scenes, cfg, true);
  std::printf("%-4s %10s %10s %12s\n", "K", "PSNR", "SSIM", "hole frac");
  Json trend = Json::array();
  for (const auto& r : rows) {
    std::printf("%-4d %10.3f %10.4f %12.3f\n", r.budget, r.mean_psnr, r.mean_ssim, r.mean_hole_fraction);
    trend.push_back({{"K", r.budget},
                     {"mean_psnr", r.mean_psnr},
                     {"mean_ssim", r.mean_ssim},
                     {"mean_hole_fraction", r.mean_hole_fraction},
                     {"per_scene_psnr", r.per_scene_psnr}});
  }
  report["budget_trend"] = trend;
  if (local_global) {
    Json lg = Json::array();
    std::printf("\n%-6s %12s %12s\n", "seed", "local PSNR", "global PSNR");
    for (const auto& r : aw::eval::local_vs_global(scenes, cfg)) {
      std::printf("%-6llu %12.3f %12.3f\n", static_cast<unsigned long long>(r.seed), r.local_psnr, r.global_psnr);
      lg.push_back({{"seed", r.seed}, {"local_psnr", r.local_psnr}, {"global_psnr", r.global_psnr}});
    }
    report["local_vs_global"] = lg;
  }
  if (!out.empty()) aw::io::write_json(out, report);
  return 0;
}

aw::service::HttpServer* g_server = nullptr;

int cmd_serve(const std::string& host, int port, std::uint64_t seed, std::size_t max_sessions,
              const std::string& bank_root) {
  aw::service::ManagerOptions opts;
  opts.default_scene_seed = seed;
  opts.max_sessions = max_sessions;
  opts.bank_root = bank_root;
  aw::service::SessionManager manager(opts);
  aw::service::HttpServer server(manager);
  const int bound = server.bind(host, port);
  g_server = &server;
  std::signal(SIGINT, [](int) {
    if (g_server) g_server->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_server) g_server->stop();
  });
  std::cout << "listening on " << host << ":" << bound << " (kernels: "
            << aw::kernels::to_string(aw::kernels::active_isa()) << ")" << std::endl;
  server.listen();
  g_server = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Local point-cloud memory, coverage retrieval and anchor fusion"};
  app.require_subcommand(1);

  std::string bank_dir, traj_file, intr_file;
  int chunk_len = 8, budget = 4, coverage_scale = 4;
  double tau = 0.01, radius = 1.0;
  auto* retrieve = app.add_subcommand("retrieve", "Greedy coverage retrieval for a pose trajectory");
  retrieve->add_option("--bank", bank_dir, "Bank directory")->required()->check(CLI::ExistingDirectory);
  retrieve->add_option("--trajectory", traj_file, "JSON array of 4x4 camera-to-world poses")
      ->required()
      ->check(CLI::ExistingFile);
  retrieve->add_option("--intrinsics", intr_file, "Intrinsics JSON (default: the bank's)")->check(CLI::ExistingFile);
  retrieve->add_option("--chunk-len", chunk_len, "Chunk length D")->check(CLI::PositiveNumber);
  retrieve->add_option("--budget", budget, "Retrieval budget K")->check(CLI::PositiveNumber);
  retrieve->add_option("--tau", tau, "FoV overlap threshold")->check(CLI::Range(0.0, 1.0));
  retrieve->add_option("--coverage-scale", coverage_scale, "Coverage grid downsampling")->check(CLI::PositiveNumber);
  retrieve->add_option("--splat-radius", radius, "Splat radius in pixels")->check(CLI::NonNegativeNumber);

  std::uint64_t scene_seed = 0;
  std::string context_dir, script_file, config_file, out_dir;
  bool export_anchors = false;
  auto* run = app.add_subcommand("run-loop", "Run the update-retrieve-generate loop over an action script");
  auto* scene_opt = run->add_option("--scene", scene_seed, "Scene seed (context rendered from the default sweep)");
  auto* ctx_opt = run->add_option("--context", context_dir, "Bank directory written by build-bank")
                      ->check(CLI::ExistingDirectory);
  scene_opt->excludes(ctx_opt);
  run->add_option("--script", script_file, "Action script: lines of 'action count'")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--config", config_file, "Loop config JSON")->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_flag("--export-anchors", export_anchors, "Also write per-segment anchor bundles");

  int scenes = 10;
  std::vector<int> budgets{1, 2, 4};
  bool local_global = false;
  std::string eval_out, eval_config;
  auto* ev = app.add_subcommand("eval-revisit", "70/49/21 partial-revisit evaluation over seeded scenes");
  ev->add_option("--scenes", scenes, "Number of seeded scenes")->check(CLI::PositiveNumber);
  ev->add_option("--budgets", budgets, "Retrieval budgets to compare")->delimiter(',');
  ev->add_flag("--local-global", local_global, "Also compare local anchors with one fused global cloud");
  ev->add_option("--config", eval_config, "Loop config JSON")->check(CLI::ExistingFile);
  ev->add_option("--out", eval_out, "Write the metrics table as JSON");

  std::string host = "127.0.0.1", bank_root;
  int port = 8080;
  std::uint64_t default_seed = 0;
  std::size_t max_sessions = 16;
  auto* serve = app.add_subcommand("serve", "Serve interactive sessions over HTTP");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port (0 picks a free one)")->check(CLI::Range(0, 65535));
  serve->add_option("--scene-seed-default", default_seed, "Scene seed when a request gives none");
  serve->add_option("--max-sessions", max_sessions, "Concurrent session limit")->check(CLI::PositiveNumber);
  serve->add_option("--bank-root", bank_root, "Directory of named context banks")->check(CLI::ExistingDirectory);

  std::uint64_t bank_seed = 0;
  std::string bank_config, bank_out;
  auto* build = app.add_subcommand("build-bank", "Render a scene's context sweep and save its memory bank");
  build->add_option("--scene", bank_seed, "Scene seed");
  build->add_option("--config", bank_config, "Loop config JSON")->check(CLI::ExistingFile);
  build->add_option("--out", bank_out, "Output bank directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*retrieve) {
      return cmd_retrieve(bank_dir, traj_file, intr_file, chunk_len, budget, tau, coverage_scale, radius);
    }
    if (*run) {
      if (!*scene_opt && !*ctx_opt) throw CLI::RequiredError("--scene or --context");
      return cmd_run_loop(*scene_opt ? std::optional(scene_seed) : std::nullopt, context_dir, script_file,
                          config_file, out_dir, export_anchors);
    }
    if (*ev) return cmd_eval(scenes, budgets, local_global, eval_config, eval_out);
    if (*serve) return cmd_serve(host, port, default_seed, max_sessions, bank_root);
    if (*build) return cmd_build_bank(bank_seed, bank_config, bank_out);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const aw::Error& e) {
    std::cerr << "error (" << aw::to_string(e.code()) << "): " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
