#include <cstdint>
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "orbfe/commands.hpp"
#include "orbfe/config.hpp"

namespace {

// The config file is applied before CLI11 binds flag defaults, so flags
// override file values. Scanned manually because it must take effect
// before the options that it feeds are defined.
std::string prescan_config(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) return argv[i + 1];
    if (a.rfind("--config=", 0) == 0) return a.substr(9);
  }
  return "";
}

void report_log(const orbfe::CommandLog& log) {
  for (const auto& w : log.warnings) std::cerr << "warning: " << w << "\n";
  for (const auto& e : log.errors) std::cerr << "error: " << e << "\n";
}

struct RunFlags {
  orbfe::RunConfig cfg;
  std::string mode = "float";
};

void add_run_options(CLI::App* cmd, RunFlags& rf) {
  rf.mode = orbfe::arith_mode_name(rf.cfg.extractor.arith_mode);
  cmd->add_option("--config", "config file of key = value lines; flags override");
  cmd->add_option("--dataset", rf.cfg.dataset_dir, "dataset dir with left/ and right/");
  cmd->add_option("--output", rf.cfg.output_dir, "output directory")
      ->capture_default_str();
  cmd->add_option("--calib", rf.cfg.calib_path,
                  "calibration file (default <dataset>/calib.txt)");
  cmd->add_option("--threshold", rf.cfg.extractor.fast_threshold, "FAST threshold")
      ->capture_default_str();
  cmd->add_option("--max-features", rf.cfg.extractor.max_features_per_level,
                  "feature cap per pyramid level")
      ->capture_default_str();
  cmd->add_option("--mode", rf.mode, "arithmetic mode: float or fixed8")
      ->capture_default_str();
  cmd->add_option("--scale-factor", rf.cfg.extractor.scale_factor, "pyramid scale factor")
      ->capture_default_str();
  cmd->add_option("--row-tolerance", rf.cfg.strip.row_tolerance,
                  "strip vertical half-height")
      ->capture_default_str();
  cmd->add_option("--min-disparity", rf.cfg.strip.min_disparity, "minimum disparity")
      ->capture_default_str();
  cmd->add_option("--max-disparity", rf.cfg.strip.max_disparity, "maximum disparity")
      ->capture_default_str();
  cmd->add_option("--max-hamming", rf.cfg.matcher.max_hamming, "match acceptance bound")
      ->capture_default_str();
  cmd->add_option("--sad-slide", rf.cfg.matcher.sad_slide, "SAD slide half-range")
      ->capture_default_str();
  cmd->add_option("--depth-min", rf.cfg.depth_min, "effective-depth lower bound, m")
      ->capture_default_str();
  cmd->add_option("--depth-max", rf.cfg.depth_max, "effective-depth upper bound, m")
      ->capture_default_str();
  cmd->add_option("--threads", rf.cfg.threads, "worker threads (0 = auto)")
      ->capture_default_str();
  cmd->add_option("--frames", rf.cfg.frames, "frame cap (0 = all)")
      ->capture_default_str();
}

orbfe::RunConfig finalize(RunFlags& rf) {
  rf.cfg.extractor.arith_mode = orbfe::parse_arith_mode(rf.mode);
  if (rf.cfg.dataset_dir.empty())
    throw orbfe::ConfigError("dataset_dir not set (use --dataset or a config file)");
  return rf.cfg;
}

int run(int argc, char** argv) {
  CLI::App app{"quad-camera ORB frontend tools"};
  app.require_subcommand(1);

  orbfe::RunConfig base_cfg;
  const std::string config_path = prescan_config(argc, argv);
  if (!config_path.empty()) orbfe::load_config_file(config_path, base_cfg);

  int exit_code = 0;

  RunFlags extract_rf{base_cfg};
  CLI::App* extract_cmd =
      app.add_subcommand("extract", "extract ORB features and dump descriptors");
  add_run_options(extract_cmd, extract_rf);
  extract_cmd->callback([&]() {
    const orbfe::RunConfig cfg = finalize(extract_rf);
    const orbfe::ExtractOutcome out = orbfe::cmd_extract(cfg);
    long left = 0, right = 0;
    int done = 0;
    for (const auto& s : out.summary) {
      if (s.left_count >= 0) left += s.left_count;
      if (s.right_count >= 0) right += s.right_count;
      if (s.left_count >= 0 && s.right_count >= 0) ++done;
    }
    std::cout << "frames: " << done << "/" << out.summary.size() << ", features left: "
              << left << ", right: " << right << "\n"
              << "outputs: " << cfg.output_dir << "/features, "
              << cfg.output_dir << "/extract_summary.csv\n";
    report_log(out.log);
    exit_code = out.log.exit_code();
  });

  RunFlags match_rf{base_cfg};
  CLI::App* match_cmd =
      app.add_subcommand("match", "stereo-match features and write disparity/depth CSVs");
  add_run_options(match_cmd, match_rf);
  match_cmd->callback([&]() {
    const orbfe::RunConfig cfg = finalize(match_rf);
    const orbfe::MatchOutcome out = orbfe::cmd_match(cfg);
    long pairs = 0, depths = 0;
    int done = 0;
    for (const auto& s : out.summary) {
      if (s.pairs < 0) continue;
      pairs += s.pairs;
      depths += s.effective_depths;
      ++done;
    }
    std::cout << "frames: " << done << "/" << out.summary.size() << ", pairs: " << pairs
              << ", effective depths: " << depths << "\n"
              << "outputs: " << cfg.output_dir << "/matches, "
              << cfg.output_dir << "/match_summary.csv\n";
    report_log(out.log);
    exit_code = out.log.exit_code();
  });

  RunFlags compare_rf{base_cfg};
  int compare_frames = 30;
  CLI::App* compare_cmd =
      app.add_subcommand("compare", "compare float and fixed8 pipelines");
  add_run_options(compare_cmd, compare_rf);
  compare_cmd->add_option("--compare-frames", compare_frames, "frames to compare")
      ->capture_default_str();
  compare_cmd->callback([&]() {
    const orbfe::RunConfig cfg = finalize(compare_rf);
    const orbfe::CompareOutcome out = orbfe::cmd_compare(cfg, compare_frames);
    std::cout << "frames: " << out.frames_used << "\n";
    for (const auto& m : out.metrics) {
      char buf[256];
      std::snprintf(buf, sizeof(buf), "%-18s float %10.4f  fixed8 %10.4f  rel_err %.4f%%\n",
                    m.name.c_str(), m.lhs_mean, m.rhs_mean, m.rel_err * 100.0);
      std::cout << buf;
    }
    std::cout << "outputs: " << cfg.output_dir << "/compare.csv\n";
    report_log(out.log);
    exit_code = out.log.exit_code();
  });

  orbfe::StageLatency lat;
  int pipe_frames = 100, pipe_chains = 1;
  std::string pipe_output = "out";
  CLI::App* pipe_cmd =
      app.add_subcommand("pipeline-sim", "simulate the frame-multiplexed FE/FM pipeline");
  pipe_cmd->add_option("--t-fe", lat.t_fe, "FE latency per image, ms")->capture_default_str();
  pipe_cmd->add_option("--t-fm", lat.t_fm, "FM latency per stereo frame, ms")
      ->capture_default_str();
  pipe_cmd->add_option("--frames", pipe_frames, "frames to simulate")->capture_default_str();
  pipe_cmd->add_option("--chains", pipe_chains, "stereo chains (1 or 2)")
      ->capture_default_str();
  pipe_cmd->add_option("--output", pipe_output, "output directory")->capture_default_str();
  pipe_cmd->callback([&]() {
    const orbfe::PipelineOutcome out = orbfe::cmd_pipeline_sim(lat, pipe_frames, pipe_chains,
                                                               pipe_output);
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "fps: %.2f\nlatency ms: min %.6f mean %.6f max %.6f\n", out.fps,
                  out.latency.min_ms, out.latency.mean_ms, out.latency.max_ms);
    std::cout << buf << "outputs: " << pipe_output << "/trace.csv\n";
    report_log(out.log);
    exit_code = out.log.exit_code();
  });

  orbfe::TriggerConfig trig;
  double sync_duration = 1.0;
  std::int64_t sync_jitter = 0;
  std::uint64_t sync_seed = 1;
  int naive_seeds = 0;
  bool naive_flag = false;
  std::string sync_output = "out";
  CLI::App* sync_cmd =
      app.add_subcommand("sync-sim", "simulate trigger/tagging sensor synchronization");
  sync_cmd->add_option("--cam-rate", trig.cam_rate, "camera rate, Hz")->capture_default_str();
  sync_cmd->add_option("--imu-rate", trig.imu_rate, "IMU rate, Hz")->capture_default_str();
  sync_cmd->add_option("--duration", sync_duration, "capture duration, s")
      ->capture_default_str();
  sync_cmd->add_option("--jitter", sync_jitter, "max delivery jitter, ns")
      ->capture_default_str();
  sync_cmd->add_option("--seed", sync_seed, "jitter RNG seed")->capture_default_str();
  sync_cmd->add_flag("--naive", naive_flag, "also run the arrival-time baseline");
  sync_cmd->add_option("--naive-seeds", naive_seeds,
                       "seeds to scan for a baseline mis-association (implies --naive)")
      ->capture_default_str();
  sync_cmd->add_option("--output", sync_output, "output directory")->capture_default_str();
  sync_cmd->callback([&]() {
    if (naive_flag && naive_seeds == 0) naive_seeds = 50;
    const orbfe::SyncOutcome out = orbfe::cmd_sync_sim(trig, sync_duration, sync_jitter,
                                                       sync_seed, sync_output, naive_seeds);
    std::cout << "verdict: " << out.verdict << "\n";
    if (out.naive_ran) {
      if (out.naive_found) {
        std::cout << "naive baseline: seed " << out.naive_seed << " mis-associates "
                  << out.naive.mis_associations << " of " << out.naive.checked
                  << " samples\n";
        for (const auto& m : out.naive.first_few)
          std::cout << "  " << orbfe::sensor_name(m.sensor) << " tag " << m.tag
                    << " belongs to bundle " << m.true_bundle << " but was assigned to "
                    << m.chosen_bundle << "\n";
      } else {
        std::cout << "naive baseline: no mis-association in the scanned seeds\n";
      }
    }
    std::cout << "outputs: " << sync_output << "/stream.csv, " << sync_output
              << "/bundles.csv\n";
    report_log(out.log);
    exit_code = out.log.exit_code();
  });

  RunFlags bench_rf{base_cfg};
  int bench_repeats = 3;
  CLI::App* bench_cmd = app.add_subcommand("bench", "time FE and FM on this machine");
  add_run_options(bench_cmd, bench_rf);
  bench_cmd->add_option("--repeats", bench_repeats, "timing repeats")->capture_default_str();
  bench_cmd->callback([&]() {
    const orbfe::RunConfig cfg = finalize(bench_rf);
    const orbfe::BenchOutcome out = orbfe::cmd_bench(cfg, bench_repeats);
    for (std::size_t i = 0; i < out.rows.size(); ++i) {
      const auto& r = out.rows[i];
      char buf[256];
      std::snprintf(buf, sizeof(buf),
                    "%-10s %-3s mean %9.4f ms  median %9.4f ms  stdev %8.4f ms\n",
                    r.resolution.c_str(), r.stage.c_str(), r.mean_ms, r.median_ms,
                    r.stdev_ms);
      std::cout << buf;
      if (r.stage == "FM" && i > 0 && out.rows[i - 1].stage == "FE" &&
          out.rows[i - 1].mean_ms > 0.0) {
        std::snprintf(buf, sizeof(buf), "%-10s FM/FE ratio %.3f\n", r.resolution.c_str(),
                      r.mean_ms / out.rows[i - 1].mean_ms);
        std::cout << buf;
      }
    }
    std::cout << "outputs: " << cfg.output_dir << "/bench.csv\n";
    report_log(out.log);
    exit_code = out.log.exit_code();
  });

  orbfe::CorpusConfig corpus;
  std::string corpus_output;
  CLI::App* corpus_cmd =
      app.add_subcommand("gen-corpus", "generate the synthetic stereo corpus");
  corpus_cmd->add_option("--output", corpus_output, "corpus directory")->required();
  corpus_cmd->add_option("--width", corpus.width, "frame width")->capture_default_str();
  corpus_cmd->add_option("--height", corpus.height, "frame height")->capture_default_str();
  corpus_cmd->add_option("--frames", corpus.frames, "frame count")->capture_default_str();
  corpus_cmd->add_option("--shift", corpus.shift, "ground-truth disparity, px")
      ->capture_default_str();
  corpus_cmd->add_option("--seed", corpus.seed, "texture seed")->capture_default_str();
  corpus_cmd->add_option("--fx", corpus.fx, "focal length, px")->capture_default_str();
  corpus_cmd->add_option("--baseline", corpus.baseline, "stereo baseline, m")
      ->capture_default_str();
  corpus_cmd->callback([&]() {
    const orbfe::GenCorpusOutcome out = orbfe::cmd_gen_corpus(corpus_output, corpus);
    std::cout << "wrote " << out.frames << " stereo frames to " << corpus_output << "\n";
    report_log(out.log);
    exit_code = out.log.exit_code();
  });

  CLI11_PARSE(app, argc, argv);
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
