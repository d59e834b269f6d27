#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "orbfe/config.hpp"
#include "orbfe/corpus.hpp"
#include "orbfe/errors.hpp"
#include "orbfe/extractor.hpp"
#include "orbfe/image.hpp"
#include "orbfe/matcher.hpp"
#include "orbfe/pipeline_sim.hpp"
#include "orbfe/sync_sim.hpp"

namespace orbfe {

struct CommandLog {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
  int exit_code() const { return errors.empty() ? 0 : 1; }
};

namespace detail {

/// Runs fn(0..n-1) on a small worker pool. Completion order is arbitrary;
/// callers must write results into index-addressed slots.
template <typename Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  if (n <= 0) return;
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, n);
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex err_mx;
  std::exception_ptr first_error;
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mx);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

/// Writes via a temp file in the same directory, then renames over the
/// target, so concurrent or interrupted runs never expose partial files.
inline void atomic_write(const std::filesystem::path& path, const std::string& payload) {
  namespace fs = std::filesystem;
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!out) throw IoError("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

inline void put_i32le(std::string& out, std::int32_t v) {
  const auto u = static_cast<std::uint32_t>(v);
  out.push_back(static_cast<char>(u & 0xff));
  out.push_back(static_cast<char>((u >> 8) & 0xff));
  out.push_back(static_cast<char>((u >> 16) & 0xff));
  out.push_back(static_cast<char>((u >> 24) & 0xff));
}

}  // namespace detail

/// Sorted PGM frame names shared by left/ and right/. Names come from
/// left/; a name missing on the right is reported by the command that
/// loads it.
inline std::vector<std::string> list_frames(const std::filesystem::path& dataset_dir) {
  namespace fs = std::filesystem;
  const fs::path left = dataset_dir / "left";
  if (!fs::is_directory(left))
    throw IoError("dataset has no left/ directory: " + left.string());
  if (!fs::is_directory(dataset_dir / "right"))
    throw IoError("dataset has no right/ directory: " + (dataset_dir / "right").string());
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(left))
    if (e.is_regular_file() && e.path().extension() == ".pgm")
      names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  return names;
}

inline std::filesystem::path resolve_calib_path(const RunConfig& cfg) {
  if (!cfg.calib_path.empty()) return cfg.calib_path;
  return std::filesystem::path(cfg.dataset_dir) / "calib.txt";
}

/// 16-byte record per feature (x, y in level-0 coordinates as signed 32-bit
/// little-endian, scaled by 8 with the sub-pixel bits zero; level; theta_q)
/// followed by the 32 descriptor bytes.
inline std::string serialize_features(const ExtractionResult& r) {
  std::string out;
  out.reserve(r.features.size() * 48u);
  for (const Feature& f : r.features) {
    const double s = std::pow(r.scale_factor, f.pt.level);
    detail::put_i32le(out, static_cast<std::int32_t>(std::lround(f.pt.x * s)) * 8);
    detail::put_i32le(out, static_cast<std::int32_t>(std::lround(f.pt.y * s)) * 8);
    detail::put_i32le(out, f.pt.level);
    detail::put_i32le(out, f.pt.theta_q);
    out.append(reinterpret_cast<const char*>(f.desc.bytes.data()), f.desc.bytes.size());
  }
  return out;
}

namespace detail {

inline std::string frame_stem(const std::string& name) {
  const auto dot = name.rfind('.');
  return dot == std::string::npos ? name : name.substr(0, dot);
}

inline GrayImage load_side(const std::filesystem::path& dataset_dir, const char* side,
                           const std::string& name) {
  return load_pgm((dataset_dir / side / name).string());
}

inline ExtractionResult extract_image(const GrayImage& img, const ExtractorConfig& cfg) {
  return extract(build_pyramid(img, cfg.scale_factor), cfg);
}

inline bool effective_depth(const MatchPair& p, const RunConfig& cfg) {
  return p.disparity > 0.0 && p.depth > cfg.depth_min && p.depth < cfg.depth_max;
}

inline std::string render_match_csv(const std::vector<MatchPair>& pairs) {
  std::string out = "level,xl,yl,xr,yr,hamming,disparity,depth\n";
  char buf[192];
  for (const MatchPair& p : pairs) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%d,%d,%d,%d,%.4f,%.4f\n", p.left.level,
                  p.left.x, p.left.y, p.right.x, p.right.y, p.hamming, p.disparity,
                  p.depth);
    out += buf;
  }
  return out;
}

inline std::vector<std::string> select_frames(const RunConfig& cfg) {
  std::vector<std::string> names = list_frames(cfg.dataset_dir);
  if (cfg.frames > 0 && static_cast<int>(names.size()) > cfg.frames)
    names.resize(static_cast<std::size_t>(cfg.frames));
  return names;
}

}  // namespace detail

struct ExtractFrameSummary {
  std::string frame;
  int left_count = -1;  // -1: side failed
  int right_count = -1;
};

struct ExtractOutcome {
  std::vector<ExtractFrameSummary> summary;  // frame order; failed sides hold -1
  CommandLog log;
};

/// Extracts features for every frame of the dataset and dumps them under
/// <output_dir>/features/ as <stem>.left.feat / <stem>.right.feat, plus a
/// summary CSV `frame,side,count` listing successful sides. Per-frame
/// failures are logged and skipped; the run continues.
inline ExtractOutcome cmd_extract(const RunConfig& cfg) {
  namespace fs = std::filesystem;
  ExtractOutcome out;
  const std::vector<std::string> names = detail::select_frames(cfg);
  const fs::path feat_dir = fs::path(cfg.output_dir) / "features";
  fs::create_directories(feat_dir);
  default_pattern();

  out.summary.resize(names.size());
  std::vector<std::array<std::string, 2>> frame_errors(names.size());
  detail::parallel_for(static_cast<int>(names.size()), cfg.threads, [&](int i) {
    const std::string& name = names[static_cast<std::size_t>(i)];
    const std::string stem = detail::frame_stem(name);
    ExtractFrameSummary& s = out.summary[static_cast<std::size_t>(i)];
    s.frame = stem;
    const char* sides[2] = {"left", "right"};
    for (int side = 0; side < 2; ++side) {
      try {
        const GrayImage img = detail::load_side(cfg.dataset_dir, sides[side], name);
        const ExtractionResult r = detail::extract_image(img, cfg.extractor);
        detail::atomic_write(feat_dir / (stem + "." + sides[side] + ".feat"),
                             serialize_features(r));
        (side == 0 ? s.left_count : s.right_count) = static_cast<int>(r.features.size());
      } catch (const std::exception& e) {
        frame_errors[static_cast<std::size_t>(i)][static_cast<std::size_t>(side)] =
            name + " (" + sides[side] + "): " + e.what();
      }
    }
  });

  std::string csv = "frame,side,count\n";
  for (const ExtractFrameSummary& s : out.summary) {
    char buf[512];
    if (s.left_count >= 0) {
      std::snprintf(buf, sizeof(buf), "%s,left,%d\n", s.frame.c_str(), s.left_count);
      csv += buf;
    }
    if (s.right_count >= 0) {
      std::snprintf(buf, sizeof(buf), "%s,right,%d\n", s.frame.c_str(), s.right_count);
      csv += buf;
    }
  }
  detail::atomic_write(fs::path(cfg.output_dir) / "extract_summary.csv", csv);
  for (const auto& fe : frame_errors)
    for (const std::string& msg : fe)
      if (!msg.empty()) out.log.errors.push_back(msg);
  return out;
}

struct MatchFrameSummary {
  std::string frame;
  int pairs = -1;  // -1: frame failed
  int effective_depths = -1;
};

struct MatchOutcome {
  std::vector<MatchFrameSummary> summary;
  CommandLog log;
};

/// Runs extraction and stereo matching per frame, writing one match CSV per
/// frame under <output_dir>/matches/ and a summary CSV
/// `frame,pairs,effective_depths`. A missing calibration file downgrades to
/// a warning; depths are then invalid.
inline MatchOutcome cmd_match(const RunConfig& cfg) {
  namespace fs = std::filesystem;
  MatchOutcome out;
  const std::vector<std::string> names = detail::select_frames(cfg);
  const fs::path match_dir = fs::path(cfg.output_dir) / "matches";
  fs::create_directories(match_dir);
  default_pattern();

  StereoCalib calib;
  const fs::path calib_path = resolve_calib_path(cfg);
  if (fs::exists(calib_path)) {
    calib = load_calib(calib_path);
  } else {
    out.log.warnings.push_back("no calibration at " + calib_path.string() +
                               "; depths will be invalid");
  }

  out.summary.resize(names.size());
  std::vector<std::string> frame_errors(names.size());
  detail::parallel_for(static_cast<int>(names.size()), cfg.threads, [&](int i) {
    const std::string& name = names[static_cast<std::size_t>(i)];
    MatchFrameSummary& s = out.summary[static_cast<std::size_t>(i)];
    s.frame = detail::frame_stem(name);
    try {
      const GrayImage left = detail::load_side(cfg.dataset_dir, "left", name);
      const GrayImage right = detail::load_side(cfg.dataset_dir, "right", name);
      const ExtractionResult el = detail::extract_image(left, cfg.extractor);
      const ExtractionResult er = detail::extract_image(right, cfg.extractor);
      const MatchResult m = match_stereo(el, er, cfg.strip, calib, cfg.matcher);
      int effective = 0;
      for (const MatchPair& p : m.pairs)
        if (detail::effective_depth(p, cfg)) ++effective;
      detail::atomic_write(match_dir / (s.frame + ".csv"), detail::render_match_csv(m.pairs));
      s.pairs = static_cast<int>(m.pairs.size());
      s.effective_depths = effective;
    } catch (const std::exception& e) {
      frame_errors[static_cast<std::size_t>(i)] = name + ": " + e.what();
    }
  });

  std::string csv = "frame,pairs,effective_depths\n";
  for (const MatchFrameSummary& s : out.summary) {
    if (s.pairs < 0) continue;
    char buf[512];
    std::snprintf(buf, sizeof(buf), "%s,%d,%d\n", s.frame.c_str(), s.pairs,
                  s.effective_depths);
    csv += buf;
  }
  detail::atomic_write(fs::path(cfg.output_dir) / "match_summary.csv", csv);
  for (const std::string& msg : frame_errors)
    if (!msg.empty()) out.log.errors.push_back(msg);
  return out;
}

struct CompareMetric {
  std::string name;
  double lhs_mean = 0.0;  // first mode (float in the CLI)
  double rhs_mean = 0.0;  // second mode (fixed8 in the CLI)
  double rel_err = 0.0;   // |rhs - lhs| / lhs
};

struct CompareOutcome {
  std::vector<CompareMetric> metrics;  // feature_points, matched_pairs, effective_depths
  int frames_used = 0;
  CommandLog log;
};

namespace detail {

struct ModeTotals {
  double feature_points = 0.0;
  double matched_pairs = 0.0;
  double effective_depths = 0.0;
};

inline ModeTotals run_mode(const RunConfig& cfg, const std::vector<std::string>& names,
                           ArithMode mode, const StereoCalib& calib,
                           std::vector<std::string>& frame_errors) {
  RunConfig mode_cfg = cfg;
  mode_cfg.extractor.arith_mode = mode;
  std::vector<std::array<double, 3>> per_frame(names.size(), {0.0, 0.0, 0.0});
  std::vector<char> ok(names.size(), 0);
  parallel_for(static_cast<int>(names.size()), cfg.threads, [&](int i) {
    const std::string& name = names[static_cast<std::size_t>(i)];
    try {
      const GrayImage left = load_side(cfg.dataset_dir, "left", name);
      const GrayImage right = load_side(cfg.dataset_dir, "right", name);
      const ExtractionResult el = extract_image(left, mode_cfg.extractor);
      const ExtractionResult er = extract_image(right, mode_cfg.extractor);
      const MatchResult m = match_stereo(el, er, cfg.strip, calib, cfg.matcher);
      int effective = 0;
      for (const MatchPair& p : m.pairs)
        if (effective_depth(p, cfg)) ++effective;
      per_frame[static_cast<std::size_t>(i)] = {
          0.5 * double(el.features.size() + er.features.size()),
          double(m.pairs.size()), double(effective)};
      ok[static_cast<std::size_t>(i)] = 1;
    } catch (const std::exception& e) {
      frame_errors[static_cast<std::size_t>(i)] = name + ": " + e.what();
    }
  });
  ModeTotals t;
  int used = 0;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (!ok[i]) continue;
    t.feature_points += per_frame[i][0];
    t.matched_pairs += per_frame[i][1];
    t.effective_depths += per_frame[i][2];
    ++used;
  }
  if (used > 0) {
    t.feature_points /= used;
    t.matched_pairs /= used;
    t.effective_depths /= used;
  }
  return t;
}

inline double relative_error(double lhs, double rhs) {
  if (lhs == 0.0) return rhs == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(rhs - lhs) / lhs;
}

}  // namespace detail

/// Per-frame means of feature count, matched pairs, and effective depth
/// values under two arithmetic modes, with relative errors. Writes
/// <output_dir>/compare.csv. `frames` caps the frame count (0 = all); a
/// shortfall is a warning, not an error.
inline CompareOutcome cmd_compare(const RunConfig& cfg, int frames = 30,
                                  ArithMode lhs_mode = ArithMode::kFloat,
                                  ArithMode rhs_mode = ArithMode::kFixed8) {
  namespace fs = std::filesystem;
  CompareOutcome out;
  std::vector<std::string> names = list_frames(cfg.dataset_dir);
  if (frames > 0 && static_cast<int>(names.size()) > frames)
    names.resize(static_cast<std::size_t>(frames));
  if (frames > 0 && static_cast<int>(names.size()) < frames)
    out.log.warnings.push_back("dataset has only " + std::to_string(names.size()) +
                               " of " + std::to_string(frames) + " requested frames");
  out.frames_used = static_cast<int>(names.size());
  fs::create_directories(cfg.output_dir);
  default_pattern();

  StereoCalib calib;
  const fs::path calib_path = resolve_calib_path(cfg);
  if (fs::exists(calib_path)) {
    calib = load_calib(calib_path);
  } else {
    out.log.warnings.push_back("no calibration at " + calib_path.string() +
                               "; depths will be invalid");
  }

  std::vector<std::string> lhs_errors(names.size()), rhs_errors(names.size());
  const detail::ModeTotals lhs = detail::run_mode(cfg, names, lhs_mode, calib, lhs_errors);
  const detail::ModeTotals rhs = detail::run_mode(cfg, names, rhs_mode, calib, rhs_errors);
  for (const auto& v : {lhs_errors, rhs_errors})
    for (const std::string& msg : v)
      if (!msg.empty()) out.log.errors.push_back(msg);

  out.metrics = {
      {"feature_points", lhs.feature_points, rhs.feature_points,
       detail::relative_error(lhs.feature_points, rhs.feature_points)},
      {"matched_pairs", lhs.matched_pairs, rhs.matched_pairs,
       detail::relative_error(lhs.matched_pairs, rhs.matched_pairs)},
      {"effective_depths", lhs.effective_depths, rhs.effective_depths,
       detail::relative_error(lhs.effective_depths, rhs.effective_depths)},
  };

  std::string csv = "metric,float_mean,fixed8_mean,rel_err\n";
  for (const CompareMetric& m : out.metrics) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%.6f\n", m.name.c_str(), m.lhs_mean,
                  m.rhs_mean, m.rel_err);
    csv += buf;
  }
  detail::atomic_write(fs::path(cfg.output_dir) / "compare.csv", csv);
  return out;
}

struct PipelineOutcome {
  double fps = 0.0;
  LatencyStats latency;
  CommandLog log;
};

/// Simulates the pipeline, writes <output_dir>/trace.csv, and reports
/// throughput plus end-to-end latency statistics.
inline PipelineOutcome cmd_pipeline_sim(const StageLatency& lat, int frames, int chains,
                                        const std::filesystem::path& output_dir) {
  namespace fs = std::filesystem;
  PipelineOutcome out;
  const PipelineTrace trace = simulate(lat, frames, chains);
  fs::create_directories(output_dir);
  std::ostringstream csv;
  write_trace_csv(trace, csv);
  detail::atomic_write(output_dir / "trace.csv", csv.str());
  out.fps = throughput_fps(trace);
  out.latency = latency_report(trace);
  return out;
}

struct SyncOutcome {
  std::string verdict;
  bool naive_ran = false;
  bool naive_found = false;
  std::uint64_t naive_seed = 0;
  NaiveReport naive;
  CommandLog log;
};

namespace detail {

/// Bundle composition: everything except arrival times.
inline std::string composition_digest(const AssemblyResult& res) {
  std::ostringstream os;
  auto dump = [&os](const std::vector<SyncBundle>& bundles, const char* kind) {
    for (const SyncBundle& b : bundles) {
      os << kind << ' ' << b.tag << ':';
      for (const TaggedSample& s : b.frames)
        os << ' ' << sensor_name(s.sensor) << '/' << s.tag << '/' << s.capture_ns;
      os << " |";
      for (const TaggedSample& s : b.imu) os << ' ' << s.tag << '/' << s.capture_ns;
      os << '\n';
    }
  };
  dump(res.complete, "C");
  dump(res.incomplete, "I");
  return os.str();
}

}  // namespace detail

/// Generates a jittered sample stream, assembles bundles, and writes
/// stream.csv and bundles.csv. The verdict compares bundle composition
/// against a jitter-free run of the same config. With naive_seeds > 0 the
/// arrival-time baseline is scanned over seeds [seed, seed + naive_seeds)
/// until it mis-associates.
inline SyncOutcome cmd_sync_sim(const TriggerConfig& trig, double duration_s,
                                std::int64_t jitter_ns, std::uint64_t seed,
                                const std::filesystem::path& output_dir,
                                int naive_seeds = 0) {
  namespace fs = std::filesystem;
  SyncOutcome out;
  const std::vector<TaggedSample> stream = generate_stream(trig, duration_s, jitter_ns, seed);
  const AssemblyResult bundles = assemble_bundles(stream, trig);
  fs::create_directories(output_dir);
  {
    std::ostringstream os;
    write_stream_csv(stream, os);
    detail::atomic_write(output_dir / "stream.csv", os.str());
  }
  {
    std::ostringstream os;
    write_bundles_csv(bundles, os);
    detail::atomic_write(output_dir / "bundles.csv", os.str());
  }

  if (jitter_ns == 0) {
    out.verdict = "invariant: trivially true";
  } else {
    const AssemblyResult clean =
        assemble_bundles(generate_stream(trig, duration_s, 0, seed), trig);
    out.verdict = detail::composition_digest(bundles) == detail::composition_digest(clean)
                      ? "bundle composition identical to jitter-free"
                      : "bundle composition DIFFERS from jitter-free";
  }

  if (naive_seeds > 0) {
    out.naive_ran = true;
    for (int k = 0; k < naive_seeds; ++k) {
      const std::uint64_t s = seed + static_cast<std::uint64_t>(k);
      const NaiveReport rep =
          naive_associate(generate_stream(trig, duration_s, jitter_ns, s), trig);
      if (rep.mis_associations > 0) {
        out.naive_found = true;
        out.naive_seed = s;
        out.naive = rep;
        break;
      }
    }
  }
  return out;
}

struct BenchRow {
  std::string resolution;  // e.g. 640x480
  std::string stage;       // FE or FM
  double mean_ms = 0.0;
  double median_ms = 0.0;
  double stdev_ms = 0.0;
};

struct BenchOutcome {
  std::vector<BenchRow> rows;
  CommandLog log;
};

namespace detail {

inline void stats3(const std::vector<double>& v, BenchRow& row) {
  std::vector<double> s = v;
  std::sort(s.begin(), s.end());
  double sum = 0.0;
  for (double x : s) sum += x;
  const double mean = sum / double(s.size());
  row.mean_ms = mean;
  row.median_ms = s[s.size() / 2];
  double var = 0.0;
  for (double x : s) var += (x - mean) * (x - mean);
  row.stdev_ms = s.size() > 1 ? std::sqrt(var / double(s.size() - 1)) : 0.0;
}

}  // namespace detail

/// Times FE (per image) and FM (per stereo frame) over the dataset, grouped
/// by input resolution, across `repeats` passes. Writes
/// <output_dir>/bench.csv with `resolution,stage,mean_ms,median_ms,stdev_ms`.
/// Numbers describe this machine; nothing is asserted about them.
inline BenchOutcome cmd_bench(const RunConfig& cfg, int repeats = 3) {
  namespace fs = std::filesystem;
  using clock = std::chrono::steady_clock;
  BenchOutcome out;
  const std::vector<std::string> names = detail::select_frames(cfg);
  fs::create_directories(cfg.output_dir);
  default_pattern();

  StereoCalib calib;
  const fs::path calib_path = resolve_calib_path(cfg);
  if (fs::exists(calib_path)) calib = load_calib(calib_path);

  // Group frame names by left-image resolution.
  std::map<std::pair<int, int>, std::vector<std::string>> groups;
  for (const std::string& name : names) {
    try {
      const GrayImage img = detail::load_side(cfg.dataset_dir, "left", name);
      groups[{img.width, img.height}].push_back(name);
    } catch (const std::exception& e) {
      out.log.errors.push_back(name + ": " + std::string(e.what()));
    }
  }

  for (const auto& [res, group] : groups) {
    char label[48];
    std::snprintf(label, sizeof(label), "%dx%d", res.first, res.second);
    std::vector<double> fe_ms, fm_ms;
    for (int rep = 0; rep < repeats; ++rep) {
      double fe_total = 0.0, fm_total = 0.0;
      int images = 0, stereo_frames = 0;
      for (const std::string& name : group) {
        GrayImage left, right;
        try {
          left = detail::load_side(cfg.dataset_dir, "left", name);
          right = detail::load_side(cfg.dataset_dir, "right", name);
        } catch (const std::exception& e) {
          if (rep == 0) out.log.errors.push_back(name + ": " + std::string(e.what()));
          continue;
        }
        const auto t0 = clock::now();
        const ExtractionResult el = detail::extract_image(left, cfg.extractor);
        const auto t1 = clock::now();
        const ExtractionResult er = detail::extract_image(right, cfg.extractor);
        const auto t2 = clock::now();
        const MatchResult m = match_stereo(el, er, cfg.strip, calib, cfg.matcher);
        const auto t3 = clock::now();
        (void)m;
        fe_total += std::chrono::duration<double, std::milli>(t2 - t0).count();
        fm_total += std::chrono::duration<double, std::milli>(t3 - t2).count();
        images += 2;
        stereo_frames += 1;
      }
      if (images > 0) fe_ms.push_back(fe_total / images);
      if (stereo_frames > 0) fm_ms.push_back(fm_total / stereo_frames);
    }
    if (fe_ms.empty() || fm_ms.empty()) continue;
    BenchRow fe{label, "FE", 0, 0, 0}, fm{label, "FM", 0, 0, 0};
    detail::stats3(fe_ms, fe);
    detail::stats3(fm_ms, fm);
    out.rows.push_back(fe);
    out.rows.push_back(fm);
  }

  std::string csv = "resolution,stage,mean_ms,median_ms,stdev_ms\n";
  for (const BenchRow& r : out.rows) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s,%s,%.6f,%.6f,%.6f\n", r.resolution.c_str(),
                  r.stage.c_str(), r.mean_ms, r.median_ms, r.stdev_ms);
    csv += buf;
  }
  detail::atomic_write(fs::path(cfg.output_dir) / "bench.csv", csv);
  return out;
}

struct GenCorpusOutcome {
  int frames = 0;
  CommandLog log;
};

/// Writes the synthetic stereo corpus (left/, right/, calib.txt) to dir.
inline GenCorpusOutcome cmd_gen_corpus(const std::filesystem::path& dir,
                                       const CorpusConfig& cfg) {
  write_corpus(dir, cfg);
  GenCorpusOutcome out;
  out.frames = cfg.frames;
  return out;
}

}  // namespace orbfe
