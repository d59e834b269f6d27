#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "orbfe/errors.hpp"

namespace orbfe {

/// Stage latencies in milliseconds: one FE pass per image, one FM pass per
/// stereo frame.
struct StageLatency {
  double t_fe = 7.28;
  double t_fm = 14.59;
};

enum class Stage { kFeLeft, kFeRight, kFm };

inline const char* stage_name(Stage s) {
  switch (s) {
    case Stage::kFeLeft: return "FE_L";
    case Stage::kFeRight: return "FE_R";
    case Stage::kFm: return "FM";
  }
  return "?";
}

struct PipelineEvent {
  int chain = 0;
  int frame = 0;
  Stage stage = Stage::kFeLeft;
  std::int64_t start_ns = 0;
  std::int64_t end_ns = 0;
};

struct PipelineTrace {
  std::vector<PipelineEvent> events;  // ordered (chain, frame, stage)
  int frames = 0;
  int chains = 1;
};

namespace detail {

inline std::int64_t ms_to_ns(double ms) { return std::llround(ms * 1e6); }

}  // namespace detail

/// Schedules the frame-multiplexed pipeline. One FE unit serves both camera
/// channels of a chain back to back; a single-frame buffer sits between FE
/// and FM, so FE may start frame N+1 only once FM has begun consuming frame
/// N. Chains are independent and identically scheduled. All times are
/// integer nanoseconds.
inline PipelineTrace simulate(const StageLatency& lat, int frames, int chains = 1) {
  if (!(lat.t_fe > 0.0) || !(lat.t_fm > 0.0))
    throw PreconditionError("simulate: latencies must be positive");
  if (frames < 1) throw PreconditionError("simulate: frames must be >= 1");
  if (chains != 1 && chains != 2) throw PreconditionError("simulate: chains must be 1 or 2");

  const std::int64_t t_fe = detail::ms_to_ns(lat.t_fe);
  const std::int64_t t_fm = detail::ms_to_ns(lat.t_fm);

  PipelineTrace trace;
  trace.frames = frames;
  trace.chains = chains;
  trace.events.reserve(static_cast<std::size_t>(frames) * 3u * static_cast<std::size_t>(chains));

  for (int chain = 0; chain < chains; ++chain) {
    std::int64_t prev_fm_start = 0;
    std::int64_t prev_fm_end = 0;
    std::int64_t prev_fer_end = 0;
    for (int n = 0; n < frames; ++n) {
      const std::int64_t fel_start =
          n == 0 ? 0 : std::max(prev_fer_end, prev_fm_start);
      const std::int64_t fel_end = fel_start + t_fe;
      const std::int64_t fer_start = fel_end;
      const std::int64_t fer_end = fer_start + t_fe;
      const std::int64_t fm_start = std::max(fer_end, prev_fm_end);
      const std::int64_t fm_end = fm_start + t_fm;
      trace.events.push_back({chain, n, Stage::kFeLeft, fel_start, fel_end});
      trace.events.push_back({chain, n, Stage::kFeRight, fer_start, fer_end});
      trace.events.push_back({chain, n, Stage::kFm, fm_start, fm_end});
      prev_fm_start = fm_start;
      prev_fm_end = fm_end;
      prev_fer_end = fer_end;
    }
  }
  return trace;
}

/// Frames per second from the steady-state FM completion cadence of chain 0.
/// The first three frames are warm-up and excluded.
inline double throughput_fps(const PipelineTrace& trace) {
  constexpr int kWarmup = 3;
  if (trace.frames < 10) throw PreconditionError("throughput_fps: need at least 10 frames");
  std::vector<std::int64_t> fm_end(static_cast<std::size_t>(trace.frames), 0);
  for (const PipelineEvent& e : trace.events)
    if (e.chain == 0 && e.stage == Stage::kFm)
      fm_end[static_cast<std::size_t>(e.frame)] = e.end_ns;
  const std::int64_t span = fm_end.back() - fm_end[kWarmup];
  const double gaps = double(trace.frames - 1 - kWarmup);
  const double mean_gap_ms = double(span) / gaps / 1e6;
  return 1000.0 / mean_gap_ms;
}

struct LatencyStats {
  double min_ms = 0.0;
  double mean_ms = 0.0;
  double max_ms = 0.0;
};

/// End-to-end latency (FM end minus FE_L start) statistics over all frames
/// of chain 0.
inline LatencyStats latency_report(const PipelineTrace& trace) {
  std::vector<std::int64_t> fel_start(static_cast<std::size_t>(trace.frames), 0);
  std::vector<std::int64_t> fm_end(static_cast<std::size_t>(trace.frames), 0);
  for (const PipelineEvent& e : trace.events) {
    if (e.chain != 0) continue;
    if (e.stage == Stage::kFeLeft) fel_start[static_cast<std::size_t>(e.frame)] = e.start_ns;
    if (e.stage == Stage::kFm) fm_end[static_cast<std::size_t>(e.frame)] = e.end_ns;
  }
  std::int64_t mn = 0, mx = 0, sum = 0;
  for (int n = 0; n < trace.frames; ++n) {
    const std::int64_t lat = fm_end[static_cast<std::size_t>(n)] -
                             fel_start[static_cast<std::size_t>(n)];
    if (n == 0 || lat < mn) mn = lat;
    if (n == 0 || lat > mx) mx = lat;
    sum += lat;
  }
  LatencyStats st;
  st.min_ms = double(mn) / 1e6;
  st.max_ms = double(mx) / 1e6;
  st.mean_ms = double(sum) / double(trace.frames) / 1e6;
  return st;
}

/// CSV export: `chain,frame,stage,start_ms,end_ms`, six decimals.
inline void write_trace_csv(const PipelineTrace& trace, std::ostream& os) {
  os << "chain,frame,stage,start_ms,end_ms\n";
  char buf[160];
  for (const PipelineEvent& e : trace.events) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%s,%.6f,%.6f\n", e.chain, e.frame,
                  stage_name(e.stage), double(e.start_ns) / 1e6, double(e.end_ns) / 1e6);
    os << buf;
  }
}

}  // namespace orbfe
