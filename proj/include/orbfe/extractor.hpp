#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "orbfe/errors.hpp"
#include "orbfe/image.hpp"
#include "orbfe/pattern.hpp"
#include "orbfe/stream.hpp"

namespace orbfe {

inline constexpr int kBorder = 16;  // patch radius 15 + 1 for rotated-pattern rounding

enum class ArithMode { kFloat, kFixed8 };

/// Detected corner. Coordinates are in the owning level's pixel frame.
struct FeaturePoint {
  int x = 0;
  int y = 0;
  int level = 0;
  int score = 0;
  std::uint8_t theta_q = 0;  // orientation bin, 2*pi/256 per unit
  double theta_f = 0.0;      // radians in [0, 2*pi); reference path
  bool degenerate = false;   // zero-moment patch
};

/// 256 binary tests packed LSB-first: test i at byte i/8, bit i%8.
struct Descriptor {
  std::array<std::uint8_t, 32> bytes{};
  bool operator==(const Descriptor&) const = default;
};

struct Feature {
  FeaturePoint pt;
  Descriptor desc;
};

struct PatchMoments {
  std::int64_t m00 = 0;
  std::int64_t m10 = 0;
  std::int64_t m01 = 0;
};

struct Orientation {
  std::uint8_t theta_q = 0;
  double theta_f = 0.0;
  bool degenerate = false;
};

struct ExtractorConfig {
  int fast_threshold = 20;
  int max_features_per_level = 600;
  ArithMode arith_mode = ArithMode::kFloat;
  int patch_radius = kPatchRadius;  // fixed by the descriptor pattern
  double scale_factor = 1.2;
};

struct FastCorner {
  int x = 0;
  int y = 0;
  int score = 0;
};

namespace detail {

// Bresenham circle of radius 3, ring order.
inline constexpr int kCircleDx[16] = {0, 1, 2, 3, 3, 3, 2, 1, 0, -1, -2, -3, -3, -3, -2, -1};
inline constexpr int kCircleDy[16] = {-3, -3, -2, -1, 0, 1, 2, 3, 3, 3, 2, 1, 0, -1, -2, -3};

// Longest circular run of ring pixels all brighter / all darker than the
// center by more than `threshold`; needs >= 9 to qualify. Returns the sum of
// |I - Ic| over that run, or 0.
inline int segment_score(const std::uint8_t* ring, std::uint8_t center, int threshold) {
  int cls[16];
  int diff[16];
  for (int i = 0; i < 16; ++i) {
    const int d = int(ring[i]) - int(center);
    diff[i] = d < 0 ? -d : d;
    cls[i] = d > threshold ? 1 : (d < -threshold ? -1 : 0);
  }
  int best_len = 0, best_sum = 0;
  int cur_cls = 0, cur_len = 0, cur_sum = 0;
  for (int i = 0; i < 32; ++i) {
    const int k = i & 15;
    if (cls[k] != 0 && cls[k] == cur_cls) {
      if (cur_len < 16) {
        ++cur_len;
        cur_sum += diff[k];
      }
    } else {
      cur_cls = cls[k];
      cur_len = cls[k] != 0 ? 1 : 0;
      cur_sum = cls[k] != 0 ? diff[k] : 0;
    }
    if (cur_cls != 0 && cur_len > best_len) {
      best_len = cur_len;
      best_sum = cur_sum;
    }
  }
  return best_len >= 9 ? best_sum : 0;
}

// Score of the segment test at (x, y) given the 7 source rows around y.
// rows[i] is source row y - 3 + i.
inline int fast_score_at(const std::uint8_t* const rows[7], int x, int threshold) {
  const std::uint8_t center = rows[3][x];
  // Cheap reject: any 9-run must contain ring pixel 0 or 8.
  const int top = rows[0][x], bottom = rows[6][x];
  const int lo = int(center) - threshold, hi = int(center) + threshold;
  if (top >= lo && top <= hi && bottom >= lo && bottom <= hi) return 0;
  std::uint8_t ring[16];
  for (int i = 0; i < 16; ++i) ring[i] = rows[3 + kCircleDy[i]][x + kCircleDx[i]];
  return segment_score(ring, center, threshold);
}

}  // namespace detail

/// FAST segment test (9 contiguous of 16) with 3x3 non-maximum suppression.
/// Candidates are restricted to kBorder pixels inside every edge. Runs as a
/// row stream: 7 source rows plus 3 score rows in flight.
inline std::vector<FastCorner> fast_detect(const GrayImage& img, int threshold) {
  std::vector<FastCorner> out;
  if (!img.valid()) throw PreconditionError("fast_detect: invalid image");
  if (threshold < 1) throw PreconditionError("fast_detect: threshold must be >= 1");
  const int w = img.width, h = img.height;
  if (w < 2 * kBorder + 1 || h < 2 * kBorder + 1) return out;

  LineBuffer<std::uint8_t> lines(w, 7);
  const int y_first = kBorder, y_last = h - kBorder - 1;
  // Three score rows: previous, current, next, indexed modulo 3 by row.
  std::vector<int> scores[3];
  for (auto& s : scores) s.assign(static_cast<std::size_t>(w), 0);
  auto score_row = [&](int y) -> std::vector<int>& { return scores[(y % 3 + 3) % 3]; };

  auto compute_scores = [&](int y) {
    auto& dst = score_row(y);
    std::fill(dst.begin(), dst.end(), 0);
    if (y < y_first || y > y_last) return;
    const std::uint8_t* rows[7];
    for (int i = 0; i < 7; ++i) rows[i] = lines.row(i);
    for (int x = kBorder; x <= w - kBorder - 1; ++x)
      dst[x] = detail::fast_score_at(rows, x, threshold);
  };

  auto emit_row = [&](int y) {
    if (y < y_first || y > y_last) return;
    const auto& prev = score_row(y - 1);
    const auto& cur = score_row(y);
    const auto& next = score_row(y + 1);
    for (int x = kBorder; x <= w - kBorder - 1; ++x) {
      const int s = cur[x];
      if (s == 0) continue;
      // Strictly greater wins; equal scores resolve to the raster-earlier pixel.
      if (prev[x - 1] >= s || prev[x] >= s || prev[x + 1] >= s) continue;
      if (cur[x - 1] >= s) continue;
      if (cur[x + 1] > s || next[x - 1] > s || next[x] > s || next[x + 1] > s) continue;
      out.push_back(FastCorner{x, y, s});
    }
  };

  for (int y = 0; y < h; ++y) {
    lines.push(img.row(y));
    // Window centered on row y - 3 is complete once row y is in. Score rows
    // one past the candidate band stay zero and only serve the suppression.
    const int yc = y - 3;
    if (yc >= y_first - 1 && yc <= y_last + 1) compute_scores(yc);
    if (yc - 1 >= y_first && yc - 1 <= y_last) emit_row(yc - 1);
  }
  return out;
}

/// Intensity moments over the circular patch of radius 15 around (cx, cy).
/// Offsets are relative to the center; row half-width is floor(sqrt(r^2-y^2)).
inline PatchMoments patch_moments(const GrayImage& img, int cx, int cy) {
  if (!img.valid()) throw PreconditionError("patch_moments: invalid image");
  if (cx < kBorder || cy < kBorder || cx > img.width - kBorder - 1 ||
      cy > img.height - kBorder - 1)
    throw PreconditionError("patch_moments: center violates the border");
  static const auto umax = [] {
    std::array<int, kPatchRadius + 1> u{};
    for (int dy = 0; dy <= kPatchRadius; ++dy)
      u[dy] = static_cast<int>(
          std::floor(std::sqrt(double(kPatchRadius * kPatchRadius - dy * dy))));
    return u;
  }();
  PatchMoments m;
  for (int dy = -kPatchRadius; dy <= kPatchRadius; ++dy) {
    const int half = umax[dy < 0 ? -dy : dy];
    const std::uint8_t* r = img.row(cy + dy) + cx;
    std::int64_t row_sum = 0, row_x = 0;
    for (int dx = -half; dx <= half; ++dx) {
      const int I = r[dx];
      row_sum += I;
      row_x += std::int64_t(dx) * I;
    }
    m.m00 += row_sum;
    m.m10 += row_x;
    m.m01 += std::int64_t(dy) * row_sum;
  }
  return m;
}

namespace detail {

// atan(q/256) in orientation bins (256 bins per turn), rounded. q in [0, 255].
inline const std::array<std::uint8_t, 256>& atan_bin_lut() {
  static const auto lut = [] {
    std::array<std::uint8_t, 256> t{};
    for (int q = 0; q < 256; ++q)
      t[q] = static_cast<std::uint8_t>(
          std::lround(std::atan(q / 256.0) * (kOrientationBins / (2.0 * M_PI))));
    return t;
  }();
  return lut;
}

// round(256 * mn / mx) clamped to the 8-bit ratio range.
inline int ratio_q8(std::int64_t mn, std::int64_t mx) {
  const std::int64_t q = (mn * 512 + mx) / (2 * mx);
  return static_cast<int>(q > 255 ? 255 : q);
}

}  // namespace detail

/// Patch orientation from moments. Float mode is the atan2 reference;
/// Fixed8 quantizes the moment ratio to 8 bits and folds octants through a
/// small atan table, staying within 2 bins of the reference.
inline Orientation orientation(const PatchMoments& m, ArithMode mode) {
  if (m.m10 == 0 && m.m01 == 0) return Orientation{0, 0.0, true};
  if (mode == ArithMode::kFloat) {
    double th = std::atan2(double(m.m01), double(m.m10));
    if (th < 0) th += 2.0 * M_PI;
    if (th >= 2.0 * M_PI) th = 0.0;
    const int q = static_cast<int>(std::lround(th * (kOrientationBins / (2.0 * M_PI)))) &
                  (kOrientationBins - 1);
    return Orientation{static_cast<std::uint8_t>(q), th, false};
  }
  const std::int64_t ax = m.m10 < 0 ? -m.m10 : m.m10;
  const std::int64_t ay = m.m01 < 0 ? -m.m01 : m.m01;
  const auto& lut = detail::atan_bin_lut();
  int t;
  if (ay <= ax) {
    const int b = lut[detail::ratio_q8(ay, ax)];
    if (m.m10 >= 0)
      t = m.m01 >= 0 ? b : 256 - b;
    else
      t = m.m01 >= 0 ? 128 - b : 128 + b;
  } else {
    const int b = lut[detail::ratio_q8(ax, ay)];
    if (m.m01 >= 0)
      t = m.m10 >= 0 ? 64 - b : 64 + b;
    else
      t = m.m10 >= 0 ? 192 + b : 192 - b;
  }
  t &= kOrientationBins - 1;
  return Orientation{static_cast<std::uint8_t>(t),
                     t * (2.0 * M_PI / kOrientationBins), false};
}

namespace detail {

// 1-D Gaussian taps, sigma 2, sum 32. The separable product is the 7x7
// integer kernel with sum 1024.
inline constexpr int kGaussTaps[7] = {2, 4, 6, 8, 6, 4, 2};
inline constexpr int kGaussShift = 10;  // sum(taps)^2 = 1024

}  // namespace detail

/// 7x7 integer Gaussian smoothing (sigma 2, kernel sum 1024), edges
/// replicated, result rounded to 8 bits. Streams through a 7-row buffer.
inline GrayImage gaussian_smooth(const GrayImage& img) {
  if (!img.valid()) throw PreconditionError("gaussian_smooth: invalid image");
  const int w = img.width, h = img.height;
  GrayImage out(w, h);
  LineBuffer<std::uint16_t> lines(w, 7);

  std::vector<std::uint16_t> hrow(static_cast<std::size_t>(w));
  auto push_hrow = [&](int y) {
    const std::uint8_t* src = img.row(std::clamp(y, 0, h - 1));
    for (int x = 0; x < w; ++x) {
      int acc = 0;
      for (int k = -3; k <= 3; ++k)
        acc += detail::kGaussTaps[k + 3] * src[std::clamp(x + k, 0, w - 1)];
      hrow[x] = static_cast<std::uint16_t>(acc);
    }
    lines.push(hrow.data());
  };

  for (int y = -3; y <= 3; ++y) push_hrow(y);
  for (int y = 0; y < h; ++y) {
    const std::uint16_t* rows[7];
    for (int i = 0; i < 7; ++i) rows[i] = lines.row(i);
    std::uint8_t* dst = out.row(y);
    for (int x = 0; x < w; ++x) {
      std::uint32_t acc = 0;
      for (int i = 0; i < 7; ++i)
        acc += static_cast<std::uint32_t>(detail::kGaussTaps[i]) * rows[i][x];
      dst[x] = static_cast<std::uint8_t>((acc + 512) >> detail::kGaussShift);
    }
    if (y + 1 < h) push_hrow(y + 4);
  }
  return out;
}

/// Binary tests over the smoothed patch with the pre-rotated pair set for
/// the feature's orientation bin. Bit i is 1 iff I(A_i) < I(B_i).
inline Descriptor compute_descriptor(const GrayImage& smoothed, const FeaturePoint& fp,
                                     const SamplingPattern& pattern) {
  if (fp.x < kBorder || fp.y < kBorder || fp.x > smoothed.width - kBorder - 1 ||
      fp.y > smoothed.height - kBorder - 1)
    throw PreconditionError("compute_descriptor: feature violates the border");
  const PatternPairs& pairs = pattern.rotated[fp.theta_q];
  Descriptor d;
  const std::uint8_t* base = smoothed.data.data() +
                             static_cast<std::size_t>(fp.y) * smoothed.width + fp.x;
  const int stride = smoothed.width;
  for (int i = 0; i < kDescriptorBits; ++i) {
    const PatternPair& p = pairs[i];
    const std::uint8_t a = base[p.ay * stride + p.ax];
    const std::uint8_t b = base[p.by * stride + p.bx];
    if (a < b) d.bytes[i >> 3] |= static_cast<std::uint8_t>(1u << (i & 7));
  }
  return d;
}

/// Full extraction output: features ordered (level, y, x) plus the smoothed
/// level images the matcher's SAD stage samples from.
struct ExtractionResult {
  std::vector<Feature> features;
  std::vector<GrayImage> smoothed;
  double scale_factor = 1.2;
};

/// Runs the per-level chain: detect, rank, orient, smooth, describe.
inline ExtractionResult extract(const ImagePyramid& pyr, const ExtractorConfig& cfg,
                                const SamplingPattern& pattern = default_pattern()) {
  if (pyr.levels.empty()) throw PreconditionError("extract: empty pyramid");
  if (cfg.fast_threshold < 1 || cfg.max_features_per_level < 1)
    throw PreconditionError("extract: bad config");
  ExtractionResult res;
  res.scale_factor = pyr.scale_factor;
  for (int level = 0; level < static_cast<int>(pyr.levels.size()); ++level) {
    const GrayImage& img = pyr.levels[level];
    std::vector<FastCorner> corners;
    if (img.width >= 2 * kBorder + 1 && img.height >= 2 * kBorder + 1)
      corners = fast_detect(img, cfg.fast_threshold);
    if (static_cast<int>(corners.size()) > cfg.max_features_per_level) {
      std::sort(corners.begin(), corners.end(), [](const FastCorner& a, const FastCorner& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.y != b.y) return a.y < b.y;
        return a.x < b.x;
      });
      corners.resize(static_cast<std::size_t>(cfg.max_features_per_level));
      std::sort(corners.begin(), corners.end(), [](const FastCorner& a, const FastCorner& b) {
        if (a.y != b.y) return a.y < b.y;
        return a.x < b.x;
      });
    }
    res.smoothed.push_back(gaussian_smooth(img));
    const GrayImage& smoothed = res.smoothed.back();
    for (const FastCorner& c : corners) {
      const PatchMoments m = patch_moments(img, c.x, c.y);
      const Orientation o = orientation(m, cfg.arith_mode);
      FeaturePoint fp;
      fp.x = c.x;
      fp.y = c.y;
      fp.level = level;
      fp.score = c.score;
      fp.theta_q = o.theta_q;
      fp.theta_f = o.theta_f;
      fp.degenerate = o.degenerate;
      res.features.push_back(Feature{fp, compute_descriptor(smoothed, fp, pattern)});
    }
  }
  return res;
}

}  // namespace orbfe
