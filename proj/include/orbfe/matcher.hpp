#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <span>
#include <vector>

#include "orbfe/errors.hpp"
#include "orbfe/extractor.hpp"
#include "orbfe/image.hpp"

namespace orbfe {

inline constexpr int kSadRadius = 5;  // 11x11 SAD window

/// Epipolar strip in the right image: same row band, bounded disparity.
struct SearchStrip {
  int row_tolerance = 2;
  int min_disparity = 1;
  int max_disparity = 96;
};

struct MatcherConfig {
  int max_hamming = 64;
  int sad_slide = 5;
};

struct StereoCalib {
  double fx = 0.0;        // pixels
  double baseline = 0.0;  // meters
  bool valid() const { return fx > 0.0 && baseline > 0.0; }
};

struct MatchCandidate {
  int left_idx = -1;
  int right_idx = -1;
  int hamming = 0;
};

/// Final stereo correspondence. Disparity is sub-pixel, in level-0 units.
struct MatchPair {
  FeaturePoint left;
  FeaturePoint right;
  int hamming = 0;
  double disparity = 0.0;
  double depth = std::numeric_limits<double>::quiet_NaN();
  int sad_min = 0;
};

inline int hamming_distance(const Descriptor& a, const Descriptor& b) {
  int bits = 0;
  for (int i = 0; i < 4; ++i) {
    std::uint64_t wa, wb;
    std::memcpy(&wa, a.bytes.data() + 8 * i, 8);
    std::memcpy(&wb, b.bytes.data() + 8 * i, 8);
    bits += std::popcount(wa ^ wb);
  }
  return bits;
}

/// Best-Hamming match per left feature inside the strip, then a one-to-one
/// prune keeping the lowest-Hamming claimant per right feature. Both inputs
/// must come from the same pyramid level. Ties resolve to the smaller
/// disparity, then the smaller right index; prune ties to the smaller left
/// index. Candidates are ordered by left index.
inline std::vector<MatchCandidate> stereo_match(std::span<const Feature> left,
                                                std::span<const Feature> right,
                                                const SearchStrip& strip,
                                                int max_hamming) {
  if (strip.row_tolerance < 0 || strip.min_disparity < 0 ||
      strip.min_disparity >= strip.max_disparity)
    throw PreconditionError("stereo_match: bad strip");

  // Bucket right features by row.
  int max_y = -1;
  for (const Feature& f : right) max_y = std::max(max_y, f.pt.y);
  std::vector<std::vector<int>> by_row(static_cast<std::size_t>(max_y + 1));
  for (int i = 0; i < static_cast<int>(right.size()); ++i)
    by_row[static_cast<std::size_t>(right[i].pt.y)].push_back(i);

  std::vector<MatchCandidate> claims;
  claims.reserve(left.size());
  for (int il = 0; il < static_cast<int>(left.size()); ++il) {
    const Feature& fl = left[il];
    int best_h = max_hamming + 1, best_d = 0, best_ir = -1;
    for (int y = fl.pt.y - strip.row_tolerance; y <= fl.pt.y + strip.row_tolerance; ++y) {
      if (y < 0 || y > max_y) continue;
      for (int ir : by_row[static_cast<std::size_t>(y)]) {
        const Feature& fr = right[static_cast<std::size_t>(ir)];
        const int d = fl.pt.x - fr.pt.x;
        if (d < strip.min_disparity || d > strip.max_disparity) continue;
        const int h = hamming_distance(fl.desc, fr.desc);
        if (h > max_hamming) continue;
        if (h < best_h || (h == best_h && (d < best_d || (d == best_d && ir < best_ir)))) {
          best_h = h;
          best_d = d;
          best_ir = ir;
        }
      }
    }
    if (best_ir >= 0) claims.push_back(MatchCandidate{il, best_ir, best_h});
  }

  // One-to-one prune on the right side.
  std::vector<int> winner(right.size(), -1);
  for (int c = 0; c < static_cast<int>(claims.size()); ++c) {
    const int ir = claims[static_cast<std::size_t>(c)].right_idx;
    int& w = winner[static_cast<std::size_t>(ir)];
    if (w < 0 || claims[static_cast<std::size_t>(c)].hamming <
                     claims[static_cast<std::size_t>(w)].hamming)
      w = c;  // equal Hamming keeps the earlier (smaller left index) claim
  }
  std::vector<MatchCandidate> out;
  out.reserve(claims.size());
  for (int c = 0; c < static_cast<int>(claims.size()); ++c)
    if (winner[static_cast<std::size_t>(claims[static_cast<std::size_t>(c)].right_idx)] == c)
      out.push_back(claims[static_cast<std::size_t>(c)]);
  return out;
}

/// Sum of absolute differences of two 11x11 windows.
inline int sad_window(const GrayImage& img_l, const GrayImage& img_r, int xl, int yl,
                      int xr, int yr) {
  auto inside = [](const GrayImage& im, int x, int y) {
    return x >= kSadRadius && y >= kSadRadius && x < im.width - kSadRadius &&
           y < im.height - kSadRadius;
  };
  if (!inside(img_l, xl, yl) || !inside(img_r, xr, yr))
    throw PreconditionError("sad_window: window out of bounds");
  int sum = 0;
  for (int dy = -kSadRadius; dy <= kSadRadius; ++dy) {
    const std::uint8_t* rl = img_l.row(yl + dy) + xl;
    const std::uint8_t* rr = img_r.row(yr + dy) + xr;
    for (int dx = -kSadRadius; dx <= kSadRadius; ++dx) {
      const int d = int(rl[dx]) - int(rr[dx]);
      sum += d < 0 ? -d : d;
    }
  }
  return sum;
}

struct SadResult {
  bool ok = false;
  double disparity = 0.0;  // corrected, this level's pixel units
  int sad_min = 0;
  int d_star = 0;
  double delta = 0.0;
};

/// Fixes the left window and slides the right one horizontally within
/// [-slide, +slide]; takes the SAD-minimizing offset, then a parabolic
/// sub-pixel refinement when the minimum is interior. The corrected
/// disparity is (xl - xr) - (d* + delta). Candidates whose slide range
/// leaves the image are rejected (ok = false).
inline SadResult sad_rectify(const GrayImage& img_l, const GrayImage& img_r, int xl,
                             int yl, int xr, int yr, int slide = 5) {
  if (slide < 0) throw PreconditionError("sad_rectify: negative slide");
  SadResult res;
  auto inside = [](const GrayImage& im, int x, int y) {
    return x >= kSadRadius && y >= kSadRadius && x < im.width - kSadRadius &&
           y < im.height - kSadRadius;
  };
  if (!inside(img_l, xl, yl) || !inside(img_r, xr - slide, yr) ||
      !inside(img_r, xr + slide, yr))
    return res;

  std::vector<int> sad(static_cast<std::size_t>(2 * slide + 1));
  for (int d = -slide; d <= slide; ++d)
    sad[static_cast<std::size_t>(d + slide)] = sad_window(img_l, img_r, xl, yl, xr + d, yr);
  // Minimum SAD; equal sums keep the offset closest to the initial match,
  // negative side first.
  int best = -slide;
  for (int d = -slide + 1; d <= slide; ++d) {
    const int s = sad[static_cast<std::size_t>(d + slide)];
    const int b = sad[static_cast<std::size_t>(best + slide)];
    if (s < b || (s == b && (std::abs(d) < std::abs(best) ||
                             (std::abs(d) == std::abs(best) && d < best))))
      best = d;
  }
  const int s0 = sad[static_cast<std::size_t>(best + slide)];
  double delta = 0.0;
  if (best > -slide && best < slide && s0 > 0) {
    const double sm = sad[static_cast<std::size_t>(best - 1 + slide)];
    const double sp = sad[static_cast<std::size_t>(best + 1 + slide)];
    const double denom = sm - 2.0 * s0 + sp;
    if (denom != 0.0) delta = std::clamp((sm - sp) / (2.0 * denom), -0.5, 0.5);
  }
  res.ok = true;
  res.d_star = best;
  res.delta = delta;
  res.sad_min = s0;
  res.disparity = double(xl - xr) - (double(best) + delta);
  return res;
}

/// Depth from disparity; non-positive disparity or missing calibration
/// yields NaN (match kept, depth invalid).
inline double disparity_to_depth(double disparity, const StereoCalib& calib) {
  if (!(disparity > 0.0) || !calib.valid())
    return std::numeric_limits<double>::quiet_NaN();
  return calib.fx * calib.baseline / disparity;
}

struct MatchResult {
  std::vector<MatchPair> pairs;
  int dropped_sad_oob = 0;
};

/// Per-level stereo matching + SAD rectification + depth. Levels never mix;
/// disparities are scaled back to level-0 units. Output ordered
/// (level, left y, left x).
inline MatchResult match_stereo(const ExtractionResult& left, const ExtractionResult& right,
                                const SearchStrip& strip, const StereoCalib& calib,
                                const MatcherConfig& cfg = MatcherConfig{}) {
  if (left.smoothed.size() != right.smoothed.size())
    throw PreconditionError("match_stereo: mismatched pyramids");
  MatchResult out;
  const int levels = static_cast<int>(left.smoothed.size());
  for (int level = 0; level < levels; ++level) {
    auto level_span = [level](const std::vector<Feature>& fs) {
      auto lo = std::partition_point(fs.begin(), fs.end(), [level](const Feature& f) {
        return f.pt.level < level;
      });
      auto hi = std::partition_point(lo, fs.end(), [level](const Feature& f) {
        return f.pt.level <= level;
      });
      return std::span<const Feature>(fs.data() + (lo - fs.begin()),
                                      static_cast<std::size_t>(hi - lo));
    };
    const std::span<const Feature> lf = level_span(left.features);
    const std::span<const Feature> rf = level_span(right.features);
    if (lf.empty() || rf.empty()) continue;

    const double level_scale = std::pow(left.scale_factor, level);
    for (const MatchCandidate& c : stereo_match(lf, rf, strip, cfg.max_hamming)) {
      const FeaturePoint& pl = lf[static_cast<std::size_t>(c.left_idx)].pt;
      const FeaturePoint& pr = rf[static_cast<std::size_t>(c.right_idx)].pt;
      const SadResult sad = sad_rectify(left.smoothed[static_cast<std::size_t>(level)],
                                        right.smoothed[static_cast<std::size_t>(level)],
                                        pl.x, pl.y, pr.x, pr.y, cfg.sad_slide);
      if (!sad.ok) {
        ++out.dropped_sad_oob;
        continue;
      }
      MatchPair pair;
      pair.left = pl;
      pair.right = pr;
      pair.hamming = c.hamming;
      pair.disparity = sad.disparity * level_scale;
      pair.depth = disparity_to_depth(pair.disparity, calib);
      pair.sad_min = sad.sad_min;
      out.pairs.push_back(pair);
    }
  }
  return out;
}

}  // namespace orbfe
