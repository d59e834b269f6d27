#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>
#include <string>

#include "orbfe/errors.hpp"

namespace orbfe {

inline constexpr int kPatchRadius = 15;        // 31x31 patch
inline constexpr int kDescriptorBits = 256;    // 32 x 8-bit descriptor
inline constexpr int kOrientationBins = 256;   // 8-bit orientation
inline constexpr std::uint32_t kPatternSeed = 0x0b5e55edu;

/// One comparison pair; offsets are relative to the patch center.
struct PatternPair {
  std::int8_t ax = 0, ay = 0, bx = 0, by = 0;
  bool operator==(const PatternPair&) const = default;
};

using PatternPairs = std::array<PatternPair, kDescriptorBits>;

/// Base comparison pairs plus one pre-rotated copy per orientation bin.
struct SamplingPattern {
  PatternPairs base{};
  std::array<PatternPairs, kOrientationBins> rotated{};
};

namespace detail {

// Deterministic approximate-normal draw: sum of 12 uniforms, variance 1.
// Avoids std::normal_distribution, whose stream is implementation-defined.
inline double gauss01(std::mt19937& gen) {
  double s = 0.0;
  for (int i = 0; i < 12; ++i) s += gen() * (1.0 / 4294967296.0);
  return s - 6.0;
}

inline std::int8_t gauss_coord(std::mt19937& gen, double sigma) {
  const long v = std::lround(detail::gauss01(gen) * sigma);
  return static_cast<std::int8_t>(v);
}

}  // namespace detail

/// Draws the comparison pairs from an isotropic Gaussian (sigma = patch
/// width / 5), redrawing any point that falls outside the patch radius.
inline PatternPairs generate_pattern_pairs(std::uint32_t seed = kPatternSeed) {
  const double sigma = (2 * kPatchRadius + 1) / 5.0;
  std::mt19937 gen(seed);
  auto draw_point = [&](std::int8_t* x, std::int8_t* y) {
    for (;;) {
      const std::int8_t px = detail::gauss_coord(gen, sigma);
      const std::int8_t py = detail::gauss_coord(gen, sigma);
      if (px * px + py * py <= kPatchRadius * kPatchRadius) {
        *x = px;
        *y = py;
        return;
      }
    }
  };
  PatternPairs pairs{};
  for (auto& p : pairs) {
    draw_point(&p.ax, &p.ay);
    draw_point(&p.bx, &p.by);
  }
  return pairs;
}

/// Rotates every pair to each orientation bin. sin/cos are tabulated at 13
/// fractional bits, so only the comparison points are ever rotated.
inline SamplingPattern build_sampling_pattern(const PatternPairs& base) {
  for (const auto& p : base) {
    if (p.ax * p.ax + p.ay * p.ay > kPatchRadius * kPatchRadius ||
        p.bx * p.bx + p.by * p.by > kPatchRadius * kPatchRadius)
      throw PreconditionError("pattern pair outside patch radius");
  }
  SamplingPattern pat;
  pat.base = base;
  for (int t = 0; t < kOrientationBins; ++t) {
    const double angle = t * (2.0 * M_PI / kOrientationBins);
    const long c13 = std::lround(std::cos(angle) * 8192.0);
    const long s13 = std::lround(std::sin(angle) * 8192.0);
    auto rot_x = [&](int x, int y) {
      return static_cast<std::int8_t>(std::lround((c13 * x - s13 * y) / 8192.0));
    };
    auto rot_y = [&](int x, int y) {
      return static_cast<std::int8_t>(std::lround((s13 * x + c13 * y) / 8192.0));
    };
    for (int i = 0; i < kDescriptorBits; ++i) {
      const PatternPair& p = base[i];
      pat.rotated[t][i] = PatternPair{rot_x(p.ax, p.ay), rot_y(p.ax, p.ay),
                                      rot_x(p.bx, p.by), rot_y(p.bx, p.by)};
    }
  }
  return pat;
}

/// The pinned pattern every extractor uses unless a file overrides it.
inline const SamplingPattern& default_pattern() {
  static const std::unique_ptr<SamplingPattern> pat = [] {
    auto p = std::make_unique<SamplingPattern>();
    *p = build_sampling_pattern(generate_pattern_pairs(kPatternSeed));
    return p;
  }();
  return *pat;
}

/// Pattern file: 256 lines of "ax ay bx by".
inline PatternPairs load_pattern_pairs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  PatternPairs pairs{};
  for (int i = 0; i < kDescriptorBits; ++i) {
    int ax, ay, bx, by;
    if (!(in >> ax >> ay >> bx >> by))
      throw FormatError(path + ": expected 256 'ax ay bx by' lines");
    if (std::abs(ax) > kPatchRadius || std::abs(ay) > kPatchRadius ||
        std::abs(bx) > kPatchRadius || std::abs(by) > kPatchRadius)
      throw FormatError(path + ": pattern offset outside patch radius");
    pairs[i] = PatternPair{static_cast<std::int8_t>(ax), static_cast<std::int8_t>(ay),
                           static_cast<std::int8_t>(bx), static_cast<std::int8_t>(by)};
  }
  return pairs;
}

inline void save_pattern_pairs(const PatternPairs& pairs, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  for (const auto& p : pairs)
    out << int(p.ax) << ' ' << int(p.ay) << ' ' << int(p.bx) << ' ' << int(p.by) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace orbfe
