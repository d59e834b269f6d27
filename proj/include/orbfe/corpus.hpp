#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "orbfe/errors.hpp"
#include "orbfe/image.hpp"

namespace orbfe {

/// Synthetic rectified stereo corpus: textured noise plus hard-edged
/// squares, with the right image an exact horizontal shift of the left.
/// Ground-truth disparity is `shift` everywhere, so fx * baseline / shift
/// is the uniform scene depth.
struct CorpusConfig {
  int width = 640;
  int height = 480;
  int frames = 30;
  int shift = 12;
  std::uint64_t seed = 1;
  double fx = 500.0;
  double baseline = 0.12;
};

namespace detail {

/// Smooth value noise: random bytes on an 8 px lattice, bilinearly
/// interpolated between lattice points.
inline GrayImage value_noise(int width, int height, std::mt19937_64& gen) {
  constexpr int kStep = 8;
  const int gw = width / kStep + 2;
  const int gh = height / kStep + 2;
  std::vector<std::uint8_t> lattice(static_cast<std::size_t>(gw) * static_cast<std::size_t>(gh));
  for (std::uint8_t& v : lattice) v = static_cast<std::uint8_t>(gen() & 0xff);

  GrayImage img(width, height);
  for (int y = 0; y < height; ++y) {
    const int gy = y / kStep;
    const double fy = double(y % kStep) / kStep;
    for (int x = 0; x < width; ++x) {
      const int gx = x / kStep;
      const double fx = double(x % kStep) / kStep;
      auto at = [&](int i, int j) {
        return double(lattice[static_cast<std::size_t>(j) * static_cast<std::size_t>(gw) +
                              static_cast<std::size_t>(i)]);
      };
      const double top = at(gx, gy) * (1.0 - fx) + at(gx + 1, gy) * fx;
      const double bot = at(gx, gy + 1) * (1.0 - fx) + at(gx + 1, gy + 1) * fx;
      img.at(x, y) = static_cast<std::uint8_t>(std::lround(top * (1.0 - fy) + bot * fy));
    }
  }
  return img;
}

/// One frame's shared base texture, `shift` columns wider than the output.
inline GrayImage corpus_base(const CorpusConfig& cfg, int frame) {
  std::mt19937_64 gen(cfg.seed ^ (0x9e3779b97f4a7c15ULL * std::uint64_t(frame + 1)));
  const int bw = cfg.width + cfg.shift;
  GrayImage base = value_noise(bw, cfg.height, gen);
  const int squares = bw * cfg.height / 2000;
  for (int s = 0; s < squares; ++s) {
    const int size = 4 + int(gen() % 7);
    const int x0 = int(gen() % std::uint64_t(bw - size));
    const int y0 = int(gen() % std::uint64_t(cfg.height - size));
    const std::uint8_t v = (gen() & 1) ? 255 : 0;
    for (int y = y0; y < y0 + size; ++y)
      for (int x = x0; x < x0 + size; ++x) base.at(x, y) = v;
  }
  return base;
}

}  // namespace detail

/// Left and right views of one frame. left(x) = base(x),
/// right(x) = base(x + shift), so a scene point seen at x in the left image
/// appears at x - shift in the right image.
inline std::pair<GrayImage, GrayImage> make_stereo_frame(const CorpusConfig& cfg, int frame) {
  if (cfg.width < 1 || cfg.height < 1 || cfg.shift < 0)
    throw PreconditionError("make_stereo_frame: bad corpus config");
  const GrayImage base = detail::corpus_base(cfg, frame);
  GrayImage left(cfg.width, cfg.height), right(cfg.width, cfg.height);
  for (int y = 0; y < cfg.height; ++y)
    for (int x = 0; x < cfg.width; ++x) {
      left.at(x, y) = base.at(x, y);
      right.at(x, y) = base.at(x + cfg.shift, y);
    }
  return {std::move(left), std::move(right)};
}

inline std::string frame_name(int frame) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%04d.pgm", frame);
  return buf;
}

/// Writes left/, right/ and calib.txt under dir.
inline void write_corpus(const std::filesystem::path& dir, const CorpusConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "left");
  fs::create_directories(dir / "right");
  for (int f = 0; f < cfg.frames; ++f) {
    auto [left, right] = make_stereo_frame(cfg, f);
    save_pgm(left, (dir / "left" / frame_name(f)).string());
    save_pgm(right, (dir / "right" / frame_name(f)).string());
  }
  std::ofstream calib(dir / "calib.txt");
  if (!calib) throw IoError("write_corpus: cannot write calib.txt");
  char buf[96];
  std::snprintf(buf, sizeof(buf), "fx = %.6f\nbaseline = %.6f\n", cfg.fx, cfg.baseline);
  calib << buf;
}

}  // namespace orbfe
