#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "orbfe/errors.hpp"

namespace orbfe {

/// 8-bit grayscale raster, row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  GrayImage() = default;
  GrayImage(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), data(static_cast<std::size_t>(w < 0 ? 0 : w) *
                                      static_cast<std::size_t>(h < 0 ? 0 : h),
                                  fill) {
    if (w <= 0 || h <= 0) throw PreconditionError("image dimensions must be positive");
  }

  std::uint8_t at(int x, int y) const {
    return data[static_cast<std::size_t>(y) * width + x];
  }
  std::uint8_t& at(int x, int y) {
    return data[static_cast<std::size_t>(y) * width + x];
  }
  const std::uint8_t* row(int y) const {
    return data.data() + static_cast<std::size_t>(y) * width;
  }
  std::uint8_t* row(int y) { return data.data() + static_cast<std::size_t>(y) * width; }

  bool valid() const {
    return width > 0 && height > 0 &&
           data.size() == static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }

  bool operator==(const GrayImage&) const = default;
};

/// Two-level scale stack. Level 0 is the source image.
struct ImagePyramid {
  std::vector<GrayImage> levels;
  double scale_factor = 1.2;
};

namespace detail {

// Skips PGM whitespace and '#' comment lines, then reads one unsigned value.
inline long pgm_value(std::istream& in) {
  int c = in.get();
  while (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '#') {
    if (c == '#') {
      while (c != '\n' && c != EOF) c = in.get();
    }
    c = in.get();
  }
  if (c < '0' || c > '9') throw FormatError("PGM header: expected a number");
  long v = 0;
  while (c >= '0' && c <= '9') {
    v = v * 10 + (c - '0');
    if (v > 1000000000L) throw FormatError("PGM header: value out of range");
    c = in.get();
  }
  if (c != EOF) in.unget();
  return v;
}

}  // namespace detail

/// Reads a binary PGM (P5, maxval 255).
inline GrayImage load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char m0 = 0, m1 = 0;
  in.get(m0);
  in.get(m1);
  if (!in || m0 != 'P' || m1 != '5') throw FormatError(path + ": not a binary PGM (P5)");
  const long w = detail::pgm_value(in);
  const long h = detail::pgm_value(in);
  const long maxval = detail::pgm_value(in);
  if (w <= 0 || h <= 0 || w > 1 << 20 || h > 1 << 20)
    throw FormatError(path + ": bad PGM dimensions");
  if (maxval != 255)
    throw UnsupportedDepthError(path + ": only maxval 255 is supported");
  in.get();  // single whitespace byte before the payload
  if (!in) throw IoError(path + ": truncated PGM header");
  GrayImage img(static_cast<int>(w), static_cast<int>(h));
  in.read(reinterpret_cast<char*>(img.data.data()),
          static_cast<std::streamsize>(img.data.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.data.size()))
    throw IoError(path + ": truncated PGM payload");
  return img;
}

/// Writes a binary PGM (P5, maxval 255). load_pgm inverts it.
inline void save_pgm(const GrayImage& img, const std::string& path) {
  if (!img.valid()) throw PreconditionError("save_pgm: invalid image");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data.data()),
            static_cast<std::streamsize>(img.data.size()));
  if (!out) throw IoError("write failed: " + path);
}

/// Downscales with pixel-center sampling, edge clamp, and half-up rounding.
inline GrayImage resize_bilinear(const GrayImage& src, int dst_w, int dst_h) {
  if (!src.valid()) throw PreconditionError("resize_bilinear: invalid source");
  if (dst_w < 1 || dst_h < 1) throw PreconditionError("resize_bilinear: target too small");
  if (dst_w > src.width || dst_h > src.height)
    throw PreconditionError("resize_bilinear: upscaling is not supported");

  GrayImage dst(dst_w, dst_h);
  const double sx = static_cast<double>(src.width) / dst_w;
  const double sy = static_cast<double>(src.height) / dst_h;
  for (int v = 0; v < dst_h; ++v) {
    double fy = std::clamp((v + 0.5) * sy - 0.5, 0.0, src.height - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, src.height - 1);
    const double wy = fy - y0;
    const std::uint8_t* r0 = src.row(y0);
    const std::uint8_t* r1 = src.row(y1);
    std::uint8_t* out = dst.row(v);
    for (int u = 0; u < dst_w; ++u) {
      double fx = std::clamp((u + 0.5) * sx - 0.5, 0.0, src.width - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, src.width - 1);
      const double wx = fx - x0;
      const double top = (1.0 - wx) * r0[x0] + wx * r0[x1];
      const double bot = (1.0 - wx) * r1[x0] + wx * r1[x1];
      const double val = (1.0 - wy) * top + wy * bot;
      out[u] = static_cast<std::uint8_t>(std::floor(val + 0.5));
    }
  }
  return dst;
}

/// Level-1 width uses ceil, height uses round; pins 1280x720 -> 1067x600 at 1.2.
inline void pyramid_level1_dims(int w, int h, double scale_factor, int* w1, int* h1) {
  *w1 = static_cast<int>(std::ceil(w / scale_factor - 1e-9));
  *h1 = static_cast<int>(std::lround(h / scale_factor));
}

/// Builds the two-level pyramid: level 0 verbatim, level 1 bilinear-downscaled.
inline ImagePyramid build_pyramid(const GrayImage& src, double scale_factor = 1.2) {
  if (!(scale_factor > 1.0)) throw PreconditionError("build_pyramid: scale_factor must be > 1");
  if (!src.valid()) throw PreconditionError("build_pyramid: invalid source");
  int w1 = 0, h1 = 0;
  pyramid_level1_dims(src.width, src.height, scale_factor, &w1, &h1);
  if (w1 < 1 || h1 < 1 || w1 >= src.width || h1 >= src.height)
    throw PreconditionError("build_pyramid: source too small to shrink");
  ImagePyramid pyr;
  pyr.scale_factor = scale_factor;
  pyr.levels.push_back(src);
  pyr.levels.push_back(resize_bilinear(src, w1, h1));
  return pyr;
}

}  // namespace orbfe
