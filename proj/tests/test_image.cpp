#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "orbfe/image.hpp"
#include "orbfe/stream.hpp"

namespace fs = std::filesystem;
using namespace orbfe;

namespace {

fs::path scratch_file(const std::string& name) {
  const fs::path dir = fs::path(testing::TempDir()) / "orbfe_image";
  fs::create_directories(dir);
  return dir / name;
}

void write_bytes(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

GrayImage random_image(int w, int h, std::uint32_t seed) {
  GrayImage img(w, h);
  std::mt19937 gen(seed);
  for (auto& px : img.data) px = static_cast<std::uint8_t>(gen() & 0xff);
  return img;
}

}  // namespace

TEST(GrayImage, BasicAccess) {
  GrayImage img(3, 2, 7);
  EXPECT_TRUE(img.valid());
  EXPECT_EQ(img.at(2, 1), 7);
  img.at(2, 1) = 9;
  EXPECT_EQ(img.row(1)[2], 9);
  EXPECT_THROW(GrayImage(0, 5), PreconditionError);
  EXPECT_THROW(GrayImage(5, -1), PreconditionError);
}

TEST(LoadPgm, AllZeroImage) {
  const fs::path p = scratch_file("zeros.pgm");
  write_bytes(p, std::string("P5\n4 4\n255\n") + std::string(16, '\0'));
  const GrayImage img = load_pgm(p.string());
  EXPECT_EQ(img.width, 4);
  EXPECT_EQ(img.height, 4);
  for (auto px : img.data) EXPECT_EQ(px, 0);
}

TEST(LoadPgm, CommentsAndWhitespace) {
  const fs::path p = scratch_file("comments.pgm");
  write_bytes(p, std::string("P5 # trailing comment\n# full line\n  2\t1 \n# again\n255\n") +
                     std::string("\x10\x20", 2));
  const GrayImage img = load_pgm(p.string());
  EXPECT_EQ(img.width, 2);
  EXPECT_EQ(img.height, 1);
  EXPECT_EQ(img.at(0, 0), 0x10);
  EXPECT_EQ(img.at(1, 0), 0x20);
}

TEST(LoadPgm, Errors) {
  const fs::path ascii = scratch_file("ascii.pgm");
  write_bytes(ascii, "P2\n1 1\n255\n128\n");
  EXPECT_THROW(load_pgm(ascii.string()), FormatError);

  const fs::path deep = scratch_file("deep.pgm");
  write_bytes(deep, std::string("P5\n1 1\n65535\n") + std::string(2, '\x01'));
  EXPECT_THROW(load_pgm(deep.string()), UnsupportedDepthError);

  const fs::path trunc = scratch_file("trunc.pgm");
  write_bytes(trunc, std::string("P5\n4 4\n255\n") + std::string(7, '\x01'));
  EXPECT_THROW(load_pgm(trunc.string()), IoError);

  EXPECT_THROW(load_pgm((scratch_file("none") / "missing.pgm").string()), IoError);

  const fs::path junk = scratch_file("junk.pgm");
  write_bytes(junk, "P5\nxy 4\n255\n");
  EXPECT_THROW(load_pgm(junk.string()), FormatError);
}

TEST(SavePgm, SmallestImage) {
  GrayImage img(1, 1);
  img.at(0, 0) = 0x80;
  const fs::path p = scratch_file("one.pgm");
  save_pgm(img, p.string());
  EXPECT_EQ(read_bytes(p), std::string("P5\n1 1\n255\n") + std::string(1, '\x80'));
}

TEST(SavePgm, RoundTripRandom) {
  const GrayImage img = random_image(640, 480, 42);
  const fs::path p = scratch_file("rand.pgm");
  save_pgm(img, p.string());
  EXPECT_EQ(load_pgm(p.string()), img);

  // Byte-level inverse: saving what was loaded reproduces the file.
  const std::string bytes = read_bytes(p);
  const fs::path q = scratch_file("rand2.pgm");
  save_pgm(load_pgm(p.string()), q.string());
  EXPECT_EQ(read_bytes(q), bytes);
}

TEST(SavePgm, RejectsInvalidImage) {
  GrayImage img;
  EXPECT_THROW(save_pgm(img, scratch_file("never.pgm").string()), PreconditionError);
  GrayImage bad(2, 2);
  bad.data.resize(3);
  EXPECT_THROW(save_pgm(bad, scratch_file("never.pgm").string()), PreconditionError);
}

TEST(ResizeBilinear, TwoToOne) {
  GrayImage src(2, 1);
  src.at(0, 0) = 0;
  src.at(1, 0) = 200;
  const GrayImage dst = resize_bilinear(src, 1, 1);
  EXPECT_EQ(dst.at(0, 0), 100);
}

TEST(ResizeBilinear, ConstantStaysConstant) {
  const GrayImage src(37, 23, 77);
  for (auto [w, h] : {std::pair{31, 19}, {10, 23}, {1, 1}}) {
    const GrayImage dst = resize_bilinear(src, w, h);
    for (auto px : dst.data) EXPECT_EQ(px, 77);
  }
}

TEST(ResizeBilinear, OutputWithinSourceRange) {
  const GrayImage src = random_image(64, 48, 7);
  const auto [mn, mx] = std::minmax_element(src.data.begin(), src.data.end());
  const GrayImage dst = resize_bilinear(src, 53, 40);
  for (auto px : dst.data) {
    EXPECT_GE(px, *mn);
    EXPECT_LE(px, *mx);
  }
}

TEST(ResizeBilinear, HandComputedRow) {
  GrayImage src(4, 1);
  src.at(0, 0) = 0;
  src.at(1, 0) = 100;
  src.at(2, 0) = 200;
  src.at(3, 0) = 44;
  const GrayImage dst = resize_bilinear(src, 2, 1);
  // u=0 samples x=0.5 -> 50; u=1 samples x=2.5 -> (200+44)/2 = 122.
  EXPECT_EQ(dst.at(0, 0), 50);
  EXPECT_EQ(dst.at(1, 0), 122);
}

TEST(ResizeBilinear, RejectsUpscale) {
  const GrayImage src(4, 4, 1);
  EXPECT_THROW(resize_bilinear(src, 5, 4), PreconditionError);
  EXPECT_THROW(resize_bilinear(src, 4, 5), PreconditionError);
  EXPECT_THROW(resize_bilinear(src, 0, 4), PreconditionError);
}

TEST(PyramidDims, ReferenceResolutions) {
  int w1 = 0, h1 = 0;
  pyramid_level1_dims(1280, 720, 1.2, &w1, &h1);
  EXPECT_EQ(w1, 1067);
  EXPECT_EQ(h1, 600);
  pyramid_level1_dims(640, 480, 1.2, &w1, &h1);
  EXPECT_EQ(w1, 534);
  EXPECT_EQ(h1, 400);
}

TEST(BuildPyramid, TwoLevels) {
  const GrayImage src = random_image(640, 480, 3);
  const ImagePyramid pyr = build_pyramid(src, 1.2);
  ASSERT_EQ(pyr.levels.size(), 2u);
  EXPECT_EQ(pyr.levels[0], src);
  EXPECT_EQ(pyr.levels[1].width, 534);
  EXPECT_EQ(pyr.levels[1].height, 400);
  EXPECT_LT(pyr.levels[1].width, pyr.levels[0].width);
  EXPECT_LT(pyr.levels[1].height, pyr.levels[0].height);
}

TEST(BuildPyramid, Errors) {
  const GrayImage src(64, 48, 0);
  EXPECT_THROW(build_pyramid(src, 1.0), PreconditionError);
  EXPECT_THROW(build_pyramid(src, 0.8), PreconditionError);
  const GrayImage tiny(1, 1, 0);
  EXPECT_THROW(build_pyramid(tiny, 1.2), PreconditionError);
}

TEST(LineBuffer, RingSemantics) {
  LineBuffer<int> buf(3, 4);
  EXPECT_FALSE(buf.full());
  const int rows[6][3] = {{0, 1, 2},    {10, 11, 12}, {20, 21, 22},
                          {30, 31, 32}, {40, 41, 42}, {50, 51, 52}};
  for (int i = 0; i < 4; ++i) buf.push(rows[i]);
  EXPECT_TRUE(buf.full());
  EXPECT_EQ(buf.row(0)[0], 0);
  EXPECT_EQ(buf.row(3)[2], 32);
  buf.push(rows[4]);
  buf.push(rows[5]);
  EXPECT_EQ(buf.row(0)[1], 21);  // oldest retained row is now row 2
  EXPECT_EQ(buf.row(3)[1], 51);
  EXPECT_EQ(buf.pushed(), 6);
  EXPECT_THROW(LineBuffer<int>(0, 3), PreconditionError);
}
