#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "uti/image_ops.hpp"

using namespace uti;

TEST(Bicubic, ConstantImageStaysConstant) {
  for (auto [sr, sc, dr, dc] : {std::array<std::size_t, 4>{64, 842, 64, 64}, {16, 16, 32, 32}, {5, 9, 3, 2}}) {
    std::vector<std::uint8_t> src(sr * sc, 17);
    const Frame f = bicubic_resize(src, sr, sc, dc, dr);
    ASSERT_EQ(f.rows, dr);
    ASSERT_EQ(f.cols, dc);
    for (double v : f.pixels) EXPECT_NEAR(v, 17.0, 1e-12);
  }
}

TEST(Bicubic, RawFrameShrinksTo64x64) {
  std::vector<std::uint8_t> src(64 * 842, 100);
  const Frame f = bicubic_resize(src, 64, 842);
  EXPECT_EQ(f.rows, 64u);
  EXPECT_EQ(f.cols, 64u);
  EXPECT_EQ(f.pixels.size(), kFramePixels);
  EXPECT_EQ(f.scale, ScaleTag::raw255);
}

TEST(Bicubic, UpsampleMatchesDirectTwoDimensionalKernel) {
  std::mt19937_64 gen(5);
  std::uniform_int_distribution<int> d(0, 255);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> src(16 * 16);
    for (auto& v : src) v = d(gen);
    const auto fast = bicubic_resample(std::span<const double>(src), 16, 16, 32, 32);
    const auto slow = oracle::bicubic_direct(src, 16, 16, 32, 32);
    for (std::size_t i = 0; i < fast.size(); ++i) ASSERT_NEAR(fast[i], slow[i], 1e-6);
  }
}

TEST(Bicubic, DownsampleMatchesDirectKernel) {
  std::mt19937_64 gen(6);
  std::vector<double> src(64 * 842);
  for (auto& v : src) v = static_cast<double>(gen() % 256);
  const auto fast = bicubic_resample(std::span<const double>(src), 64, 842, 64, 64);
  const auto slow = oracle::bicubic_direct(src, 64, 842, 64, 64);
  for (std::size_t i = 0; i < fast.size(); ++i) ASSERT_NEAR(fast[i], slow[i], 1e-9);
}

TEST(Bicubic, KernelIsCatmullRom) {
  for (double x = -2.5; x <= 2.5; x += 0.01) EXPECT_NEAR(detail::catmull_rom(x), oracle::cubic_kernel(x), 1e-14);
  EXPECT_EQ(detail::catmull_rom(0.0), 1.0);
  EXPECT_EQ(detail::catmull_rom(1.0), 0.0);
  EXPECT_EQ(detail::catmull_rom(2.0), 0.0);
}

TEST(Bicubic, LinearInIntensities) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> d(0.0, 100.0);
  std::vector<double> x(20 * 30), y(20 * 30), z(20 * 30);
  for (auto& v : x) v = d(gen);
  for (auto& v : y) v = d(gen);
  const double a = 0.7, b = 1.3;
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = a * x[i] + b * y[i];
  const auto rx = bicubic_resample(std::span<const double>(x), 20, 30, 11, 7);
  const auto ry = bicubic_resample(std::span<const double>(y), 20, 30, 11, 7);
  const auto rz = bicubic_resample(std::span<const double>(z), 20, 30, 11, 7);
  for (std::size_t i = 0; i < rz.size(); ++i) EXPECT_NEAR(rz[i], a * rx[i] + b * ry[i], 1e-9);
}

TEST(Bicubic, DownsamplingSmoothImagePreservesMean) {
  std::vector<std::uint8_t> src(64 * 842);
  double mean_in = 0.0;
  for (std::size_t r = 0; r < 64; ++r)
    for (std::size_t c = 0; c < 842; ++c) {
      const double v = 128.0 + 60.0 * std::sin(r / 9.0) * std::cos(c / 97.0) + 0.05 * c;
      src[r * 842 + c] = static_cast<std::uint8_t>(std::lround(v));
      mean_in += src[r * 842 + c];
    }
  mean_in /= src.size();
  const Frame f = bicubic_resize(src, 64, 842);
  double mean_out = 0.0;
  for (double v : f.pixels) mean_out += v;
  mean_out /= f.pixels.size();
  EXPECT_LE(std::abs(mean_out - mean_in), 2.0);
}

TEST(Bicubic, OutputClampedAndTooSmallRejected) {
  std::vector<std::uint8_t> src(8 * 8, 0);
  for (std::size_t c = 4; c < 8; ++c)
    for (std::size_t r = 0; r < 8; ++r) src[r * 8 + c] = 255;  // step edge overshoots
  const Frame f = bicubic_resize(src, 8, 8, 13, 13);
  for (double v : f.pixels) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 255.0);
  }
  const auto raw = bicubic_resample(std::span<const std::uint8_t>(src), 8, 8, 13, 13);
  EXPECT_GT(*std::max_element(raw.begin(), raw.end()), 255.0);
  std::vector<std::uint8_t> tiny(3 * 10, 1);
  EXPECT_THROW(bicubic_resize(tiny, 3, 10), SizeError);
  EXPECT_THROW(bicubic_resize(src, 8, 8, 0, 4), SizeError);
}

TEST(Normalize, EndpointsAndInverse) {
  Frame zero(64, 64, 0.0), full(64, 64, 255.0);
  for (double v : normalize(zero).pixels) EXPECT_EQ(v, 0.0);
  for (double v : normalize(full).pixels) EXPECT_EQ(v, 1.0);
  EXPECT_EQ(normalize(full).scale, ScaleTag::unit);
  std::mt19937_64 gen(1);
  const Frame r = oracle::random_frame(gen);
  const Frame back = denormalize(normalize(r));
  for (std::size_t i = 0; i < r.pixels.size(); ++i) EXPECT_NEAR(back.pixels[i], r.pixels[i], 1e-12);
}

TEST(Normalize, DenormalizeScalesAndClamps) {
  Frame u(2, 2, 0.5, ScaleTag::unit);
  u.pixels[1] = 1.0;
  u.pixels[2] = 1.2;
  u.pixels[3] = -0.1;
  const Frame d = denormalize(u);
  EXPECT_EQ(d.pixels[0], 127.5);
  EXPECT_EQ(d.pixels[1], 255.0);
  EXPECT_EQ(d.pixels[2], 255.0);
  EXPECT_EQ(d.pixels[3], 0.0);
}

TEST(Normalize, WrongTagIsContractError) {
  EXPECT_THROW(normalize(Frame(4, 4, 0.0, ScaleTag::unit)), ContractError);
  EXPECT_THROW(denormalize(Frame(4, 4, 0.0, ScaleTag::raw255)), ContractError);
}

TEST(Vectorize, RowMajorAndRoundTrip) {
  Frame f(64, 64, 0.0);
  f.at(0, 1) = 11.0;
  f.at(1, 0) = 22.0;
  const auto v = vectorize(f);
  EXPECT_EQ(v[1], 11.0);
  EXPECT_EQ(v[64], 22.0);
  std::mt19937_64 gen(3);
  const Frame r = oracle::random_frame(gen);
  EXPECT_EQ(devectorize(vectorize(r)), r);
  EXPECT_EQ(devectorize(vectorize(normalize(r)), ScaleTag::unit), normalize(r));
}

TEST(Vectorize, WrongLengthIsSizeError) {
  std::vector<double> v(4095);
  EXPECT_THROW(devectorize(v), SizeError);
  EXPECT_THROW(vectorize(Frame(32, 32)), SizeError);
}

TEST(Frame, RangeCheck) {
  Frame f(4, 4, 255.0 + 1e-10);
  EXPECT_NO_THROW(check_frame(f));
  f.pixels[0] = 256.0;
  EXPECT_THROW(check_frame(f), ContractError);
}

TEST(Pgm, HeaderAndRounding) {
  Frame f(2, 3, 0.0);
  f.pixels = {0.4, 0.5, 254.6, 300.0, -3.0, 127.5};
  const auto b = encode_pgm(f);
  const std::string head = "P5\n3 2\n255\n";
  ASSERT_EQ(b.size(), head.size() + 6);
  EXPECT_EQ(std::string(b.begin(), b.begin() + head.size()), head);
  const std::vector<std::uint8_t> px(b.begin() + head.size(), b.end());
  EXPECT_EQ(px, (std::vector<std::uint8_t>{0, 1, 255, 255, 0, 128}));
}
