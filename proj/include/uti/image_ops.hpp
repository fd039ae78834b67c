#pragma once

// Image-domain primitives: Catmull-Rom bicubic resize, intensity scaling,
// row-major vectorization and PGM export.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "uti/binary_io.hpp"
#include "uti/error.hpp"

namespace uti {

inline constexpr std::size_t kFrameSide = 64;
inline constexpr std::size_t kFramePixels = kFrameSide * kFrameSide;

enum class ScaleTag : std::uint8_t { raw255, unit };

/// Real-valued grayscale image, row-major. Frames produced by the pipeline are
/// 64x64 ("Frame64"), but the type allows any size for tests and resizing.
struct Frame {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> pixels;
  ScaleTag scale = ScaleTag::raw255;

  Frame() = default;
  Frame(std::size_t r, std::size_t c, double fill = 0.0, ScaleTag tag = ScaleTag::raw255)
      : rows(r), cols(c), pixels(r * c, fill), scale(tag) {}

  double& at(std::size_t r, std::size_t c) { return pixels[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return pixels[r * cols + c]; }
  std::size_t size() const { return pixels.size(); }

  bool operator==(const Frame&) const = default;
};

inline double scale_max(ScaleTag t) { return t == ScaleTag::raw255 ? 255.0 : 1.0; }

/// Checks the size and the tagged intensity range (1e-9 slack).
inline void check_frame(const Frame& f) {
  if (f.pixels.size() != f.rows * f.cols) throw SizeError("frame pixel count does not match shape");
  const double hi = scale_max(f.scale);
  for (double v : f.pixels)
    if (!(v >= -1e-9 && v <= hi + 1e-9)) throw ContractError("pixel outside tagged range");
}

namespace detail {

inline double catmull_rom(double x) {
  constexpr double a = -0.5;
  x = std::abs(x);
  if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
  return 0.0;
}

struct Taps {
  std::array<std::size_t, 4> index;
  std::array<double, 4> weight;
};

/// Source taps for each destination coordinate, pixel-center aligned,
/// source indices clamped to the valid range.
inline std::vector<Taps> bicubic_taps(std::size_t src, std::size_t dst) {
  std::vector<Taps> taps(dst);
  const double scale = static_cast<double>(src) / static_cast<double>(dst);
  const auto last = static_cast<long long>(src) - 1;
  for (std::size_t d = 0; d < dst; ++d) {
    const double x = (static_cast<double>(d) + 0.5) * scale - 0.5;
    const double fl = std::floor(x);
    const double t = x - fl;
    for (int k = 0; k < 4; ++k) {
      const long long s = static_cast<long long>(fl) - 1 + k;
      taps[d].index[k] = static_cast<std::size_t>(std::clamp(s, 0LL, last));
      taps[d].weight[k] = catmull_rom(t - (k - 1));
    }
  }
  return taps;
}

}  // namespace detail

/// Separable Catmull-Rom resample of a row-major image without output
/// clamping. Linear in the input intensities.
template <class T>
std::vector<double> bicubic_resample(std::span<const T> src, std::size_t src_rows,
                                     std::size_t src_cols, std::size_t dst_rows,
                                     std::size_t dst_cols) {
  if (src_rows < 4 || src_cols < 4)
    throw SizeError("bicubic resize needs a source of at least 4x4, got " +
                    std::to_string(src_rows) + "x" + std::to_string(src_cols));
  if (dst_rows < 1 || dst_cols < 1) throw SizeError("destination must be at least 1x1");
  if (src.size() != src_rows * src_cols) throw SizeError("source pixel count does not match shape");

  const auto col_taps = detail::bicubic_taps(src_cols, dst_cols);
  const auto row_taps = detail::bicubic_taps(src_rows, dst_rows);

  // Horizontal pass: src_rows x dst_cols.
  std::vector<double> tmp(src_rows * dst_cols);
  for (std::size_t r = 0; r < src_rows; ++r) {
    const T* row = src.data() + r * src_cols;
    for (std::size_t c = 0; c < dst_cols; ++c) {
      const auto& tp = col_taps[c];
      double acc = 0.0;
      for (int k = 0; k < 4; ++k) acc += tp.weight[k] * static_cast<double>(row[tp.index[k]]);
      tmp[r * dst_cols + c] = acc;
    }
  }
  std::vector<double> out(dst_rows * dst_cols);
  for (std::size_t r = 0; r < dst_rows; ++r) {
    const auto& tp = row_taps[r];
    for (std::size_t c = 0; c < dst_cols; ++c) {
      double acc = 0.0;
      for (int k = 0; k < 4; ++k) acc += tp.weight[k] * tmp[tp.index[k] * dst_cols + c];
      out[r * dst_cols + c] = acc;
    }
  }
  return out;
}

/// Bicubic resize of a raw 8-bit frame (rows = scanlines) to a raw255 Frame,
/// clamped to [0, 255].
inline Frame bicubic_resize(std::span<const std::uint8_t> src, std::size_t src_rows,
                            std::size_t src_cols, std::size_t dst_cols = kFrameSide,
                            std::size_t dst_rows = kFrameSide) {
  Frame f;
  f.rows = dst_rows;
  f.cols = dst_cols;
  f.scale = ScaleTag::raw255;
  f.pixels = bicubic_resample(src, src_rows, src_cols, dst_rows, dst_cols);
  for (auto& v : f.pixels) v = std::clamp(v, 0.0, 255.0);
  return f;
}

inline Frame bicubic_resize(const Frame& src, std::size_t dst_cols, std::size_t dst_rows) {
  if (src.scale != ScaleTag::raw255) throw ContractError("bicubic_resize expects a raw255 frame");
  Frame f;
  f.rows = dst_rows;
  f.cols = dst_cols;
  f.pixels = bicubic_resample(std::span<const double>(src.pixels), src.rows, src.cols, dst_rows,
                              dst_cols);
  for (auto& v : f.pixels) v = std::clamp(v, 0.0, 255.0);
  return f;
}

inline Frame normalize(const Frame& f) {
  if (f.scale != ScaleTag::raw255) throw ContractError("normalize expects a raw255 frame");
  Frame out = f;
  out.scale = ScaleTag::unit;
  for (auto& v : out.pixels) v /= 255.0;
  return out;
}

inline Frame denormalize(const Frame& f) {
  if (f.scale != ScaleTag::unit) throw ContractError("denormalize expects a unit-scale frame");
  Frame out = f;
  out.scale = ScaleTag::raw255;
  for (auto& v : out.pixels) v = std::clamp(v * 255.0, 0.0, 255.0);
  return out;
}

inline std::vector<double> vectorize(const Frame& f) {
  if (f.rows != kFrameSide || f.cols != kFrameSide || f.pixels.size() != kFramePixels)
    throw SizeError("vectorize expects a 64x64 frame");
  return f.pixels;
}

inline Frame devectorize(std::span<const double> v, ScaleTag tag = ScaleTag::raw255) {
  if (v.size() != kFramePixels)
    throw SizeError("devectorize expects 4096 values, got " + std::to_string(v.size()));
  Frame f(kFrameSide, kFrameSide, 0.0, tag);
  f.pixels.assign(v.begin(), v.end());
  return f;
}

inline Frame clamp_frame(Frame f) {
  const double hi = scale_max(f.scale);
  for (auto& v : f.pixels) v = std::clamp(v, 0.0, hi);
  return f;
}

/// Binary PGM (P5). Raw255 values are rounded to the nearest integer here and
/// nowhere else.
inline io::Bytes encode_pgm(const Frame& f) {
  const Frame raw = f.scale == ScaleTag::unit ? denormalize(f) : f;
  const std::string header =
      "P5\n" + std::to_string(raw.cols) + " " + std::to_string(raw.rows) + "\n255\n";
  io::Bytes out(header.begin(), header.end());
  out.reserve(out.size() + raw.pixels.size());
  for (double v : raw.pixels)
    out.push_back(static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0)));
  return out;
}

inline void save_pgm(const Frame& f, const std::filesystem::path& path) {
  io::write_file(path, encode_pgm(f));
}

}  // namespace uti
