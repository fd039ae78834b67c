#pragma once

#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "uti/binary_io.hpp"
#include "uti/error.hpp"

namespace uti {

/// Dense row-major matrix of doubles. One row per ultrasound frame; used for
/// acoustic features, pixel / ET targets and predictions.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  FeatureMatrix() = default;
  FeatureMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

  std::span<double> row(std::size_t i) { return std::span(values).subspan(i * cols, cols); }
  std::span<const double> row(std::size_t i) const {
    return std::span(values).subspan(i * cols, cols);
  }

  void append_row(std::span<const double> r) {
    if (rows == 0 && cols == 0) cols = r.size();
    if (r.size() != cols) throw SizeError("row width mismatch");
    values.insert(values.end(), r.begin(), r.end());
    ++rows;
  }

  bool operator==(const FeatureMatrix&) const = default;
};

/// "FEAT" magic, u32 rows, u32 cols, row-major little-endian doubles.
inline io::Bytes encode_feature_matrix(const FeatureMatrix& m) {
  if (m.values.size() != m.rows * m.cols) throw SizeError("matrix storage does not match shape");
  io::ByteWriter w;
  w.magic("FEAT");
  w.u32(static_cast<std::uint32_t>(m.rows));
  w.u32(static_cast<std::uint32_t>(m.cols));
  w.f64s(m.values);
  return std::move(w).take();
}

inline FeatureMatrix decode_feature_matrix(std::span<const std::uint8_t> data,
                                           const std::string& context = "feat") {
  io::ByteReader rd(data, context);
  rd.expect_magic("FEAT");
  FeatureMatrix m;
  m.rows = rd.u32();
  m.cols = rd.u32();
  rd.begin_payload();
  m.values = rd.f64s(m.rows * m.cols);
  rd.expect_end();
  return m;
}

inline void save_feature_matrix(const FeatureMatrix& m, const std::filesystem::path& path) {
  io::write_file(path, encode_feature_matrix(m));
}

inline FeatureMatrix load_feature_matrix(const std::filesystem::path& path) {
  return decode_feature_matrix(io::read_file(path), path.string());
}

/// CSV for inspection: one row per line, full round-trip precision.
inline std::string feature_matrix_csv(const FeatureMatrix& m) {
  std::ostringstream out;
  out << std::setprecision(17);
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) {
      if (c) out << ',';
      out << m.values[r * m.cols + c];
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace uti
