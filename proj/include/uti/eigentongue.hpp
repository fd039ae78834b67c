#pragma once

// EigenTongue subspace: PCA of mean-centered, vectorized 64x64 frames.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "uti/binary_io.hpp"
#include "uti/error.hpp"
#include "uti/feature_matrix.hpp"
#include "uti/image_ops.hpp"

namespace uti {

inline constexpr std::size_t kEigenTongues = 128;

/// Mean image plus orthonormal components (rows, by descending eigenvalue).
struct EigenTongueBasis {
  std::size_t dim = 0;
  std::size_t n_components = 0;
  std::vector<double> mean;        // dim
  std::vector<double> components;  // n_components x dim, row-major
  std::vector<double> eigenvalues; // n_components

  std::span<const double> component(std::size_t i) const {
    return std::span(components).subspan(i * dim, dim);
  }

  bool operator==(const EigenTongueBasis&) const = default;
};

struct EtCoefficients {
  std::vector<double> values;
  std::size_t frame_index = 0;
};

namespace detail {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline Eigen::Map<const RowMatrix> as_eigen(const FeatureMatrix& m) {
  return {m.values.data(), static_cast<Eigen::Index>(m.rows), static_cast<Eigen::Index>(m.cols)};
}

inline void check_basis(const EigenTongueBasis& b) {
  if (b.mean.size() != b.dim || b.components.size() != b.dim * b.n_components ||
      b.eigenvalues.size() != b.n_components)
    throw SizeError("eigentongue basis storage does not match its declared shape");
}

}  // namespace detail

/// Fits the top `n_components` principal directions of `frames` (one frame per
/// row). Eigen-decomposes whichever of the Gram or covariance matrix is
/// smaller; directions the data does not span are completed deterministically
/// so the returned set is always orthonormal. Eigenvalues are population
/// variances of the projections, so they match the coefficient variances.
inline EigenTongueBasis fit_basis(const FeatureMatrix& frames,
                                  std::size_t n_components = kEigenTongues) {
  const std::size_t n = frames.rows, dim = frames.cols;
  if (n_components < 1) throw ContractError("n_components must be >= 1");
  if (n <= n_components)
    throw SizeError("fit_basis needs more than " + std::to_string(n_components) + " frames, got " +
                    std::to_string(n));
  if (n_components > dim) throw SizeError("n_components exceeds the frame dimension");
  for (double v : frames.values)
    if (!std::isfinite(v)) throw InputError("non-finite pixel in PCA input");

  const auto data = detail::as_eigen(frames);
  const Eigen::RowVectorXd mean = data.colwise().mean();
  const detail::RowMatrix centered = data.rowwise() - mean;

  // Candidate directions, one per column, in descending eigenvalue order.
  Eigen::MatrixXd candidates(static_cast<Eigen::Index>(dim),
                             static_cast<Eigen::Index>(n_components));
  if (n <= dim) {
    const Eigen::MatrixXd gram = centered * centered.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    if (es.info() != Eigen::Success) throw NumericError("Gram eigendecomposition failed");
    for (std::size_t i = 0; i < n_components; ++i)
      candidates.col(static_cast<Eigen::Index>(i)) =
          centered.transpose() * es.eigenvectors().col(static_cast<Eigen::Index>(n - 1 - i));
  } else {
    const Eigen::MatrixXd cov = centered.transpose() * centered;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    if (es.info() != Eigen::Success) throw NumericError("covariance eigendecomposition failed");
    for (std::size_t i = 0; i < n_components; ++i)
      candidates.col(static_cast<Eigen::Index>(i)) =
          es.eigenvectors().col(static_cast<Eigen::Index>(dim - 1 - i));
  }

  // Modified Gram-Schmidt (two passes). Candidates that collapse are replaced
  // by the next canonical axis not yet spanned.
  const double scale = candidates.colwise().norm().maxCoeff();
  std::size_t next_axis = 0;
  for (Eigen::Index i = 0; i < candidates.cols(); ++i) {
    Eigen::VectorXd v = candidates.col(i);
    const double original = v.norm();
    auto orthogonalize = [&](Eigen::VectorXd& x) {
      for (int pass = 0; pass < 2; ++pass)
        for (Eigen::Index j = 0; j < i; ++j) x -= candidates.col(j).dot(x) * candidates.col(j);
    };
    orthogonalize(v);
    bool usable = original > 1e-12 * scale && v.norm() > 1e-6 * original;
    while (!usable) {
      v.setZero();
      v(static_cast<Eigen::Index>(next_axis++)) = 1.0;
      orthogonalize(v);
      usable = v.norm() > 1e-6;
    }
    candidates.col(i) = v / v.norm();
  }

  std::vector<double> eig(n_components);
  for (std::size_t i = 0; i < n_components; ++i) {
    const Eigen::VectorXd proj = centered * candidates.col(static_cast<Eigen::Index>(i));
    eig[i] = std::max(0.0, proj.squaredNorm() / static_cast<double>(n));
  }
  std::vector<std::size_t> order(n_components);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return eig[a] > eig[b]; });

  EigenTongueBasis basis;
  basis.dim = dim;
  basis.n_components = n_components;
  basis.mean.assign(mean.data(), mean.data() + dim);
  basis.components.resize(n_components * dim);
  basis.eigenvalues.resize(n_components);
  for (std::size_t r = 0; r < n_components; ++r) {
    Eigen::VectorXd v = candidates.col(static_cast<Eigen::Index>(order[r]));
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    std::copy(v.data(), v.data() + dim, basis.components.begin() + static_cast<std::ptrdiff_t>(r * dim));
    basis.eigenvalues[r] = eig[order[r]];
  }
  return basis;
}

/// Coefficients <x - mean, e_i> for a vectorized frame.
inline std::vector<double> project_vector(std::span<const double> x, const EigenTongueBasis& b) {
  detail::check_basis(b);
  if (x.size() != b.dim) throw SizeError("frame dimension does not match the basis");
  std::vector<double> c(b.n_components, 0.0);
  for (std::size_t i = 0; i < b.n_components; ++i) {
    const auto e = b.component(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < b.dim; ++j) acc += (x[j] - b.mean[j]) * e[j];
    c[i] = acc;
  }
  return c;
}

inline EtCoefficients project(const Frame& f, const EigenTongueBasis& b, std::size_t frame_index = 0) {
  if (f.scale != ScaleTag::raw255) throw ContractError("project expects a raw255 frame");
  return {project_vector(f.pixels, b), frame_index};
}

/// mean + sum_i c_i e_i without clamping. Fewer coefficients than components
/// reconstructs from the leading ones.
inline std::vector<double> reconstruct_vector(std::span<const double> c, const EigenTongueBasis& b) {
  detail::check_basis(b);
  if (c.size() > b.n_components) throw SizeError("more coefficients than basis components");
  std::vector<double> x = b.mean;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto e = b.component(i);
    for (std::size_t j = 0; j < b.dim; ++j) x[j] += c[i] * e[j];
  }
  return x;
}

inline Frame reconstruct(const EtCoefficients& c, const EigenTongueBasis& b) {
  if (c.values.size() != b.n_components)
    throw SizeError("expected " + std::to_string(b.n_components) + " coefficients");
  return clamp_frame(devectorize(reconstruct_vector(c.values, b)));
}

/// Batch projection, one frame per row.
inline FeatureMatrix project_rows(const FeatureMatrix& frames, const EigenTongueBasis& b) {
  detail::check_basis(b);
  if (frames.cols != b.dim) throw SizeError("frame dimension does not match the basis");
  const auto x = detail::as_eigen(frames);
  Eigen::Map<const Eigen::RowVectorXd> mean(b.mean.data(), static_cast<Eigen::Index>(b.dim));
  Eigen::Map<const detail::RowMatrix> comps(b.components.data(),
                                            static_cast<Eigen::Index>(b.n_components),
                                            static_cast<Eigen::Index>(b.dim));
  FeatureMatrix out(frames.rows, b.n_components);
  Eigen::Map<detail::RowMatrix> y(out.values.data(), static_cast<Eigen::Index>(out.rows),
                                  static_cast<Eigen::Index>(out.cols));
  y.noalias() = (x.rowwise() - mean) * comps.transpose();
  return out;
}

/// Batch reconstruction, clamped to [0, 255].
inline FeatureMatrix reconstruct_rows(const FeatureMatrix& coeffs, const EigenTongueBasis& b) {
  detail::check_basis(b);
  if (coeffs.cols != b.n_components) throw SizeError("coefficient width does not match the basis");
  const auto c = detail::as_eigen(coeffs);
  Eigen::Map<const Eigen::RowVectorXd> mean(b.mean.data(), static_cast<Eigen::Index>(b.dim));
  Eigen::Map<const detail::RowMatrix> comps(b.components.data(),
                                            static_cast<Eigen::Index>(b.n_components),
                                            static_cast<Eigen::Index>(b.dim));
  FeatureMatrix out(coeffs.rows, b.dim);
  Eigen::Map<detail::RowMatrix> x(out.values.data(), static_cast<Eigen::Index>(out.rows),
                                  static_cast<Eigen::Index>(out.cols));
  x.noalias() = c * comps;
  x.rowwise() += mean;
  x = x.cwiseMax(0.0).cwiseMin(255.0);
  return out;
}

// .etb: "ETBS", u32 dim, u32 n_components, mean, components, eigenvalues.
inline io::Bytes encode_basis(const EigenTongueBasis& b) {
  detail::check_basis(b);
  io::ByteWriter w;
  w.magic("ETBS");
  w.u32(static_cast<std::uint32_t>(b.dim));
  w.u32(static_cast<std::uint32_t>(b.n_components));
  w.f64s(b.mean);
  w.f64s(b.components);
  w.f64s(b.eigenvalues);
  return std::move(w).take();
}

inline EigenTongueBasis decode_basis(std::span<const std::uint8_t> data,
                                     const std::string& context = "etb") {
  io::ByteReader rd(data, context);
  rd.expect_magic("ETBS");
  EigenTongueBasis b;
  b.dim = rd.u32();
  b.n_components = rd.u32();
  rd.begin_payload();
  b.mean = rd.f64s(b.dim);
  b.components = rd.f64s(b.dim * b.n_components);
  b.eigenvalues = rd.f64s(b.n_components);
  rd.expect_end();
  return b;
}

inline void save_basis(const EigenTongueBasis& b, const std::filesystem::path& path) {
  io::write_file(path, encode_basis(b));
}

inline EigenTongueBasis load_basis(const std::filesystem::path& path) {
  return decode_basis(io::read_file(path), path.string());
}

}  // namespace uti
