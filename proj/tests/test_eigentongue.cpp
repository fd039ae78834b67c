#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "uti/eigentongue.hpp"

using namespace uti;

namespace {

// Frames = mean + a*P0 + b*P1 + c*P2 with three orthogonal patterns.
FeatureMatrix rank3_frames(std::size_t n, std::uint64_t seed, std::vector<std::vector<double>>* patterns = nullptr) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> d;
  const std::size_t dim = kFramePixels;
  std::vector<std::vector<double>> p(3, std::vector<double>(dim));
  for (std::size_t j = 0; j < dim; ++j) {
    const double r = static_cast<double>(j / 64), c = static_cast<double>(j % 64);
    p[0][j] = std::sin(r / 7.0);
    p[1][j] = std::cos(c / 5.0);
    p[2][j] = std::sin((r + c) / 3.0);
  }
  // Gram-Schmidt the patterns so the construction is exactly rank 3.
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < i; ++k) {
      double dot = 0;
      for (std::size_t j = 0; j < dim; ++j) dot += p[i][j] * p[k][j];
      for (std::size_t j = 0; j < dim; ++j) p[i][j] -= dot * p[k][j];
    }
    double nrm = 0;
    for (double v : p[i]) nrm += v * v;
    for (double& v : p[i]) v /= std::sqrt(nrm);
  }
  FeatureMatrix m(n, dim);
  for (std::size_t r = 0; r < n; ++r) {
    const double a = 600.0 * d(gen), b = 300.0 * d(gen), c = 100.0 * d(gen);
    for (std::size_t j = 0; j < dim; ++j)
      m.values[r * dim + j] = 128.0 + a * p[0][j] + b * p[1][j] + c * p[2][j];
  }
  if (patterns) *patterns = p;
  return m;
}

FeatureMatrix random_frames(std::size_t n, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> d(0.0, 255.0);
  FeatureMatrix m(n, dim);
  for (auto& v : m.values) v = d(gen);
  return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void expect_orthonormal(const EigenTongueBasis& b) {
  for (std::size_t i = 0; i < b.n_components; ++i)
    for (std::size_t j = i; j < b.n_components; ++j)
      ASSERT_NEAR(dot(b.component(i), b.component(j)), i == j ? 1.0 : 0.0, 1e-8) << i << "," << j;
}

}  // namespace

TEST(FitBasis, RankThreeConstruction) {
  const auto frames = rank3_frames(200, 1);
  const auto b = fit_basis(frames, 128);
  ASSERT_EQ(b.n_components, 128u);
  expect_orthonormal(b);
  for (std::size_t i = 3; i < 128; ++i) EXPECT_LE(b.eigenvalues[i], 1e-6 * b.eigenvalues[0]);
  // Top-3 reconstruction is exact on the training frames.
  for (std::size_t r = 0; r < 20; ++r) {
    const auto c = project_vector(frames.row(r), b);
    const auto x = reconstruct_vector(std::span(c).first(3), b);
    for (std::size_t j = 0; j < frames.cols; ++j) ASSERT_NEAR(x[j], frames.row(r)[j], 1e-6);
  }
}

TEST(FitBasis, EigenvaluesMatchBruteForceCovariance) {
  // More frames than pixels: covariance route.
  const auto frames = random_frames(40, 12, 3);
  const auto b = fit_basis(frames, 12 - 1);
  std::vector<double> mean(12, 0.0), cov(144, 0.0);
  for (std::size_t r = 0; r < 40; ++r)
    for (std::size_t j = 0; j < 12; ++j) mean[j] += frames.row(r)[j] / 40.0;
  for (std::size_t r = 0; r < 40; ++r)
    for (std::size_t i = 0; i < 12; ++i)
      for (std::size_t j = 0; j < 12; ++j)
        cov[i * 12 + j] += (frames.row(r)[i] - mean[i]) * (frames.row(r)[j] - mean[j]) / 40.0;
  const auto ev = oracle::jacobi_eigenvalues(cov, 12);
  for (std::size_t i = 0; i < 11; ++i) EXPECT_NEAR(b.eigenvalues[i], ev[i], 1e-8 * ev[0]);
}

TEST(FitBasis, EigenvaluesMatchBruteForceGram) {
  // Fewer frames than pixels: Gram route. Non-zero spectra coincide.
  const auto frames = random_frames(15, 60, 4);
  const auto b = fit_basis(frames, 10);
  std::vector<double> mean(60, 0.0), gram(225, 0.0);
  for (std::size_t r = 0; r < 15; ++r)
    for (std::size_t j = 0; j < 60; ++j) mean[j] += frames.row(r)[j] / 15.0;
  for (std::size_t a = 0; a < 15; ++a)
    for (std::size_t c = 0; c < 15; ++c)
      for (std::size_t j = 0; j < 60; ++j)
        gram[a * 15 + c] += (frames.row(a)[j] - mean[j]) * (frames.row(c)[j] - mean[j]) / 15.0;
  const auto ev = oracle::jacobi_eigenvalues(gram, 15);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_NEAR(b.eigenvalues[i], ev[i], 1e-8 * ev[0]);
  expect_orthonormal(b);
}

TEST(FitBasis, IdenticalFramesHaveZeroSpectrum) {
  FeatureMatrix m(30, 20);
  for (std::size_t r = 0; r < 30; ++r)
    for (std::size_t j = 0; j < 20; ++j) m.values[r * 20 + j] = 10.0 + j;
  const auto b = fit_basis(m, 5);
  for (double e : b.eigenvalues) EXPECT_EQ(e, 0.0);
  expect_orthonormal(b);
  for (double c : project_vector(m.row(7), b)) EXPECT_NEAR(c, 0.0, 1e-9);
}

TEST(FitBasis, SortedNonNegativeAndSignFixed) {
  const auto b = fit_basis(random_frames(60, 4096, 5), 32);
  for (std::size_t i = 0; i < 32; ++i) {
    EXPECT_GE(b.eigenvalues[i], 0.0);
    if (i > 0) EXPECT_GE(b.eigenvalues[i - 1], b.eigenvalues[i]);
    const auto e = b.component(i);
    const auto it = std::max_element(e.begin(), e.end(), [](double x, double y) { return std::abs(x) < std::abs(y); });
    EXPECT_GT(*it, 0.0);
  }
}

TEST(FitBasis, Deterministic) {
  const auto f = random_frames(50, 300, 6);
  EXPECT_EQ(fit_basis(f, 20), fit_basis(f, 20));
}

TEST(FitBasis, Errors) {
  EXPECT_THROW(fit_basis(random_frames(10, 50, 1), 10), SizeError);
  EXPECT_THROW(fit_basis(random_frames(10, 5, 1), 6), SizeError);
  auto bad = random_frames(20, 50, 1);
  bad.values[17] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(fit_basis(bad, 3), InputError);
}

TEST(FitBasis, CoefficientVariancesEqualEigenvalues) {
  const auto frames = random_frames(300, 40, 7);
  const auto b = fit_basis(frames, 20);
  const auto c = project_rows(frames, b);
  for (std::size_t i = 0; i < 20; ++i) {
    double m = 0, v = 0;
    for (std::size_t r = 0; r < c.rows; ++r) m += c.row(r)[i] / c.rows;
    for (std::size_t r = 0; r < c.rows; ++r) v += (c.row(r)[i] - m) * (c.row(r)[i] - m) / c.rows;
    EXPECT_NEAR(v, b.eigenvalues[i], 1e-6 * b.eigenvalues[i]);
    EXPECT_NEAR(m, 0.0, 1e-9 * std::sqrt(b.eigenvalues[0]));
  }
}

TEST(Project, MeanAndScaledComponent) {
  const auto b = fit_basis(rank3_frames(150, 2), 16);
  const Frame mean = devectorize(b.mean);
  for (double c : project(mean, b).values) EXPECT_NEAR(c, 0.0, 1e-9);
  std::vector<double> x = b.mean;
  for (std::size_t j = 0; j < x.size(); ++j) x[j] += 3.0 * b.component(0)[j];
  const auto c = project_vector(x, b);
  EXPECT_NEAR(c[0], 3.0, 1e-9);
  for (std::size_t i = 1; i < c.size(); ++i) EXPECT_NEAR(c[i], 0.0, 1e-9);
}

TEST(Project, MatchesExplicitDotProducts) {
  const auto b = fit_basis(random_frames(80, 4096, 8), 24);
  std::mt19937_64 gen(9);
  const Frame f = oracle::random_frame(gen);
  const auto c = project(f, b, 5);
  EXPECT_EQ(c.frame_index, 5u);
  for (std::size_t i = 0; i < 24; ++i) {
    double s = 0;
    for (std::size_t j = 0; j < 4096; ++j) s += (f.pixels[j] - b.mean[j]) * b.component(i)[j];
    EXPECT_NEAR(c.values[i], s, 1e-9 * std::max(1.0, std::abs(s)));
  }
  // Batch form agrees.
  FeatureMatrix one;
  one.append_row(f.pixels);
  const auto batch = project_rows(one, b);
  for (std::size_t i = 0; i < 24; ++i) EXPECT_NEAR(batch.row(0)[i], c.values[i], 1e-9);
}

TEST(Reconstruct, ZeroCoefficientsGiveMeanAndClamp) {
  const auto b = fit_basis(random_frames(80, 4096, 10), 8);
  const Frame m = reconstruct({std::vector<double>(8, 0.0), 0}, b);
  for (std::size_t j = 0; j < 4096; ++j) EXPECT_NEAR(m.pixels[j], b.mean[j], 1e-12);
  const Frame big = reconstruct({std::vector<double>(8, 1e6), 0}, b);
  for (double v : big.pixels) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 255.0);
  }
  EXPECT_THROW(reconstruct({std::vector<double>(7, 0.0), 0}, b), SizeError);
}

TEST(Reconstruct, PythagorasAndMonotonicity) {
  const auto frames = random_frames(120, 4096, 11);
  const auto b = fit_basis(frames, 32);
  std::mt19937_64 gen(12);
  for (int t = 0; t < 5; ++t) {
    const Frame f = oracle::random_frame(gen);
    const auto c = project_vector(f.pixels, b);
    double centered = 0, csq = 0;
    for (std::size_t j = 0; j < 4096; ++j) centered += (f.pixels[j] - b.mean[j]) * (f.pixels[j] - b.mean[j]);
    for (double v : c) csq += v * v;
    const auto rec = reconstruct_vector(c, b);
    double err = 0;
    for (std::size_t j = 0; j < 4096; ++j) err += (f.pixels[j] - rec[j]) * (f.pixels[j] - rec[j]);
    EXPECT_NEAR(err, centered - csq, 1e-8 * centered);
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k <= 32; ++k) {
      const auto r = reconstruct_vector(std::span(c).first(k), b);
      double e = 0;
      for (std::size_t j = 0; j < 4096; ++j) e += (f.pixels[j] - r[j]) * (f.pixels[j] - r[j]);
      EXPECT_LE(e, prev * (1 + 1e-12));
      prev = e;
    }
  }
}

TEST(Reconstruct, ProjectAfterReconstructIsIdentity) {
  const auto b = fit_basis(random_frames(100, 4096, 13), 20);
  std::mt19937_64 gen(14);
  std::normal_distribution<double> d(0.0, 50.0);
  std::vector<double> c(20);
  for (auto& v : c) v = d(gen);
  const auto back = project_vector(reconstruct_vector(c, b), b);
  for (std::size_t i = 0; i < 20; ++i) EXPECT_NEAR(back[i], c[i], 1e-8);
}

TEST(Reconstruct, SubspaceMembersRoundTripExactly) {
  std::vector<std::vector<double>> p;
  const auto frames = rank3_frames(100, 15, &p);
  const auto b = fit_basis(frames, 10);
  std::vector<double> x = b.mean;
  for (std::size_t j = 0; j < x.size(); ++j) x[j] += 40.0 * p[0][j] - 25.0 * p[2][j];
  const auto rec = reconstruct_vector(project_vector(x, b), b);
  for (std::size_t j = 0; j < x.size(); ++j) ASSERT_NEAR(rec[j], x[j], 1e-6);
}

TEST(BasisFile, RoundTripAndLayout) {
  const auto b = fit_basis(random_frames(30, 4096, 16), 5);
  const auto bytes = encode_basis(b);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "ETBS");
  EXPECT_EQ(bytes.size(), 12u + 8u * (4096 + 5 * 4096 + 5));
  EXPECT_EQ(decode_basis(bytes), b);
  auto cut = bytes;
  cut.pop_back();
  EXPECT_THROW(decode_basis(cut), CorruptionError);
  EXPECT_THROW(decode_basis(std::span(bytes).first(6)), FormatError);
}
