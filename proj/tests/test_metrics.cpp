#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "uti/metrics.hpp"

using namespace uti;

TEST(Mse, IdentityAndOffset) {
  std::mt19937_64 gen(1);
  const Frame a = oracle::random_frame(gen);
  EXPECT_EQ(mse(a, a), 0.0);
  Frame b = a;
  for (auto& v : b.pixels) v += 1.0;
  EXPECT_NEAR(mse(a, b), 1.0, 1e-12);
  EXPECT_EQ(mse(a, b), mse(b, a));
  EXPECT_THROW(mse(a, Frame(32, 32)), ContractError);
  EXPECT_THROW(mse(a, normalize(a)), ContractError);
}

TEST(Ssim, IdentityIsOne) {
  std::mt19937_64 gen(2);
  const Frame a = oracle::random_frame(gen);
  EXPECT_NEAR(ssim(a, a), 1.0, 1e-12);
  const Frame flat(64, 64, 90.0);
  EXPECT_NEAR(ssim(flat, flat), 1.0, 1e-12);
}

TEST(Ssim, MatchesDirectWindowedDefinition) {
  std::mt19937_64 gen(3);
  for (int t = 0; t < 10; ++t) {
    const Frame a = oracle::random_frame(gen, 16, 16), b = oracle::random_frame(gen, 16, 16);
    EXPECT_NEAR(ssim(a, b), oracle::ssim_direct(a, b), 1e-9);
  }
  const Frame a = oracle::ridge_frame(30, 8, 3, &gen), b = oracle::ridge_frame(32, 6, 3, &gen);
  EXPECT_NEAR(ssim(a, b), oracle::ssim_direct(a, b), 1e-9);
}

TEST(Ssim, OppositeFlatImagesReduceToLuminanceTerm) {
  const Frame black(16, 16, 0.0), white(16, 16, 255.0);
  const SsimParams p;
  EXPECT_NEAR(ssim(black, white), p.c1() / (255.0 * 255.0 + p.c1()), 1e-15);
  EXPECT_NEAR(luminance_term(0.0, 255.0, p), p.c1() / (255.0 * 255.0 + p.c1()), 1e-15);
}

TEST(Ssim, SymmetricAndBounded) {
  std::mt19937_64 gen(4);
  for (int t = 0; t < 5; ++t) {
    const Frame a = oracle::random_frame(gen), b = oracle::random_frame(gen);
    const double s = ssim(a, b);
    EXPECT_NEAR(s, ssim(b, a), 1e-14);
    EXPECT_LE(s, 1.0);
    EXPECT_GE(s, -1.0);
  }
}

TEST(Ssim, TooSmallForWindow) {
  EXPECT_THROW(ssim(Frame(8, 8, 1.0), Frame(8, 8, 1.0)), SizeError);
}

TEST(CwSsim, SubbandMatchesScalarDefinition) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> d;
  for (int t = 0; t < 5; ++t) {
    std::vector<std::complex<double>> a(12 * 10), b(12 * 10);
    for (auto& v : a) v = {d(gen), d(gen)};
    for (auto& v : b) v = {d(gen), d(gen)};
    EXPECT_NEAR(cw_ssim_subband(a, b, 12, 10, 7, 0.01), oracle::cw_ssim_subband_direct(a, b, 12, 10, 7, 0.01), 1e-9);
    EXPECT_NEAR(cw_ssim_subband(a, b, 12, 10, 3, 0.5), oracle::cw_ssim_subband_direct(a, b, 12, 10, 3, 0.5), 1e-9);
  }
}

TEST(CwSsim, PhaseRotationIsInvisible) {
  std::mt19937_64 gen(6);
  std::normal_distribution<double> d;
  std::vector<std::complex<double>> a(9 * 9), b(9 * 9);
  for (auto& v : a) v = {d(gen), d(gen)};
  const auto rot = std::polar(1.0, 0.7);
  for (std::size_t i = 0; i < a.size(); ++i) b[i] = a[i] * rot;
  EXPECT_NEAR(cw_ssim_subband(a, b, 9, 9, 7, 0.01), 1.0, 1e-12);
}

TEST(CwSsim, IdentitySymmetryAndRange) {
  std::mt19937_64 gen(7);
  const Frame a = oracle::random_frame(gen), b = oracle::random_frame(gen);
  EXPECT_NEAR(cw_ssim(a, a), 1.0, 1e-12);
  const double s = cw_ssim(a, b);
  EXPECT_NEAR(s, cw_ssim(b, a), 1e-12);
  EXPECT_GT(s, 0.0);
  EXPECT_LT(s, 1.0);
}

TEST(CwSsim, PyramidShapeAndLimits) {
  const SteerablePyramid p(64, 64, {});
  EXPECT_EQ(p.subband_count(), 8u);
  EXPECT_EQ(p.decompose(Frame(64, 64, 3.0)).front().size(), 4096u);
  EXPECT_NO_THROW(SteerablePyramid(16, 16, {}));
  EXPECT_THROW(SteerablePyramid(15, 64, {}), SizeError);
  EXPECT_THROW(p.decompose(Frame(32, 32)), ContractError);
  CwSsimParams bad;
  bad.k = 0.0;
  EXPECT_THROW(SteerablePyramid(64, 64, bad), ContractError);
}

TEST(CwSsim, MoreTolerantOfSmallShiftsThanSsim) {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> c(20, 40), k(-10, 10), w(2, 4);
  int wins = 0;
  for (int t = 0; t < 20; ++t) {
    const Frame a = oracle::ridge_frame(c(gen), k(gen), w(gen), &gen);
    const Frame b = oracle::circular_shift(a, 2, 0);
    if (1.0 - cw_ssim(a, b) < 1.0 - ssim(a, b)) ++wins;
  }
  EXPECT_GE(wins, 18);
}

TEST(Curves, PerfectPcaPrediction) {
  std::mt19937_64 gen(9);
  FeatureMatrix train;
  for (int i = 0; i < 20; ++i) train.append_row(oracle::ridge_frame(20 + i, 5, 3, &gen).pixels);
  const auto basis = fit_basis(train, 6);
  std::vector<Frame> orig, rec;
  for (int i = 0; i < 4; ++i) {
    orig.push_back(oracle::ridge_frame(22 + 3 * i, 4, 3, &gen));
    rec.push_back(reconstruct(project(orig.back(), basis, i), basis));
  }
  const auto c = utterance_curves(orig, rec, basis, FrameScorer{}, "u1");
  EXPECT_EQ(c.utterance_id, "u1");
  for (Pairing p : kPairings) ASSERT_EQ(c[p].size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(c[Pairing::pca_rec][i].mse, 0.0);
    EXPECT_NEAR(c[Pairing::pca_rec][i].ssim, 1.0, 1e-12);
    EXPECT_NEAR(c[Pairing::pca_rec][i].cwssim, 1.0, 1e-12);
    EXPECT_EQ(c[Pairing::o_rec][i], c[Pairing::o_pca][i]);
    const auto direct = FrameScorer{}.score(orig[i], rec[i]);
    EXPECT_NEAR(direct.ssim, c[Pairing::o_rec][i].ssim, 1e-12);
  }
  EXPECT_THROW(utterance_curves(orig, std::span(rec).first(3), basis), ContractError);
}

TEST(Aggregate, MeanAndPopulationStd) {
  const std::vector<FrameMetrics> f{{1.0, 0.7, 0.5}, {3.0, 0.74, 0.5}};
  const auto r = aggregate(f, "sys");
  EXPECT_EQ(r.system, "sys");
  EXPECT_EQ(r.frame_count, 2u);
  EXPECT_NEAR(r.ssim.mean, 0.72, 1e-12);
  EXPECT_NEAR(r.ssim.std, 0.02, 1e-12);
  EXPECT_NEAR(r.mse.mean, 2.0, 1e-12);
  EXPECT_NEAR(r.mse.std, 1.0, 1e-12);
  EXPECT_EQ(r.cwssim.std, 0.0);
  const auto one = aggregate(std::vector<FrameMetrics>{{4.0, 0.3, 0.2}});
  EXPECT_EQ(one.ssim.std, 0.0);
  EXPECT_EQ(one.mse.mean, 4.0);
  EXPECT_THROW(aggregate(std::vector<FrameMetrics>{}), ContractError);
}

TEST(Aggregate, PoolsFramesAcrossUtterances) {
  // Frame pooling, not a mean of utterance means.
  const FrameMetricsByUtterance u{{"a", {{0, 1.0, 0}}}, {"b", {{0, 0.0, 0}, {0, 0.0, 0}, {0, 0.0, 0}}}};
  const auto r = aggregate(u);
  EXPECT_NEAR(r.ssim.mean, 0.25, 1e-15);
  ASSERT_EQ(r.utterance_means.size(), 2u);
  EXPECT_EQ(r.utterance_means[0].first, "a");
  EXPECT_EQ(r.utterance_means[0].second.ssim, 1.0);
  EXPECT_EQ(r.frame_count, 4u);
}

TEST(Output, CsvRows) {
  UtteranceCurves c;
  c.utterance_id = "x";
  for (auto& v : c.curves) v = {{1.5, 0.25, 0.125}, {2.0, 0.5, 0.75}};
  const auto csv = metrics_csv_rows(c);
  std::istringstream in(csv);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 18u);
  EXPECT_EQ(lines[0], "x,0,mse,O_rec,1.5");
  EXPECT_EQ(lines[5], "x,1,cwssim,O_rec,0.75");
  EXPECT_EQ(lines[6], "x,0,mse,PCA_rec,1.5");
  EXPECT_EQ(metrics_csv_header(), "utterance_id,frame,metric,pairing,value\n");
}

TEST(Output, SummaryTable) {
  SummaryRow r{"2 x 1000 units", "128 ETs", aggregate(std::vector<FrameMetrics>{{100.0, 0.7, 0.5}, {200.0, 0.74, 0.5}}, "a")};
  const std::vector<SummaryRow> rows{r, r, r};
  const auto t = format_summary_table(rows, "O_rec");
  std::istringstream in(t);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 9u);  // title, rule, 2 header lines, rule, 3 rows, rule
  EXPECT_EQ(lines[0], "O_rec");
  EXPECT_NE(lines[2].find("Hidden Layers"), std::string::npos);
  EXPECT_NE(lines[2].find("CW-SSIM"), std::string::npos);
  EXPECT_NE(lines[3].find("Std.dev."), std::string::npos);
  EXPECT_NE(lines[5].find("150.00"), std::string::npos);
  EXPECT_NE(lines[5].find("50.00"), std::string::npos);
  EXPECT_NE(lines[5].find("0.72"), std::string::npos);
  EXPECT_EQ(summary_csv_row(r, Pairing::pca_rec).substr(0, 39), "a,2 x 1000 units,128 ETs,PCA_rec,2,150,");
}
