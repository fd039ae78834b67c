#pragma once

// Image quality measures (MSE, SSIM, CW-SSIM), per-utterance comparison
// curves and corpus aggregation.

#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "uti/eigentongue.hpp"
#include "uti/error.hpp"
#include "uti/image_ops.hpp"

namespace uti {

// ---------------------------------------------------------------------------
// MSE

inline void check_pair(const Frame& a, const Frame& b) {
  if (a.rows != b.rows || a.cols != b.cols || a.pixels.size() != b.pixels.size())
    throw ContractError("frames differ in shape");
  if (a.scale != b.scale) throw ContractError("frames differ in scale tag");
}

inline double mse(const Frame& y, const Frame& y_hat) {
  check_pair(y, y_hat);
  double acc = 0.0;
  for (std::size_t i = 0; i < y.pixels.size(); ++i) {
    const double d = y.pixels[i] - y_hat.pixels[i];
    acc += d * d;
  }
  return acc / static_cast<double>(y.pixels.size());
}

// ---------------------------------------------------------------------------
// SSIM

struct SsimParams {
  std::size_t window = 11;
  double sigma = 1.5;
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1.0;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 255.0;

  double c1() const { return (k1 * dynamic_range) * (k1 * dynamic_range); }
  double c2() const { return (k2 * dynamic_range) * (k2 * dynamic_range); }
  double c3() const { return c2() / 2.0; }

  /// Normalized 1-D Gaussian; the 2-D window is its outer product.
  std::vector<double> kernel_1d() const {
    std::vector<double> g(window);
    const double center = (static_cast<double>(window) - 1.0) / 2.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < window; ++i) {
      const double d = static_cast<double>(i) - center;
      g[i] = std::exp(-d * d / (2.0 * sigma * sigma));
      sum += g[i];
    }
    for (auto& v : g) v /= sum;
    return g;
  }

  /// window x window weights, row-major, summing to one.
  std::vector<double> kernel_2d() const {
    const auto g = kernel_1d();
    std::vector<double> w(window * window);
    for (std::size_t i = 0; i < window; ++i)
      for (std::size_t j = 0; j < window; ++j) w[i * window + j] = g[i] * g[j];
    return w;
  }

  void validate() const {
    if (window < 1 || !(sigma > 0.0)) throw ContractError("bad SSIM window");
    if (!(alpha > 0.0 && beta > 0.0 && gamma > 0.0)) throw ContractError("SSIM exponents must be positive");
  }
};

/// Local statistics of one window position.
struct LocalStats {
  double mu_x, mu_y, var_x, var_y, cov_xy;
};

inline double luminance_term(double mu_x, double mu_y, const SsimParams& p) {
  return (2.0 * mu_x * mu_y + p.c1()) / (mu_x * mu_x + mu_y * mu_y + p.c1());
}
inline double contrast_term(double sd_x, double sd_y, const SsimParams& p) {
  return (2.0 * sd_x * sd_y + p.c2()) / (sd_x * sd_x + sd_y * sd_y + p.c2());
}
inline double structure_term(double sd_x, double sd_y, double cov, const SsimParams& p) {
  return (cov + p.c3()) / (sd_x * sd_y + p.c3());
}

/// l^alpha * c^beta * s^gamma for one window.
inline double local_ssim(const LocalStats& s, const SsimParams& p) {
  if (p.alpha == 1.0 && p.beta == 1.0 && p.gamma == 1.0) {
    // With C3 = C2/2 the contrast and structure terms merge.
    return ((2.0 * s.mu_x * s.mu_y + p.c1()) * (2.0 * s.cov_xy + p.c2())) /
           ((s.mu_x * s.mu_x + s.mu_y * s.mu_y + p.c1()) * (s.var_x + s.var_y + p.c2()));
  }
  const double sx = std::sqrt(std::max(s.var_x, 0.0));
  const double sy = std::sqrt(std::max(s.var_y, 0.0));
  auto signed_pow = [](double v, double e) { return std::copysign(std::pow(std::abs(v), e), v); };
  return signed_pow(luminance_term(s.mu_x, s.mu_y, p), p.alpha) *
         signed_pow(contrast_term(sx, sy, p), p.beta) *
         signed_pow(structure_term(sx, sy, s.cov_xy, p), p.gamma);
}

/// Mean local SSIM over every valid (unpadded) window position.
inline double ssim(const Frame& y, const Frame& y_hat, const SsimParams& p = {}) {
  check_pair(y, y_hat);
  p.validate();
  const std::size_t w = p.window;
  if (y.rows < w || y.cols < w)
    throw SizeError("frame " + std::to_string(y.rows) + "x" + std::to_string(y.cols) +
                    " is smaller than the SSIM window");
  const auto g = p.kernel_1d();
  const std::size_t rows = y.rows, cols = y.cols;
  const std::size_t out_r = rows - w + 1, out_c = cols - w + 1;

  // Horizontal pass of the five moment images, then vertical.
  std::array<std::vector<double>, 5> h;
  for (auto& v : h) v.assign(rows * out_c, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < out_c; ++c) {
      double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
      for (std::size_t k = 0; k < w; ++k) {
        const double a = y.pixels[r * cols + c + k];
        const double b = y_hat.pixels[r * cols + c + k];
        sx += g[k] * a;
        sy += g[k] * b;
        sxx += g[k] * a * a;
        syy += g[k] * b * b;
        sxy += g[k] * a * b;
      }
      const std::size_t i = r * out_c + c;
      h[0][i] = sx, h[1][i] = sy, h[2][i] = sxx, h[3][i] = syy, h[4][i] = sxy;
    }
  double total = 0.0;
  for (std::size_t r = 0; r < out_r; ++r)
    for (std::size_t c = 0; c < out_c; ++c) {
      std::array<double, 5> m{};
      for (std::size_t k = 0; k < w; ++k)
        for (int q = 0; q < 5; ++q) m[q] += g[k] * h[q][(r + k) * out_c + c];
      LocalStats s{m[0], m[1], m[2] - m[0] * m[0], m[3] - m[1] * m[1], m[4] - m[0] * m[1]};
      total += local_ssim(s, p);
    }
  return total / static_cast<double>(out_r * out_c);
}

// ---------------------------------------------------------------------------
// CW-SSIM

struct CwSsimParams {
  std::size_t levels = 2;
  std::size_t orientations = 4;
  std::size_t window = 7;
  double k = 0.01;
  double radial_sigma_octaves = 0.5;

  void validate() const {
    if (levels < 1 || orientations < 1 || window < 1) throw ContractError("bad CW-SSIM configuration");
    if (!(k > 0.0)) throw ContractError("CW-SSIM stabilizer K must be positive");
    if (!(radial_sigma_octaves > 0.0)) throw ContractError("radial bandwidth must be positive");
  }
  std::size_t min_side() const { return std::max(window, std::size_t{4} << levels); }
};

using Subband = std::vector<std::complex<double>>;

/// Undecimated complex steerable pyramid built in the frequency domain with
/// periodic boundaries. Level j is centered on radial frequency pi / 2^(j+1)
/// with a Gaussian profile in log2-frequency; each orientation keeps a
/// cos^(n-1) lobe on a single half-plane, so subband responses are analytic.
class SteerablePyramid {
 public:
  SteerablePyramid(std::size_t rows, std::size_t cols, CwSsimParams p) : rows_(rows), cols_(cols), p_(p) {
    p_.validate();
    if (std::min(rows, cols) < p_.min_side())
      throw SizeError("frame " + std::to_string(rows) + "x" + std::to_string(cols) +
                      " too small for a " + std::to_string(p_.levels) + "-level pyramid");
    build_filters();
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t subband_count() const { return filters_.size(); }

  std::vector<Subband> decompose(const Frame& f) const {
    if (f.rows != rows_ || f.cols != cols_) throw ContractError("frame shape does not match the pyramid");
    std::vector<std::complex<double>> spec(f.pixels.begin(), f.pixels.end());
    fft2(spec, false);
    std::vector<Subband> bands;
    bands.reserve(filters_.size());
    for (const auto& filt : filters_) {
      Subband b(spec.size());
      for (std::size_t i = 0; i < spec.size(); ++i) b[i] = spec[i] * filt[i];
      fft2(b, true);
      bands.push_back(std::move(b));
    }
    return bands;
  }

 private:
  void build_filters() {
    const double pi = std::numbers::pi;
    const std::size_t n_or = p_.orientations;
    for (std::size_t level = 0; level < p_.levels; ++level) {
      const double center = pi / static_cast<double>(std::size_t{2} << level);
      for (std::size_t o = 0; o < n_or; ++o) {
        const double theta_o = pi * static_cast<double>(o) / static_cast<double>(n_or);
        std::vector<double> filt(rows_ * cols_, 0.0);
        for (std::size_t r = 0; r < rows_; ++r) {
          const double wy = freq(r, rows_);
          for (std::size_t c = 0; c < cols_; ++c) {
            const double wx = freq(c, cols_);
            const double rad = std::hypot(wx, wy);
            if (rad == 0.0) continue;
            const double l = std::log2(rad / center);
            const double radial =
                std::exp(-l * l / (2.0 * p_.radial_sigma_octaves * p_.radial_sigma_octaves));
            double d = std::atan2(wy, wx) - theta_o;
            d = std::remainder(d, 2.0 * pi);
            const double angular =
                std::abs(d) < pi / 2 ? std::pow(std::cos(d), static_cast<double>(n_or - 1)) : 0.0;
            filt[r * cols_ + c] = radial * angular;
          }
        }
        filters_.push_back(std::move(filt));
      }
    }
  }

  static double freq(std::size_t k, std::size_t n) {
    const auto kk = static_cast<long long>(k);
    const auto nn = static_cast<long long>(n);
    const long long s = kk < (nn + 1) / 2 ? kk : kk - nn;
    return 2.0 * std::numbers::pi * static_cast<double>(s) / static_cast<double>(n);
  }

  void fft2(std::vector<std::complex<double>>& data, bool inverse) const {
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> in, out;
    in.resize(cols_);
    for (std::size_t r = 0; r < rows_; ++r) {
      std::copy_n(data.begin() + static_cast<std::ptrdiff_t>(r * cols_), cols_, in.begin());
      inverse ? fft.inv(out, in) : fft.fwd(out, in);
      std::copy_n(out.begin(), cols_, data.begin() + static_cast<std::ptrdiff_t>(r * cols_));
    }
    in.resize(rows_);
    for (std::size_t c = 0; c < cols_; ++c) {
      for (std::size_t r = 0; r < rows_; ++r) in[r] = data[r * cols_ + c];
      inverse ? fft.inv(out, in) : fft.fwd(out, in);
      for (std::size_t r = 0; r < rows_; ++r) data[r * cols_ + c] = out[r];
    }
  }

  std::size_t rows_, cols_;
  CwSsimParams p_;
  std::vector<std::vector<double>> filters_;
};

/// Mean over all valid window positions of
///   (2 |sum a conj(b)| + K) / (sum |a|^2 + sum |b|^2 + K)
/// for a pair of complex coefficient maps.
inline double cw_ssim_subband(std::span<const std::complex<double>> a,
                              std::span<const std::complex<double>> b, std::size_t rows,
                              std::size_t cols, std::size_t window, double k) {
  if (a.size() != rows * cols || b.size() != rows * cols) throw SizeError("subband shape mismatch");
  if (rows < window || cols < window) throw SizeError("subband smaller than the CW-SSIM window");
  const std::size_t out_r = rows - window + 1, out_c = cols - window + 1;
  std::vector<std::complex<double>> hc(rows * out_c);
  std::vector<double> ha(rows * out_c), hb(rows * out_c);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < out_c; ++c) {
      std::complex<double> sc = 0.0;
      double sa = 0.0, sb = 0.0;
      for (std::size_t q = 0; q < window; ++q) {
        const auto& x = a[r * cols + c + q];
        const auto& y = b[r * cols + c + q];
        sc += x * std::conj(y);
        sa += std::norm(x);
        sb += std::norm(y);
      }
      hc[r * out_c + c] = sc;
      ha[r * out_c + c] = sa;
      hb[r * out_c + c] = sb;
    }
  double total = 0.0;
  for (std::size_t r = 0; r < out_r; ++r)
    for (std::size_t c = 0; c < out_c; ++c) {
      std::complex<double> sc = 0.0;
      double sa = 0.0, sb = 0.0;
      for (std::size_t q = 0; q < window; ++q) {
        const std::size_t i = (r + q) * out_c + c;
        sc += hc[i];
        sa += ha[i];
        sb += hb[i];
      }
      total += (2.0 * std::abs(sc) + k) / (sa + sb + k);
    }
  return total / static_cast<double>(out_r * out_c);
}

/// CW-SSIM from precomputed decompositions of the same pyramid.
inline double cw_ssim(const std::vector<Subband>& y, const std::vector<Subband>& y_hat,
                      std::size_t rows, std::size_t cols, const CwSsimParams& p = {}) {
  if (y.size() != y_hat.size() || y.empty()) throw ContractError("pyramids differ in subband count");
  double total = 0.0;
  for (std::size_t s = 0; s < y.size(); ++s)
    total += cw_ssim_subband(y[s], y_hat[s], rows, cols, p.window, p.k);
  return total / static_cast<double>(y.size());
}

inline double cw_ssim(const Frame& y, const Frame& y_hat, const CwSsimParams& p = {}) {
  check_pair(y, y_hat);
  SteerablePyramid pyr(y.rows, y.cols, p);
  return cw_ssim(pyr.decompose(y), pyr.decompose(y_hat), y.rows, y.cols, p);
}

// ---------------------------------------------------------------------------
// Curves and aggregation

struct FrameMetrics {
  double mse = 0.0;
  double ssim = 0.0;
  double cwssim = 0.0;

  bool operator==(const FrameMetrics&) const = default;
};

enum class Pairing : std::uint8_t { o_rec = 0, pca_rec = 1, o_pca = 2 };
inline constexpr std::array<Pairing, 3> kPairings{Pairing::o_rec, Pairing::pca_rec, Pairing::o_pca};

inline std::string_view to_string(Pairing p) {
  switch (p) {
    case Pairing::o_rec: return "O_rec";
    case Pairing::pca_rec: return "PCA_rec";
    case Pairing::o_pca: return "O_PCA";
  }
  return "?";
}

/// Per-frame metrics of one utterance for each pairing (indexed by Pairing).
struct UtteranceCurves {
  std::string utterance_id;
  std::array<std::vector<FrameMetrics>, 3> curves;

  const std::vector<FrameMetrics>& operator[](Pairing p) const { return curves[static_cast<int>(p)]; }
};

/// Evaluates the three metrics on a pair, sharing pyramid work when asked to.
class FrameScorer {
 public:
  explicit FrameScorer(SsimParams ssim = {}, CwSsimParams cw = {})
      : ssim_(ssim), cw_(cw), pyramid_(kFrameSide, kFrameSide, cw) {}

  const SteerablePyramid& pyramid() const { return pyramid_; }

  FrameMetrics score(const Frame& y, const Frame& y_hat, const std::vector<Subband>& py,
                     const std::vector<Subband>& py_hat) const {
    return {mse(y, y_hat), ssim(y, y_hat, ssim_), cw_ssim(py, py_hat, y.rows, y.cols, cw_)};
  }

  FrameMetrics score(const Frame& y, const Frame& y_hat) const {
    check_pair(y, y_hat);
    if (y.rows == kFrameSide && y.cols == kFrameSide)
      return score(y, y_hat, pyramid_.decompose(y), pyramid_.decompose(y_hat));
    return {mse(y, y_hat), ssim(y, y_hat, ssim_), cw_ssim(y, y_hat, cw_)};
  }

 private:
  SsimParams ssim_;
  CwSsimParams cw_;
  SteerablePyramid pyramid_;
};

/// O_rec: original vs prediction; PCA_rec: PCA-recovered original vs
/// prediction; O_PCA: original vs PCA-recovered original.
inline UtteranceCurves utterance_curves(std::span<const Frame> original,
                                        std::span<const Frame> reconstructed,
                                        const EigenTongueBasis& basis,
                                        const FrameScorer& scorer = FrameScorer{},
                                        std::string utterance_id = {}) {
  if (original.size() != reconstructed.size())
    throw ContractError("original and reconstructed sequences differ in length");
  UtteranceCurves out;
  out.utterance_id = std::move(utterance_id);
  for (auto& c : out.curves) c.reserve(original.size());
  const auto& pyr = scorer.pyramid();
  for (std::size_t i = 0; i < original.size(); ++i) {
    const Frame& o = original[i];
    const Frame pca = reconstruct(project(o, basis, i), basis);
    const Frame& rec = reconstructed[i];
    const auto po = pyr.decompose(o);
    const auto pp = pyr.decompose(pca);
    const auto pr = pyr.decompose(rec);
    out.curves[0].push_back(scorer.score(o, rec, po, pr));
    out.curves[1].push_back(scorer.score(pca, rec, pp, pr));
    out.curves[2].push_back(scorer.score(o, pca, po, pp));
  }
  return out;
}

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;

  bool operator==(const MetricSummary&) const = default;
};

struct QualityReport {
  std::string system;
  std::vector<std::pair<std::string, FrameMetrics>> utterance_means;
  std::size_t frame_count = 0;
  MetricSummary mse, ssim, cwssim;
};

/// One entry per utterance: its id and per-frame metrics.
using FrameMetricsByUtterance = std::vector<std::pair<std::string, std::vector<FrameMetrics>>>;

/// Population mean and standard deviation over all frames (unweighted).
inline QualityReport aggregate(const FrameMetricsByUtterance& per_utterance, std::string system = {}) {
  QualityReport rep;
  rep.system = std::move(system);
  std::array<double, 3> sum{}, sq{};
  std::size_t n = 0;
  auto fields = [](const FrameMetrics& f) { return std::array<double, 3>{f.mse, f.ssim, f.cwssim}; };
  for (const auto& [id, frames] : per_utterance) {
    std::array<double, 3> usum{};
    for (const auto& f : frames) {
      const auto v = fields(f);
      for (int k = 0; k < 3; ++k) {
        usum[k] += v[k];
        sum[k] += v[k];
      }
    }
    n += frames.size();
    if (!frames.empty()) {
      const double m = static_cast<double>(frames.size());
      rep.utterance_means.push_back({id, {usum[0] / m, usum[1] / m, usum[2] / m}});
    }
  }
  if (n == 0) throw ContractError("cannot aggregate zero frames");
  std::array<double, 3> mean{};
  for (int k = 0; k < 3; ++k) mean[k] = sum[k] / static_cast<double>(n);
  for (const auto& [id, frames] : per_utterance)
    for (const auto& f : frames) {
      const auto v = fields(f);
      for (int k = 0; k < 3; ++k) sq[k] += (v[k] - mean[k]) * (v[k] - mean[k]);
    }
  rep.frame_count = n;
  rep.mse = {mean[0], std::sqrt(sq[0] / static_cast<double>(n))};
  rep.ssim = {mean[1], std::sqrt(sq[1] / static_cast<double>(n))};
  rep.cwssim = {mean[2], std::sqrt(sq[2] / static_cast<double>(n))};
  return rep;
}

inline QualityReport aggregate(std::span<const FrameMetrics> frames, std::string system = {}) {
  return aggregate(FrameMetricsByUtterance{{"", {frames.begin(), frames.end()}}}, std::move(system));
}

// ---------------------------------------------------------------------------
// Text outputs

namespace detail {
inline std::string fmt_double(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}
}  // namespace detail

inline std::string format_metric_value(double v) { return detail::fmt_double("%.17g", v); }

inline std::string metrics_csv_header() { return "utterance_id,frame,metric,pairing,value\n"; }

/// Rows `utterance_id,frame,metric,pairing,value` for one utterance.
inline std::string metrics_csv_rows(const UtteranceCurves& c) {
  std::string out;
  for (Pairing p : kPairings) {
    const auto& curve = c[p];
    for (std::size_t i = 0; i < curve.size(); ++i) {
      const std::array<std::pair<const char*, double>, 3> vals{
          {{"mse", curve[i].mse}, {"ssim", curve[i].ssim}, {"cwssim", curve[i].cwssim}}};
      for (const auto& [name, v] : vals) {
        out += c.utterance_id;
        out += ',' + std::to_string(i) + ',' + name + ',' + std::string(to_string(p)) + ',' +
               format_metric_value(v) + '\n';
      }
    }
  }
  return out;
}

/// One row of the system comparison table.
struct SummaryRow {
  std::string hidden_layers;  // e.g. "2 x 1000 units"
  std::string features;       // e.g. "128 ETs"
  QualityReport report;
};

/// Fixed-width text table: Hidden Layers | UTI features | MSE, SSIM, CW-SSIM
/// (Mean, Std.dev. each).
inline std::string format_summary_table(std::span<const SummaryRow> rows, std::string_view title = {}) {
  auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s.append(w - s.size(), ' ');
    return s;
  };
  auto num = [](double v) {
    auto s = detail::fmt_double("%.2f", v);
    return std::string(s.size() < 9 ? 9 - s.size() : 0, ' ') + s;
  };
  std::string out;
  if (!title.empty()) out += std::string(title) + '\n';
  const std::string rule(105, '-');
  out += rule + '\n';
  out += pad("Hidden Layers", 20) + "| " + pad("UTI features", 15) + "| " + pad("MSE", 20) + "| " +
         pad("SSIM", 20) + "| " + "CW-SSIM\n";
  out += pad("", 20) + "| " + pad("", 15) + "| " + pad("     Mean Std.dev.", 20) + "| " +
         pad("     Mean Std.dev.", 20) + "| " + "     Mean Std.dev.\n";
  out += rule + '\n';
  for (const auto& r : rows) {
    const auto& q = r.report;
    out += pad(r.hidden_layers, 20) + "| " + pad(r.features, 15) + "| " +
           pad(num(q.mse.mean) + num(q.mse.std), 20) + "| " +
           pad(num(q.ssim.mean) + num(q.ssim.std), 20) + "| " + num(q.cwssim.mean) +
           num(q.cwssim.std) + '\n';
  }
  out += rule + '\n';
  return out;
}

inline std::string summary_csv_header() {
  return "system,hidden_layers,uti_features,pairing,frames,mse_mean,mse_std,ssim_mean,ssim_std,"
         "cwssim_mean,cwssim_std\n";
}

inline std::string summary_csv_row(const SummaryRow& r, Pairing p) {
  const auto& q = r.report;
  std::string out = q.system + ',' + r.hidden_layers + ',' + r.features + ',' +
                    std::string(to_string(p)) + ',' + std::to_string(q.frame_count);
  for (double v : {q.mse.mean, q.mse.std, q.ssim.mean, q.ssim.std, q.cwssim.mean, q.cwssim.std})
    out += ',' + format_metric_value(v);
  return out + '\n';
}

}  // namespace uti
