#pragma once

// MFCC + delta acoustic features, one 50-dimensional vector per ultrasound
// frame.

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "uti/dataset_io.hpp"
#include "uti/error.hpp"
#include "uti/feature_matrix.hpp"

namespace uti {

struct MfccConfig {
  std::size_t n_mfcc = 25;
  std::size_t n_mels = 26;
  std::size_t fft_size = 512;
  double window_length = 0.012;  // seconds
  double preemphasis = 0.97;
  double mel_fmin = 0.0;
  double mel_fmax = kAudioSampleRate / 2.0;
  double floor = 1e-10;
  std::uint32_t sample_rate = kAudioSampleRate;
  std::size_t delta_width = 2;

  std::size_t window_samples() const { return uti::window_samples(window_length, sample_rate); }
  std::size_t feature_dim() const { return 2 * n_mfcc; }

  void validate() const {
    if (n_mfcc < 1 || n_mfcc > n_mels) throw ContractError("need 1 <= n_mfcc <= n_mels");
    if (n_mels > fft_size / 2 + 1) throw ContractError("n_mels exceeds fft_size/2 + 1");
    if (!(floor > 0.0)) throw ContractError("log floor must be positive");
    if (sample_rate == 0 || !(window_length > 0.0)) throw ContractError("bad window definition");
    if (window_samples() > fft_size) throw ContractError("window longer than fft_size");
    if (!(mel_fmin >= 0.0 && mel_fmax > mel_fmin && mel_fmax <= sample_rate / 2.0))
      throw ContractError("mel band limits must satisfy 0 <= fmin < fmax <= sample_rate/2");
    if (delta_width < 1) throw ContractError("delta width must be >= 1");
  }
};

struct AcousticFeatureVector {
  std::vector<double> mfcc;
  std::vector<double> delta;
  std::size_t frame_index = 0;

  std::vector<double> values() const {
    std::vector<double> v = mfcc;
    v.insert(v.end(), delta.begin(), delta.end());
    return v;
  }
};

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

/// Precomputed analysis state for one MfccConfig.
class MfccAnalyzer {
 public:
  explicit MfccAnalyzer(MfccConfig cfg) : cfg_(cfg) {
    cfg_.validate();
    const std::size_t n = cfg_.window_samples();
    window_.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      window_[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                        static_cast<double>(n));
    build_filterbank();
    build_dct();
  }

  const MfccConfig& config() const { return cfg_; }
  std::size_t bins() const { return cfg_.fft_size / 2 + 1; }
  /// n_mels x bins, row-major.
  const std::vector<double>& filterbank() const { return filters_; }
  const std::vector<double>& filter_centers() const { return centers_; }

  /// |FFT|^2 of the pre-emphasized, Hann-windowed, zero-padded frame.
  std::vector<double> power_spectrum(std::span<const double> frame) const {
    if (frame.size() != window_.size())
      throw SizeError("MFCC window must hold " + std::to_string(window_.size()) + " samples, got " +
                      std::to_string(frame.size()));
    for (double s : frame)
      if (!std::isfinite(s)) throw InputError("non-finite audio sample");
    std::vector<std::complex<double>> buf(cfg_.fft_size, 0.0);
    for (std::size_t t = 0; t < frame.size(); ++t) {
      const double prev = t == 0 ? 0.0 : frame[t - 1];
      const double y = t == 0 ? frame[0] : frame[t] - cfg_.preemphasis * prev;
      buf[t] = y * window_[t];
    }
    std::vector<std::complex<double>> spec;
    Eigen::FFT<double> fft;
    fft.fwd(spec, buf);
    std::vector<double> power(bins());
    for (std::size_t k = 0; k < power.size(); ++k) power[k] = std::norm(spec[k]);
    return power;
  }

  std::vector<double> mel_energies(std::span<const double> frame) const {
    const auto power = power_spectrum(frame);
    std::vector<double> e(cfg_.n_mels, 0.0);
    for (std::size_t m = 0; m < cfg_.n_mels; ++m) {
      const double* w = filters_.data() + m * bins();
      double acc = 0.0;
      for (std::size_t k = 0; k < bins(); ++k) acc += w[k] * power[k];
      e[m] = acc;
    }
    return e;
  }

  std::vector<double> mfcc(std::span<const double> frame) const {
    const auto e = mel_energies(frame);
    std::vector<double> loge(e.size());
    for (std::size_t m = 0; m < e.size(); ++m) loge[m] = std::log(std::max(e[m], cfg_.floor));
    std::vector<double> c(cfg_.n_mfcc, 0.0);
    for (std::size_t k = 0; k < cfg_.n_mfcc; ++k) {
      const double* row = dct_.data() + k * cfg_.n_mels;
      double acc = 0.0;
      for (std::size_t m = 0; m < cfg_.n_mels; ++m) acc += row[m] * loge[m];
      c[k] = acc;
    }
    return c;
  }

 private:
  void build_filterbank() {
    const std::size_t nb = bins();
    const double mlo = hz_to_mel(cfg_.mel_fmin);
    const double mhi = hz_to_mel(cfg_.mel_fmax);
    std::vector<double> edges(cfg_.n_mels + 2);
    for (std::size_t i = 0; i < edges.size(); ++i)
      edges[i] = mel_to_hz(mlo + (mhi - mlo) * static_cast<double>(i) /
                                     static_cast<double>(cfg_.n_mels + 1));
    filters_.assign(cfg_.n_mels * nb, 0.0);
    centers_.resize(cfg_.n_mels);
    for (std::size_t m = 0; m < cfg_.n_mels; ++m) {
      const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
      centers_[m] = mid;
      double sum = 0.0;
      for (std::size_t k = 0; k < nb; ++k) {
        const double f = static_cast<double>(k) * cfg_.sample_rate / static_cast<double>(cfg_.fft_size);
        double w = 0.0;
        if (f > lo && f <= mid) w = (f - lo) / (mid - lo);
        else if (f > mid && f < hi) w = (hi - f) / (hi - mid);
        filters_[m * nb + k] = w;
        sum += w;
      }
      if (sum <= 0.0)
        throw ContractError("mel filter " + std::to_string(m) +
                            " covers no FFT bin; lower n_mels or raise fft_size");
      for (std::size_t k = 0; k < nb; ++k) filters_[m * nb + k] /= sum;
    }
  }

  void build_dct() {
    const std::size_t n = cfg_.n_mels;
    dct_.assign(cfg_.n_mfcc * n, 0.0);
    for (std::size_t k = 0; k < cfg_.n_mfcc; ++k) {
      const double s = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
      for (std::size_t m = 0; m < n; ++m)
        dct_[k * n + m] = s * std::cos(std::numbers::pi * static_cast<double>(k) *
                                       (2.0 * static_cast<double>(m) + 1.0) / (2.0 * n));
    }
  }

  MfccConfig cfg_;
  std::vector<double> window_;
  std::vector<double> filters_;
  std::vector<double> centers_;
  std::vector<double> dct_;
};

inline std::vector<double> compute_mfcc(std::span<const double> window, const MfccConfig& cfg = {}) {
  return MfccAnalyzer(cfg).mfcc(window);
}

/// Regression delta with half-width `width`; edges replicate the first and
/// last frame.
inline std::vector<double> compute_delta(std::span<const std::vector<double>> seq,
                                         std::size_t frame_index, std::size_t width = 2) {
  if (seq.empty()) throw ContractError("delta of an empty sequence");
  if (frame_index >= seq.size()) throw IndexError("delta frame index out of range");
  const auto last = static_cast<long long>(seq.size()) - 1;
  const std::size_t dim = seq.front().size();
  double denom = 0.0;
  for (std::size_t n = 1; n <= width; ++n) denom += static_cast<double>(n * n);
  denom *= 2.0;
  std::vector<double> d(dim, 0.0);
  const auto t = static_cast<long long>(frame_index);
  for (std::size_t n = 1; n <= width; ++n) {
    const auto& ahead = seq[static_cast<std::size_t>(std::min(t + static_cast<long long>(n), last))];
    const auto& behind = seq[static_cast<std::size_t>(std::max(t - static_cast<long long>(n), 0LL))];
    for (std::size_t j = 0; j < dim; ++j)
      d[j] += static_cast<double>(n) * (ahead[j] - behind[j]);
  }
  for (auto& v : d) v /= denom;
  return d;
}

inline std::vector<AcousticFeatureVector> extract_utterance_features(const ParallelUtterance& u,
                                                                     const MfccConfig& cfg = {}) {
  if (u.audio.sample_rate != cfg.sample_rate)
    throw ContractError("audio sample rate " + std::to_string(u.audio.sample_rate) +
                        " Hz does not match the MFCC configuration (" +
                        std::to_string(cfg.sample_rate) + " Hz)");
  MfccAnalyzer analyzer(cfg);
  const std::size_t frames = u.frame_count();
  std::vector<std::vector<double>> ceps(frames);
  for (std::size_t i = 0; i < frames; ++i)
    ceps[i] = analyzer.mfcc(frame_audio_window(u, i, cfg.window_length));
  std::vector<AcousticFeatureVector> out(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    out[i].mfcc = ceps[i];
    out[i].delta = compute_delta(ceps, i, cfg.delta_width);
    out[i].frame_index = i;
  }
  return out;
}

inline FeatureMatrix to_matrix(std::span<const AcousticFeatureVector> feats) {
  FeatureMatrix m;
  for (const auto& f : feats) m.append_row(f.values());
  return m;
}

}  // namespace uti
