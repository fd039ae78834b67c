#pragma once

// Synthetic parallel corpus with a known articulatory latent. A scalar
// "tongue height" g(t) in [0, 1] drives both the ultrasound ridge geometry and
// the pitch / resonance of a harmonic tone.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "uti/dataset_io.hpp"
#include "uti/error.hpp"
#include "uti/random.hpp"

namespace uti {

struct SyntheticParams {
  double fps = kUltrasoundFps;
  std::uint32_t sample_rate = kAudioSampleRate;
  double smoothing_time = 0.12;  // latent correlation time (s)
  double noise = 0.5;            // speckle mix in [0, 1]
  double base_intensity = 30.0;
  double ridge_intensity = 170.0;
  double ridge_width = 2.5;      // Gaussian sigma across scanlines
  double amplitude = 0.5;

  /// AR(1) coefficient of the latent's underlying Gaussian process.
  double latent_rho() const { return std::exp(-1.0 / (fps * smoothing_time)); }
};

/// Ridge centre row at depth column `col` for latent value g. Stays within
/// rows [4, 54] of a 64-scanline frame for every g in [0, 1].
inline double ridge_row(double g, std::size_t col, std::size_t width) {
  const double half = (static_cast<double>(width) - 1.0) / 2.0;
  const double u = (static_cast<double>(col) - half) / half;
  const double offset = 14.0 + 30.0 * g;
  const double curvature = 10.0 * (2.0 * g - 1.0);
  return offset + curvature * u * u;
}

inline double pitch_hz(double g) { return 100.0 + 150.0 * g; }
inline double resonance_hz(double g) { return 500.0 + 1500.0 * g; }

/// Stationary smoothed walk: z is AR(1) with unit variance, g = Phi(z), so g
/// is marginally uniform on [0, 1] with variance 1/12.
inline std::vector<double> latent_trajectory(std::uint64_t seed, std::size_t n_frames,
                                             const SyntheticParams& p = {}) {
  Rng rng(derive_seed(seed, 1));
  const double rho = p.latent_rho();
  const double innov = std::sqrt(1.0 - rho * rho);
  std::vector<double> g(n_frames);
  double z = rng.normal();
  for (std::size_t t = 0; t < n_frames; ++t) {
    if (t > 0) z = rho * z + innov * rng.normal();
    g[t] = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  }
  return g;
}

inline constexpr double kLatentVariance = 1.0 / 12.0;

struct SyntheticUtterance {
  ParallelUtterance utterance;
  std::vector<double> latent;
};

/// Renders ultrasound frames and audio for a given latent trajectory.
inline SyntheticUtterance render_utterance(const std::string& id, const std::vector<double>& latent,
                                           std::uint64_t seed, const SyntheticParams& p = {}) {
  if (latent.empty()) throw ContractError("empty latent trajectory");
  for (double g : latent)
    if (!(g >= 0.0 && g <= 1.0)) throw ContractError("latent values must lie in [0, 1]");
  const std::size_t n_frames = latent.size();
  SyntheticUtterance out;
  out.latent = latent;
  auto& us = out.utterance.ultrasound;
  us.utterance_id = id;
  us.width = kRawDepthSamples;
  us.height = kRawScanlines;
  us.fps = p.fps;
  us.pixels.resize(n_frames * us.frame_size());

  Rng speckle(derive_seed(seed, 2));
  const double rayleigh_scale = std::sqrt(2.0 / std::numbers::pi);  // unit mean
  const double inv2s2 = 1.0 / (2.0 * p.ridge_width * p.ridge_width);
  for (std::size_t t = 0; t < n_frames; ++t) {
    std::uint8_t* px = us.pixels.data() + t * us.frame_size();
    for (std::size_t c = 0; c < us.width; ++c) {
      const double y = ridge_row(latent[t], c, us.width);
      for (std::size_t r = 0; r < us.height; ++r) {
        const double d = static_cast<double>(r) - y;
        const double clean = p.base_intensity + p.ridge_intensity * std::exp(-d * d * inv2s2);
        const double mult = (1.0 - p.noise) + p.noise * speckle.rayleigh(rayleigh_scale);
        px[r * us.width + c] =
            static_cast<std::uint8_t>(std::clamp(std::floor(clean * mult + 0.5), 0.0, 255.0));
      }
    }
  }

  auto& au = out.utterance.audio;
  au.utterance_id = id;
  au.sample_rate = p.sample_rate;
  const auto n_samples =
      static_cast<std::size_t>(std::ceil(static_cast<double>(n_frames) / p.fps * p.sample_rate));
  au.samples.resize(n_samples);
  const double nyquist_guard = 0.45 * p.sample_rate;
  double phase = 0.0;
  for (std::size_t s = 0; s < n_samples; ++s) {
    const double pos = std::min(static_cast<double>(s) / p.sample_rate * p.fps,
                                static_cast<double>(n_frames - 1));
    const auto i0 = static_cast<std::size_t>(pos);
    const std::size_t i1 = std::min(i0 + 1, n_frames - 1);
    const double frac = pos - static_cast<double>(i0);
    const double g = latent[i0] + frac * (latent[i1] - latent[i0]);
    const double f0 = pitch_hz(g);
    const double formant = resonance_hz(g);
    double acc = 0.0, norm = 0.0;
    for (int h = 1; h * f0 < nyquist_guard; ++h) {
      const double df = (h * f0 - formant) / 250.0;
      const double a = std::exp(-0.5 * df * df) + 0.05 / h;
      acc += a * std::sin(h * phase);
      norm += a;
    }
    const double x = p.amplitude * acc / norm;
    au.samples[s] = static_cast<double>(detail::to_pcm16(x)) / 32768.0;
    phase = std::fmod(phase + 2.0 * std::numbers::pi * f0 / p.sample_rate, 2.0 * std::numbers::pi);
  }
  out.utterance.sync_offset = 0.0;
  return out;
}

inline SyntheticUtterance generate_synthetic(std::uint64_t seed, std::size_t n_frames,
                                             const SyntheticParams& p = {},
                                             std::string id = {}) {
  if (n_frames < 16) throw SizeError("synthetic utterances need at least 16 frames");
  if (id.empty()) id = "syn_" + std::to_string(seed);
  return render_utterance(id, latent_trajectory(seed, n_frames, p), seed, p);
}

inline ParallelUtterance generate_utterance(std::uint64_t seed, std::size_t n_frames,
                                            const SyntheticParams& p = {}) {
  return generate_synthetic(seed, n_frames, p).utterance;
}

inline std::string corpus_utterance_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "utt%03zu", i);
  return buf;
}

inline std::uint64_t corpus_utterance_seed(std::uint64_t seed, std::size_t i) {
  return derive_seed(seed, 1000 + i);
}

/// Writes `<id>.utr` / `<id>.wav` pairs and `manifest.tsv` into `dir`. The
/// last `test_count` utterances form the test partition; the rest are
/// training utterances with a frame-level validation tail.
inline CorpusManifest generate_corpus(std::uint64_t seed, std::size_t n_utterances,
                                      std::size_t min_frames, std::size_t max_frames,
                                      const std::filesystem::path& dir,
                                      const SyntheticParams& p = {}, std::size_t test_count = 9) {
  if (n_utterances < 12) throw SizeError("a synthetic corpus needs at least 12 utterances");
  if (test_count >= n_utterances) throw SizeError("test partition would leave no training data");
  if (min_frames < 16 || max_frames < min_frames) throw ContractError("bad frame count range");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  Rng lengths(derive_seed(seed, 3));
  CorpusManifest m;
  m.root_path = dir;
  for (std::size_t i = 0; i < n_utterances; ++i) {
    const std::size_t frames = min_frames + static_cast<std::size_t>(lengths.index(max_frames - min_frames + 1));
    const std::string id = corpus_utterance_id(i);
    const auto syn = generate_synthetic(corpus_utterance_seed(seed, i), frames, p, id);
    save_utterance(syn.utterance, dir / id);
    (i + test_count < n_utterances ? m.train_ids : m.test_ids).push_back(id);
  }
  save_manifest(m, dir / "manifest.tsv");
  return m;
}

}  // namespace uti
