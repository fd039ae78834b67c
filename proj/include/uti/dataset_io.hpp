#pragma once

// Parallel audio / ultrasound utterances: the `.utr` container, 16-bit PCM
// WAV, audio windows aligned to ultrasound frames, and corpus partitioning.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "uti/binary_io.hpp"
#include "uti/error.hpp"
#include "uti/random.hpp"

namespace uti {

inline constexpr double kUltrasoundFps = 82.0;
inline constexpr std::uint32_t kAudioSampleRate = 22050;
inline constexpr std::uint16_t kRawScanlines = 64;
inline constexpr std::uint16_t kRawDepthSamples = 842;
inline constexpr std::uint16_t kUtrVersion = 1;

/// Raw scanline frames. `width` is the number of depth samples per scanline
/// (842 native), `height` the number of scanlines (64). Pixels are stored
/// frame-major, then row-major (one row per scanline).
struct UltrasoundRecording {
  std::string utterance_id;
  std::uint16_t width = 0;
  std::uint16_t height = 0;
  double fps = kUltrasoundFps;
  std::vector<std::uint8_t> pixels;

  std::size_t frame_size() const { return std::size_t{width} * height; }
  std::size_t frame_count() const { return frame_size() == 0 ? 0 : pixels.size() / frame_size(); }

  std::span<const std::uint8_t> frame(std::size_t i) const {
    if (i >= frame_count())
      throw IndexError("frame " + std::to_string(i) + " out of range [0, " +
                       std::to_string(frame_count()) + ")");
    return std::span(pixels).subspan(i * frame_size(), frame_size());
  }

  bool operator==(const UltrasoundRecording&) const = default;
};

/// Mono audio with samples in [-1, 1].
struct AudioTrack {
  std::string utterance_id;
  std::uint32_t sample_rate = kAudioSampleRate;
  std::vector<double> samples;

  double duration() const { return static_cast<double>(samples.size()) / sample_rate; }

  bool operator==(const AudioTrack&) const = default;
};

struct ParallelUtterance {
  UltrasoundRecording ultrasound;
  AudioTrack audio;
  double sync_offset = 0.0;  // audio time (s) of ultrasound frame 0

  const std::string& id() const { return ultrasound.utterance_id; }
  std::size_t frame_count() const { return ultrasound.frame_count(); }

  bool operator==(const ParallelUtterance&) const = default;
};

struct CorpusManifest {
  std::vector<std::string> train_ids;
  std::vector<std::string> validation_ids;
  std::vector<std::string> test_ids;
  std::filesystem::path root_path;
  // Applied at the frame level when validation_ids is empty. Not serialized.
  double validation_fraction = 0.10;

  bool operator==(const CorpusManifest&) const = default;
};

namespace detail {

template <class E>
void check_recording(const UltrasoundRecording& r) {
  if (r.width == 0 || r.height == 0) throw E("ultrasound frame dimensions must be positive");
  if (!(r.fps > 0.0) || !std::isfinite(r.fps))
    throw E("fps must be positive and finite, got " + std::to_string(r.fps));
  if (r.pixels.empty() || r.pixels.size() % r.frame_size() != 0)
    throw E("pixel count " + std::to_string(r.pixels.size()) +
            " is not a positive multiple of the frame size");
  if (r.utterance_id.size() > std::numeric_limits<std::uint16_t>::max())
    throw E("utterance id too long");
}

template <class E>
void check_audio(const AudioTrack& a) {
  if (a.sample_rate == 0) throw E("sample rate must be positive");
  for (double s : a.samples)
    if (!std::isfinite(s) || s < -1.0 || s > 1.0) throw E("audio sample outside [-1, 1]");
}

template <class E>
void check_utterance(const ParallelUtterance& u) {
  check_recording<E>(u.ultrasound);
  check_audio<E>(u.audio);
  if (!(u.sync_offset >= 0.0) || !std::isfinite(u.sync_offset))
    throw E("sync_offset must be finite and >= 0");
}

inline void check_pairing(const ParallelUtterance& u) {
  if (u.ultrasound.utterance_id != u.audio.utterance_id)
    throw PairingError("utterance id mismatch: ultrasound '" + u.ultrasound.utterance_id +
                       "' vs audio '" + u.audio.utterance_id + "'");
  const double needed = static_cast<double>(u.frame_count() - 1) / u.ultrasound.fps;
  if (u.audio.duration() + 1e-12 < needed)
    throw PairingError("audio of '" + u.audio.utterance_id + "' lasts " +
                       std::to_string(u.audio.duration()) + " s but frames span " +
                       std::to_string(needed) + " s");
}

inline std::int16_t to_pcm16(double x) {
  const double v = std::floor(x * 32768.0 + 0.5);
  return static_cast<std::int16_t>(std::clamp(v, -32768.0, 32767.0));
}

}  // namespace detail

/// Throws ValidationError (or PairingError) if any invariant is violated.
inline void validate(const ParallelUtterance& u) {
  detail::check_utterance<ValidationError>(u);
  detail::check_pairing(u);
}

// ---------------------------------------------------------------------------
// .utr container

inline io::Bytes encode_utr(const UltrasoundRecording& r) {
  detail::check_recording<ValidationError>(r);
  io::ByteWriter w;
  w.magic("UTIR");
  w.u16(kUtrVersion);
  w.u16(r.width);
  w.u16(r.height);
  w.f64(r.fps);
  w.u32(static_cast<std::uint32_t>(r.frame_count()));
  w.u16(static_cast<std::uint16_t>(r.utterance_id.size()));
  w.bytes(std::span(reinterpret_cast<const std::uint8_t*>(r.utterance_id.data()),
                    r.utterance_id.size()));
  w.bytes(r.pixels);
  return std::move(w).take();
}

inline UltrasoundRecording decode_utr(std::span<const std::uint8_t> data,
                                      const std::string& context = "utr") {
  io::ByteReader rd(data, context);
  rd.expect_magic("UTIR");
  const auto version = rd.u16();
  if (version != kUtrVersion)
    throw FormatError(context + ": unsupported version " + std::to_string(version));
  UltrasoundRecording r;
  r.width = rd.u16();
  r.height = rd.u16();
  r.fps = rd.f64();
  const std::uint32_t frames = rd.u32();
  const auto id_len = rd.u16();
  auto id = rd.bytes(id_len);
  r.utterance_id.assign(id.begin(), id.end());
  if (r.width == 0 || r.height == 0 || frames == 0)
    throw FormatError(context + ": header declares an empty recording");
  if (!(r.fps > 0.0) || !std::isfinite(r.fps)) throw FormatError(context + ": invalid fps");
  rd.begin_payload();
  auto px = rd.bytes(std::size_t{frames} * r.width * r.height);
  r.pixels.assign(px.begin(), px.end());
  rd.expect_end();
  return r;
}

// ---------------------------------------------------------------------------
// RIFF/WAVE, PCM16 mono. The utterance id travels in a LIST/INFO/INAM chunk
// and the sync offset in a private "usyn" chunk (8-byte little-endian double);
// standard readers skip both.

inline io::Bytes encode_wav(const AudioTrack& a, double sync_offset) {
  detail::check_audio<ValidationError>(a);
  io::ByteWriter fmt;
  fmt.u16(1);  // PCM
  fmt.u16(1);  // mono
  fmt.u32(a.sample_rate);
  fmt.u32(a.sample_rate * 2);
  fmt.u16(2);
  fmt.u16(16);

  io::ByteWriter info;
  info.magic("INFO");
  info.magic("INAM");
  const std::uint32_t name_len = static_cast<std::uint32_t>(a.utterance_id.size() + 1);
  info.u32(name_len);
  info.magic(a.utterance_id);
  info.u8(0);
  if (name_len % 2) info.u8(0);

  io::ByteWriter w;
  auto chunk = [&](std::string_view tag, const io::Bytes& body) {
    w.magic(tag);
    w.u32(static_cast<std::uint32_t>(body.size()));
    w.bytes(body);
    if (body.size() % 2) w.u8(0);
  };
  io::ByteWriter sync;
  sync.f64(sync_offset);

  io::ByteWriter data;
  for (double s : a.samples) data.u16(static_cast<std::uint16_t>(detail::to_pcm16(s)));

  w.magic("RIFF");
  w.u32(0);  // patched below
  w.magic("WAVE");
  chunk("fmt ", fmt.buffer());
  chunk("LIST", info.buffer());
  chunk("usyn", sync.buffer());
  chunk("data", data.buffer());
  io::Bytes out = std::move(w).take();
  const auto riff_size = static_cast<std::uint32_t>(out.size() - 8);
  for (int i = 0; i < 4; ++i) out[4 + i] = static_cast<std::uint8_t>(riff_size >> (8 * i));
  return out;
}

struct DecodedWav {
  AudioTrack audio;
  double sync_offset = 0.0;
  bool has_id = false;
};

inline DecodedWav decode_wav(std::span<const std::uint8_t> data, const std::string& context = "wav") {
  io::ByteReader rd(data, context);
  rd.expect_magic("RIFF");
  rd.u32();
  rd.expect_magic("WAVE");
  DecodedWav out;
  bool have_fmt = false, have_data = false;
  while (rd.remaining() >= 8) {
    auto tag_bytes = rd.bytes(4);
    const std::string tag(tag_bytes.begin(), tag_bytes.end());
    const std::uint32_t size = rd.u32();
    if (tag == "data") rd.begin_payload();
    auto body = rd.bytes(size);
    if (size % 2 && rd.remaining() > 0) rd.bytes(1);
    io::ByteReader cr(body, context + ":" + tag);
    if (tag == "fmt ") {
      const auto format = cr.u16();
      const auto channels = cr.u16();
      out.audio.sample_rate = cr.u32();
      cr.u32();
      cr.u16();
      const auto bits = cr.u16();
      if (format != 1 || channels != 1 || bits != 16)
        throw FormatError(context + ": only mono 16-bit PCM is supported");
      if (out.audio.sample_rate == 0) throw FormatError(context + ": zero sample rate");
      have_fmt = true;
    } else if (tag == "data") {
      if (!have_fmt) throw FormatError(context + ": data chunk before fmt chunk");
      if (size % 2) throw CorruptionError(context + ": odd PCM16 data length");
      out.audio.samples.resize(size / 2);
      for (auto& s : out.audio.samples)
        s = static_cast<double>(static_cast<std::int16_t>(cr.u16())) / 32768.0;
      have_data = true;
    } else if (tag == "LIST" && size >= 4) {
      auto kind = cr.bytes(4);
      if (std::string(kind.begin(), kind.end()) != "INFO") continue;
      while (cr.remaining() >= 8) {
        auto sub = cr.bytes(4);
        const std::uint32_t n = cr.u32();
        auto payload = cr.bytes(n);
        if (n % 2 && cr.remaining() > 0) cr.bytes(1);
        if (std::string(sub.begin(), sub.end()) == "INAM") {
          std::string name(payload.begin(), payload.end());
          name.erase(std::find(name.begin(), name.end(), '\0'), name.end());
          out.audio.utterance_id = name;
          out.has_id = true;
        }
      }
    } else if (tag == "usyn") {
      out.sync_offset = cr.f64();
    }
  }
  if (rd.remaining() != 0) throw CorruptionError(context + ": dangling bytes after last chunk");
  if (!have_fmt || !have_data) throw FormatError(context + ": missing fmt or data chunk");
  return out;
}

inline AudioTrack load_wav(const std::filesystem::path& path) {
  auto bytes = io::read_file(path);
  auto w = decode_wav(bytes, path.string());
  if (!w.has_id) w.audio.utterance_id = path.stem().string();
  return std::move(w.audio);
}

inline void save_wav(const AudioTrack& a, const std::filesystem::path& path) {
  io::write_file(path, encode_wav(a, 0.0));
}

// ---------------------------------------------------------------------------
// Utterance files

inline std::filesystem::path utr_path(std::filesystem::path p) {
  if (p.extension() != ".utr") p += ".utr";
  return p;
}

/// Saves `<stem>.utr` and `<stem>.wav`. Output bytes depend only on `u`.
inline void save_utterance(const ParallelUtterance& u, const std::filesystem::path& path) {
  validate(u);
  const auto utr = utr_path(path);
  auto wav = utr;
  wav.replace_extension(".wav");
  const auto utr_bytes = encode_utr(u.ultrasound);
  const auto wav_bytes = encode_wav(u.audio, u.sync_offset);
  io::write_file(utr, utr_bytes);
  io::write_file(wav, wav_bytes);
}

inline ParallelUtterance load_utterance(const std::filesystem::path& path) {
  const auto utr = utr_path(path);
  auto wav = utr;
  wav.replace_extension(".wav");
  ParallelUtterance u;
  u.ultrasound = decode_utr(io::read_file(utr), utr.string());
  auto w = decode_wav(io::read_file(wav), wav.string());
  if (!w.has_id) w.audio.utterance_id = wav.stem().string();
  u.audio = std::move(w.audio);
  u.sync_offset = w.sync_offset;
  if (!(u.sync_offset >= 0.0) || !std::isfinite(u.sync_offset))
    throw FormatError(wav.string() + ": invalid sync offset");
  detail::check_pairing(u);
  return u;
}

// ---------------------------------------------------------------------------
// Alignment

/// Center time (s, on the audio clock) of ultrasound frame `i`.
inline double frame_center_time(const ParallelUtterance& u, std::size_t i) {
  return u.sync_offset + static_cast<double>(i) / u.ultrasound.fps;
}

inline std::size_t window_samples(double window_length, std::uint32_t sample_rate) {
  return static_cast<std::size_t>(std::llround(window_length * sample_rate));
}

/// First sample index of the window centered on frame `i` (may be negative).
inline long long window_start(const ParallelUtterance& u, std::size_t i, std::size_t n) {
  const double center = frame_center_time(u, i) * u.audio.sample_rate;
  return static_cast<long long>(std::floor(center - static_cast<double>(n) / 2.0 + 0.5));
}

/// Audio samples centered on ultrasound frame `frame_index`, zero-padded
/// where the window extends past either end of the waveform.
inline std::vector<double> frame_audio_window(const ParallelUtterance& u, std::size_t frame_index,
                                              double window_length) {
  if (frame_index >= u.frame_count())
    throw IndexError("frame index " + std::to_string(frame_index) + " out of range [0, " +
                     std::to_string(u.frame_count()) + ")");
  const std::size_t n = window_samples(window_length, u.audio.sample_rate);
  const long long start = window_start(u, frame_index, n);
  std::vector<double> out(n, 0.0);
  const auto total = static_cast<long long>(u.audio.samples.size());
  for (std::size_t k = 0; k < n; ++k) {
    const long long t = start + static_cast<long long>(k);
    if (t >= 0 && t < total) out[k] = u.audio.samples[static_cast<std::size_t>(t)];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Corpus partitioning

inline void validate(const CorpusManifest& m) {
  std::set<std::string> seen;
  for (const auto* part : {&m.train_ids, &m.validation_ids, &m.test_ids})
    for (const auto& id : *part)
      if (!seen.insert(id).second)
        throw ValidationError("utterance '" + id + "' appears in more than one partition slot");
}

/// Holds out `test_count` utterances for testing; the rest go to `train_ids`.
/// The validation fraction is carried along and applied per frame downstream.
inline CorpusManifest split_corpus(std::vector<std::string> ids, double validation_fraction = 0.10,
                                   std::size_t test_count = 9, std::uint64_t seed = 0) {
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
    throw ContractError("validation fraction must lie in (0, 1)");
  std::set<std::string> uniq(ids.begin(), ids.end());
  if (uniq.size() != ids.size()) throw ContractError("duplicate utterance ids");
  if (test_count >= ids.size())
    throw SizeError("need more than " + std::to_string(test_count) + " utterances, got " +
                    std::to_string(ids.size()));
  std::sort(ids.begin(), ids.end());
  Rng rng(seed);
  rng.shuffle(std::span(ids));
  CorpusManifest m;
  m.validation_fraction = validation_fraction;
  m.test_ids.assign(ids.end() - static_cast<std::ptrdiff_t>(test_count), ids.end());
  m.train_ids.assign(ids.begin(), ids.end() - static_cast<std::ptrdiff_t>(test_count));
  std::sort(m.train_ids.begin(), m.train_ids.end());
  std::sort(m.test_ids.begin(), m.test_ids.end());
  return m;
}

/// Number of tail frames of an utterance reserved for validation.
inline std::size_t validation_tail(std::size_t frames, double fraction) {
  const auto n = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(frames)));
  return std::min(n, frames > 0 ? frames - 1 : 0);
}

inline std::string format_manifest(const CorpusManifest& m) {
  validate(m);
  std::string out;
  auto emit = [&](std::string_view part, const std::vector<std::string>& ids) {
    for (const auto& id : ids) {
      out += part;
      out += '\t';
      out += id;
      out += '\n';
    }
  };
  emit("train", m.train_ids);
  emit("validation", m.validation_ids);
  emit("test", m.test_ids);
  return out;
}

inline CorpusManifest parse_manifest(const std::string& text, std::filesystem::path root = {}) {
  CorpusManifest m;
  m.root_path = std::move(root);
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab + 1 == line.size())
      throw FormatError("manifest line " + std::to_string(lineno) + ": expected <partition>\\t<id>");
    const auto part = line.substr(0, tab);
    auto id = line.substr(tab + 1);
    if (part == "train") m.train_ids.push_back(std::move(id));
    else if (part == "validation") m.validation_ids.push_back(std::move(id));
    else if (part == "test") m.test_ids.push_back(std::move(id));
    else throw FormatError("manifest line " + std::to_string(lineno) + ": unknown partition '" + part + "'");
  }
  validate(m);
  return m;
}

inline void save_manifest(const CorpusManifest& m, const std::filesystem::path& path) {
  io::write_text(path, format_manifest(m));
}

inline CorpusManifest load_manifest(const std::filesystem::path& path) {
  return parse_manifest(io::read_text(path), path.parent_path());
}

}  // namespace uti
