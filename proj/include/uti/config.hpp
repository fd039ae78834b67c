#pragma once

// Line-oriented experiment configuration: `[section]` headers and
// `key = value` lines; `#` or `;` start a comment.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "uti/acoustic_features.hpp"
#include "uti/binary_io.hpp"
#include "uti/error.hpp"
#include "uti/neural_net.hpp"
#include "uti/synthetic_corpus.hpp"

namespace uti {

struct IniSection {
  std::string name;
  std::string argument;  // "[system 2x1000+ET]" -> name "system", argument "2x1000+ET"
  std::vector<std::pair<std::string, std::string>> entries;
  std::size_t line = 0;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    auto piece = trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (!piece.empty()) out.push_back(std::move(piece));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

inline std::vector<IniSection> parse_ini(const std::string& text) {
  std::vector<IniSection> sections;
  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find_first_of("#;");
    const std::string line = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": unterminated section header");
      const std::string inner = detail::trim(line.substr(1, line.size() - 2));
      IniSection s;
      const auto sp = inner.find_first_of(" \t");
      s.name = inner.substr(0, sp);
      if (sp != std::string::npos) s.argument = detail::trim(inner.substr(sp));
      s.line = lineno;
      sections.push_back(std::move(s));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    if (sections.empty()) throw ConfigError("line " + std::to_string(lineno) + ": entry outside any section");
    sections.back().entries.emplace_back(detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
  return sections;
}

struct CorpusSpec {
  std::filesystem::path path;  // empty: <out>/corpus
  bool generate = false;
  std::uint64_t seed = 1;
  std::size_t utterances = 30;
  std::size_t min_frames = 60;
  std::size_t max_frames = 120;
  std::size_t test_count = 9;
  double noise = 0.5;
};

struct SystemSpec {
  std::string id;
  std::vector<std::size_t> hidden;
  TargetMode target = TargetMode::et;

  /// "2 x 1000 units" style label; mixed widths are listed.
  std::string hidden_label() const {
    bool uniform = std::all_of(hidden.begin(), hidden.end(), [&](auto w) { return w == hidden.front(); });
    if (uniform) return std::to_string(hidden.size()) + " x " + std::to_string(hidden.front()) + " units";
    std::string s;
    for (std::size_t i = 0; i < hidden.size(); ++i) s += (i ? "-" : "") + std::to_string(hidden[i]);
    return s + " units";
  }
  std::string feature_label(std::size_t n_components) const {
    return target == TargetMode::et ? std::to_string(n_components) + " ETs" : "64x64 pixels";
  }
};

struct SweepSpec {
  std::vector<Optimizer> optimizers{Optimizer::rmsprop, Optimizer::adam, Optimizer::sgd};
  std::vector<std::size_t> batch_sizes{128};
  std::vector<std::vector<std::size_t>> widths{{1000, 1000}};
  TargetMode target = TargetMode::et;
};

struct ExperimentConfig {
  CorpusSpec corpus;
  MfccConfig mfcc;
  std::size_t n_components = kEigenTongues;
  std::vector<SystemSpec> systems;
  TrainConfig train;
  double validation_fraction = 0.10;
  std::filesystem::path out_dir = "out";
  std::size_t dump_utterances = 1;
  SweepSpec sweep;

  std::filesystem::path corpus_dir() const { return corpus.path.empty() ? out_dir / "corpus" : corpus.path; }

  const SystemSpec& system(const std::string& id) const {
    for (const auto& s : systems)
      if (s.id == id) return s;
    throw ConfigError("unknown system '" + id + "'");
  }

  void validate() const {
    if (systems.empty()) throw ConfigError("at least one [system <id>] section is required");
    for (std::size_t i = 0; i < systems.size(); ++i) {
      if (systems[i].hidden.empty()) throw ConfigError("system '" + systems[i].id + "' has no hidden layers");
      for (char ch : systems[i].id)
        if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '+' || ch == '-' || ch == '_' || ch == '.'))
          throw ConfigError("system id '" + systems[i].id + "' may only contain letters, digits and + - _ .");
      for (std::size_t j = 0; j < i; ++j)
        if (systems[i].id == systems[j].id) throw ConfigError("duplicate system '" + systems[i].id + "'");
    }
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
      throw ConfigError("validation_fraction must lie in (0, 1)");
    try {
      mfcc.validate();
      train.validate();
    } catch (const ContractError& e) {
      throw ConfigError(e.what());
    }
  }
};

namespace detail {

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  if constexpr (std::is_floating_point_v<T>) {
    std::size_t pos = 0;
    try {
      out = static_cast<T>(std::stod(v, &pos));
    } catch (...) {
      pos = 0;
    }
    if (pos != v.size() || v.empty()) throw ConfigError(key + ": '" + v + "' is not a number");
  } else {
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size()) throw ConfigError(key + ": '" + v + "' is not an integer");
  }
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw ConfigError(key + ": '" + v + "' is not a boolean");
}

inline std::vector<std::size_t> parse_widths(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  for (const auto& p : split(v, ',')) out.push_back(parse_number<std::size_t>(key, p));
  if (out.empty()) throw ConfigError(key + ": empty width list");
  return out;
}

inline TargetMode parse_target(const std::string& key, const std::string& v) {
  if (v == "et") return TargetMode::et;
  if (v == "pixels") return TargetMode::pixels;
  throw ConfigError(key + ": target must be 'et' or 'pixels'");
}

}  // namespace detail

/// Relative paths inside the file resolve against `base_dir`.
inline ExperimentConfig parse_experiment_config(const std::string& text,
                                                const std::filesystem::path& base_dir = {}) {
  using namespace detail;
  ExperimentConfig cfg;
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  };
  bool explicit_train_seed = false;
  for (const auto& sec : parse_ini(text)) {
    auto unknown = [&](const std::string& k) {
      return ConfigError("[" + sec.name + "] unknown key '" + k + "'");
    };
    if (sec.name == "system") {
      if (sec.argument.empty()) throw ConfigError("line " + std::to_string(sec.line) + ": [system] needs an id");
      SystemSpec s;
      s.id = sec.argument;
      for (const auto& [k, v] : sec.entries) {
        if (k == "hidden") s.hidden = parse_widths(k, v);
        else if (k == "target") s.target = parse_target(k, v);
        else throw unknown(k);
      }
      cfg.systems.push_back(std::move(s));
      continue;
    }
    for (const auto& [k, v] : sec.entries) {
      const std::string key = sec.name + "." + k;
      if (sec.name == "corpus") {
        if (k == "path") cfg.corpus.path = resolve(v);
        else if (k == "generate") cfg.corpus.generate = parse_bool(key, v);
        else if (k == "seed") cfg.corpus.seed = parse_number<std::uint64_t>(key, v);
        else if (k == "utterances") cfg.corpus.utterances = parse_number<std::size_t>(key, v);
        else if (k == "min_frames") cfg.corpus.min_frames = parse_number<std::size_t>(key, v);
        else if (k == "max_frames") cfg.corpus.max_frames = parse_number<std::size_t>(key, v);
        else if (k == "test_count") cfg.corpus.test_count = parse_number<std::size_t>(key, v);
        else if (k == "noise") cfg.corpus.noise = parse_number<double>(key, v);
        else throw unknown(k);
      } else if (sec.name == "features") {
        auto& m = cfg.mfcc;
        if (k == "n_mfcc") m.n_mfcc = parse_number<std::size_t>(key, v);
        else if (k == "n_mels") m.n_mels = parse_number<std::size_t>(key, v);
        else if (k == "fft_size") m.fft_size = parse_number<std::size_t>(key, v);
        else if (k == "window_length") m.window_length = parse_number<double>(key, v);
        else if (k == "preemphasis") m.preemphasis = parse_number<double>(key, v);
        else if (k == "mel_fmin") m.mel_fmin = parse_number<double>(key, v);
        else if (k == "mel_fmax") m.mel_fmax = parse_number<double>(key, v);
        else if (k == "floor") m.floor = parse_number<double>(key, v);
        else if (k == "delta_width") m.delta_width = parse_number<std::size_t>(key, v);
        else throw unknown(k);
      } else if (sec.name == "eigentongue") {
        if (k == "n_components") cfg.n_components = parse_number<std::size_t>(key, v);
        else throw unknown(k);
      } else if (sec.name == "train") {
        auto& t = cfg.train;
        if (k == "optimizer") t.optimizer = parse_optimizer(v);
        else if (k == "learning_rate") t.learning_rate = parse_number<double>(key, v);
        else if (k == "batch_size") t.batch_size = parse_number<std::size_t>(key, v);
        else if (k == "max_epochs") t.max_epochs = parse_number<std::size_t>(key, v);
        else if (k == "patience") t.early_stop_patience = parse_number<std::size_t>(key, v);
        else if (k == "seed") {
          t.seed = parse_number<std::uint64_t>(key, v);
          explicit_train_seed = true;
        } else if (k == "validation_fraction") cfg.validation_fraction = parse_number<double>(key, v);
        else throw unknown(k);
      } else if (sec.name == "output") {
        if (k == "dir") cfg.out_dir = resolve(v);
        else if (k == "dump_utterances") cfg.dump_utterances = parse_number<std::size_t>(key, v);
        else throw unknown(k);
      } else if (sec.name == "sweep") {
        auto& s = cfg.sweep;
        if (k == "optimizers") {
          s.optimizers.clear();
          for (const auto& o : split(v, ',')) s.optimizers.push_back(parse_optimizer(o));
        } else if (k == "batch_sizes") {
          s.batch_sizes = parse_widths(key, v);
        } else if (k == "widths") {
          s.widths.clear();
          for (const auto& w : split(v, '|')) s.widths.push_back(parse_widths(key, w));
        } else if (k == "target") {
          s.target = parse_target(key, v);
        } else throw unknown(k);
      } else {
        throw ConfigError("line " + std::to_string(sec.line) + ": unknown section [" + sec.name + "]");
      }
    }
  }
  if (!explicit_train_seed) cfg.train.seed = derive_seed(cfg.corpus.seed, 7);
  cfg.validate();
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) throw ConfigError("config file not found: " + path.string());
  return parse_experiment_config(io::read_text(path), path.parent_path());
}

}  // namespace uti
