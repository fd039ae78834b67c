#pragma once

// Experiment orchestration: corpus generation, feature/target preparation,
// EigenTongue fitting, training, prediction, evaluation and sweeps. Every
// output is a deterministic function of the configuration.

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "uti/acoustic_features.hpp"
#include "uti/binary_io.hpp"
#include "uti/config.hpp"
#include "uti/dataset_io.hpp"
#include "uti/eigentongue.hpp"
#include "uti/error.hpp"
#include "uti/feature_matrix.hpp"
#include "uti/image_ops.hpp"
#include "uti/metrics.hpp"
#include "uti/neural_net.hpp"
#include "uti/synthetic_corpus.hpp"

namespace uti {

namespace fs = std::filesystem;

/// Output directory layout.
struct Layout {
  fs::path root;

  fs::path prepared() const { return root / "prepared"; }
  fs::path features(const std::string& id) const { return prepared() / "features" / (id + ".feat"); }
  fs::path pixels(const std::string& id) const { return prepared() / "pixels" / (id + ".feat"); }
  fs::path et(const std::string& id) const { return prepared() / "et" / (id + ".feat"); }
  fs::path basis() const { return prepared() / "basis.etb"; }
  fs::path basis_ids() const { return prepared() / "basis.ids"; }
  fs::path manifest() const { return prepared() / "manifest.tsv"; }
  fs::path stamp() const { return prepared() / "stamp"; }

  fs::path models() const { return root / "models"; }
  fs::path model(const std::string& sys) const { return models() / (sys + ".mlp"); }
  fs::path train_log(const std::string& sys) const { return models() / (sys + ".log"); }
  fs::path train_ids(const std::string& sys) const { return models() / (sys + ".ids"); }

  fs::path predictions(const std::string& sys) const { return root / "predictions" / sys; }
  fs::path eval() const { return root / "eval"; }
  fs::path eval(const std::string& sys) const { return eval() / sys; }
  fs::path sweep() const { return root / "sweep"; }
};

inline void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw IoError("cannot create directory " + p.string() + ": " + ec.message());
}

inline std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// ---------------------------------------------------------------------------
// gen

inline CorpusManifest run_gen(const ExperimentConfig& cfg) {
  SyntheticParams params;
  params.noise = cfg.corpus.noise;
  if (!(params.noise >= 0.0 && params.noise <= 1.0)) throw ConfigError("corpus.noise must lie in [0, 1]");
  return generate_corpus(cfg.corpus.seed, cfg.corpus.utterances, cfg.corpus.min_frames,
                         cfg.corpus.max_frames, cfg.corpus_dir(), params, cfg.corpus.test_count);
}

inline CorpusManifest load_corpus_manifest(const ExperimentConfig& cfg) {
  const fs::path path = cfg.corpus_dir() / "manifest.tsv";
  if (!fs::is_regular_file(path))
    throw ConfigError("no corpus manifest at " + path.string() + " (run `uti gen` first)");
  auto m = load_manifest(path);
  m.validation_fraction = cfg.validation_fraction;
  return m;
}

/// Utterances allowed to shape the basis, scalers and weights.
inline std::vector<std::string> training_partition(const CorpusManifest& m) {
  std::vector<std::string> ids = m.train_ids;
  ids.insert(ids.end(), m.validation_ids.begin(), m.validation_ids.end());
  return ids;
}

inline std::vector<std::string> all_ids(const CorpusManifest& m) {
  auto ids = training_partition(m);
  ids.insert(ids.end(), m.test_ids.begin(), m.test_ids.end());
  return ids;
}

// ---------------------------------------------------------------------------
// prepare / fit-et

/// Raw 64x842 frames resized to 64x64, one vectorized frame per row.
inline FeatureMatrix pixel_targets(const ParallelUtterance& u) {
  FeatureMatrix m;
  m.cols = kFramePixels;
  m.values.reserve(u.frame_count() * kFramePixels);
  for (std::size_t i = 0; i < u.frame_count(); ++i) {
    const Frame f = bicubic_resize(u.ultrasound.frame(i), u.ultrasound.height, u.ultrasound.width);
    m.append_row(f.pixels);
  }
  return m;
}

struct PrepareResult {
  bool skipped = false;
  std::size_t files_written = 0;
  std::size_t total_frames = 0;
};

namespace detail {

inline std::string describe_mfcc(const MfccConfig& c) {
  std::string s;
  for (double v : {double(c.n_mfcc), double(c.n_mels), double(c.fft_size), c.window_length, c.preemphasis,
                   c.mel_fmin, c.mel_fmax, c.floor, double(c.sample_rate), double(c.delta_width)})
    s += format_metric_value(v) + ';';
  return s;
}

inline std::uint64_t prepare_stamp(const ExperimentConfig& cfg, const CorpusManifest& m) {
  io::Fnv1a h;
  h.update(format_manifest(m));
  h.update(describe_mfcc(cfg.mfcc));
  h.update(std::to_string(cfg.n_components));
  for (const auto& id : all_ids(m)) {
    h.update(io::read_file(utr_path(cfg.corpus_dir() / id)));
    auto wav = utr_path(cfg.corpus_dir() / id);
    wav.replace_extension(".wav");
    h.update(io::read_file(wav));
  }
  return h.digest();
}

inline std::size_t write_if_changed(const fs::path& p, const io::Bytes& b) {
  return io::write_file_if_changed(p, b) ? 1 : 0;
}

inline std::string ids_listing(std::string_view part, const std::vector<std::string>& ids) {
  std::string s;
  for (const auto& id : ids) s += std::string(part) + '\t' + id + '\n';
  return s;
}

}  // namespace detail

/// Fits the EigenTongue basis on training-partition pixel targets and writes
/// basis.etb plus the list of utterances it saw.
inline EigenTongueBasis fit_et_from(const ExperimentConfig& cfg, const CorpusManifest& m,
                                    const std::map<std::string, FeatureMatrix>& pixels,
                                    std::size_t* files_written = nullptr) {
  const Layout lay{cfg.out_dir};
  FeatureMatrix pooled;
  pooled.cols = kFramePixels;
  const auto ids = training_partition(m);
  for (const auto& id : ids) {
    const auto& px = pixels.at(id);
    pooled.values.insert(pooled.values.end(), px.values.begin(), px.values.end());
    pooled.rows += px.rows;
  }
  EigenTongueBasis basis = fit_basis(pooled, cfg.n_components);
  ensure_dir(lay.prepared());
  std::size_t n = detail::write_if_changed(lay.basis(), encode_basis(basis));
  n += io::write_text_if_changed(lay.basis_ids(), detail::ids_listing("fit", ids)) ? 1 : 0;
  if (files_written) *files_written += n;
  return basis;
}

/// `fit-et`: refits the basis from prepared pixel targets and re-projects the
/// ET targets of every utterance.
inline EigenTongueBasis run_fit_et(const ExperimentConfig& cfg) {
  const Layout lay{cfg.out_dir};
  const auto m = load_corpus_manifest(cfg);
  std::map<std::string, FeatureMatrix> pixels;
  for (const auto& id : all_ids(m)) {
    if (!fs::is_regular_file(lay.pixels(id)))
      throw ConfigError("missing prepared pixels for '" + id + "' (run `uti prepare` first)");
    pixels[id] = load_feature_matrix(lay.pixels(id));
  }
  EigenTongueBasis basis = fit_et_from(cfg, m, pixels);
  ensure_dir(lay.prepared() / "et");
  for (const auto& [id, px] : pixels) io::write_file_if_changed(lay.et(id), encode_feature_matrix(project_rows(px, basis)));
  return basis;
}

/// Writes per-utterance raw MFCC+delta features, 4096-pixel targets and
/// 128-coefficient ET targets, plus the basis. Skips all work when the content
/// stamp of the corpus and configuration is unchanged, and never rewrites a
/// file whose bytes would not change.
inline PrepareResult run_prepare(const ExperimentConfig& cfg) {
  const Layout lay{cfg.out_dir};
  const auto m = load_corpus_manifest(cfg);
  const auto ids = all_ids(m);
  const std::string stamp = hex64(detail::prepare_stamp(cfg, m)) + '\n';

  PrepareResult res;
  bool complete = fs::is_regular_file(lay.stamp()) && fs::is_regular_file(lay.basis()) &&
                  io::read_text(lay.stamp()) == stamp;
  for (const auto& id : ids)
    complete = complete && fs::is_regular_file(lay.features(id)) && fs::is_regular_file(lay.pixels(id)) &&
               fs::is_regular_file(lay.et(id));
  if (complete) {
    res.skipped = true;
    for (const auto& id : ids) res.total_frames += load_feature_matrix(lay.features(id)).rows;
    return res;
  }

  for (const char* sub : {"features", "pixels", "et"}) ensure_dir(lay.prepared() / sub);
  std::map<std::string, FeatureMatrix> pixels;
  for (const auto& id : ids) {
    const ParallelUtterance u = load_utterance(cfg.corpus_dir() / id);
    if (u.id() != id) throw PairingError("file " + id + " holds utterance '" + u.id() + "'");
    const FeatureMatrix feats = to_matrix(extract_utterance_features(u, cfg.mfcc));
    res.files_written += detail::write_if_changed(lay.features(id), encode_feature_matrix(feats));
    res.total_frames += feats.rows;
    pixels[id] = pixel_targets(u);
    res.files_written += detail::write_if_changed(lay.pixels(id), encode_feature_matrix(pixels[id]));
  }
  const EigenTongueBasis basis = fit_et_from(cfg, m, pixels, &res.files_written);
  for (const auto& id : ids)
    res.files_written += detail::write_if_changed(lay.et(id), encode_feature_matrix(project_rows(pixels[id], basis)));
  res.files_written += io::write_text_if_changed(lay.manifest(), format_manifest(m)) ? 1 : 0;
  res.files_written += io::write_text_if_changed(lay.stamp(), stamp) ? 1 : 0;
  return res;
}

// ---------------------------------------------------------------------------
// train

struct TrainingData {
  TrainingSet train;
  TrainingSet validation;
  std::vector<std::string> train_ids;       // utterances contributing training frames
  std::vector<std::string> validation_ids;  // utterances contributing validation frames
};

inline FeatureMatrix load_prepared(const fs::path& p) {
  if (!fs::is_regular_file(p)) throw ConfigError("missing prepared file " + p.string() + " (run `uti prepare` first)");
  return load_feature_matrix(p);
}

/// Frame-level split: the last round(fraction * frames) frames of each
/// training utterance validate. Explicit validation utterances in the
/// manifest are used whole instead.
inline TrainingData collect_training_data(const ExperimentConfig& cfg, const CorpusManifest& m, TargetMode mode) {
  const Layout lay{cfg.out_dir};
  TrainingData d;
  auto target_path = [&](const std::string& id) { return mode == TargetMode::et ? lay.et(id) : lay.pixels(id); };
  auto append = [](TrainingSet& s, const FeatureMatrix& x, const FeatureMatrix& y, std::size_t from, std::size_t to) {
    for (std::size_t r = from; r < to; ++r) {
      s.inputs.append_row(x.row(r));
      s.targets.append_row(y.row(r));
    }
  };
  const bool tail_split = m.validation_ids.empty();
  for (const auto& id : m.train_ids) {
    const auto x = load_prepared(lay.features(id));
    const auto y = load_prepared(target_path(id));
    if (x.rows != y.rows) throw CorruptionError("feature/target frame counts differ for '" + id + "'");
    const std::size_t tail = tail_split ? validation_tail(x.rows, cfg.validation_fraction) : 0;
    append(d.train, x, y, 0, x.rows - tail);
    d.train_ids.push_back(id);
    if (tail > 0) {
      append(d.validation, x, y, x.rows - tail, x.rows);
      d.validation_ids.push_back(id);
    }
  }
  for (const auto& id : m.validation_ids) {
    const auto x = load_prepared(lay.features(id));
    const auto y = load_prepared(target_path(id));
    append(d.validation, x, y, 0, x.rows);
    d.validation_ids.push_back(id);
  }
  if (d.train.inputs.rows == 0 || d.validation.inputs.rows == 0)
    throw SizeError("not enough training frames for a train/validation split");
  return d;
}

inline std::uint64_t system_seed(std::uint64_t base, std::string_view key) {
  io::Fnv1a h;
  h.update(key);
  return derive_seed(base, h.digest());
}

inline MlpSpec system_mlp_spec(const ExperimentConfig& cfg, const std::vector<std::size_t>& hidden, TargetMode mode) {
  MlpSpec s;
  s.input_dim = cfg.mfcc.feature_dim();
  s.hidden_layers = hidden;
  s.output_dim = mode == TargetMode::et ? cfg.n_components : kFramePixels;
  return s;
}

/// Seeds model initialization and shuffling from the training seed and `key`.
inline TrainResult train_system(const TrainingData& data, const MlpSpec& spec, TargetMode mode, TrainConfig tc,
                                std::string_view key) {
  const std::uint64_t seed = system_seed(tc.seed, key);
  MlpModel model = init_model(spec, derive_seed(seed, 0));
  model.mode = mode;
  fit_scalers(model, data.train);
  tc.seed = derive_seed(seed, 1);
  return train(std::move(model), data.train, data.validation, tc);
}

inline std::string format_train_log(const TrainReport& r) {
  std::string s = "epoch,train_loss,validation_loss\n";
  for (std::size_t e = 0; e < r.train_loss.size(); ++e)
    s += std::to_string(e) + ',' + format_metric_value(r.train_loss[e]) + ',' +
         format_metric_value(r.validation_loss[e]) + '\n';
  s += "best_epoch," + std::to_string(r.best_epoch) + '\n';
  return s;
}

struct TrainOutcome {
  std::string system;
  TrainReport report;
  fs::path model_path;
};

inline TrainOutcome run_train(const ExperimentConfig& cfg, const std::string& system_id) {
  const SystemSpec& sys = cfg.system(system_id);
  const Layout lay{cfg.out_dir};
  const auto m = load_corpus_manifest(cfg);
  const TrainingData data = collect_training_data(cfg, m, sys.target);
  TrainResult res;
  try {
    res = train_system(data, system_mlp_spec(cfg, sys.hidden, sys.target), sys.target, cfg.train, sys.id);
  } catch (const TrainingError& e) {
    throw TrainingError("system '" + sys.id + "': " + e.what());
  }
  ensure_dir(lay.models());
  save_model(res.model, lay.model(sys.id));
  io::write_text(lay.train_log(sys.id), format_train_log(res.report));
  io::write_text(lay.train_ids(sys.id),
                 detail::ids_listing("train", data.train_ids) + detail::ids_listing("validation", data.validation_ids));
  return {sys.id, std::move(res.report), lay.model(sys.id)};
}

// ---------------------------------------------------------------------------
// predict / evaluate

/// Maps raw feature rows of one utterance to predicted raw255 pixel rows.
using Predictor = std::function<FeatureMatrix(const std::string& id, const FeatureMatrix& features)>;

inline EigenTongueBasis load_prepared_basis(const ExperimentConfig& cfg) {
  const Layout lay{cfg.out_dir};
  if (!fs::is_regular_file(lay.basis())) throw ConfigError("missing " + lay.basis().string() + " (run `uti prepare` first)");
  return load_basis(lay.basis());
}

inline Predictor model_predictor(const ExperimentConfig& cfg, const std::string& system_id,
                                 const EigenTongueBasis& basis) {
  const Layout lay{cfg.out_dir};
  cfg.system(system_id);
  if (!fs::is_regular_file(lay.model(system_id)))
    throw ConfigError("missing model " + lay.model(system_id).string() + " (run `uti train` first)");
  auto model = std::make_shared<MlpModel>(load_model(lay.model(system_id)));
  const EigenTongueBasis* b = model->mode == TargetMode::et ? &basis : nullptr;
  return [model, b](const std::string&, const FeatureMatrix& x) { return predict_pixels(*model, x, b); };
}

/// Predicts every frame as the training mean image.
inline Predictor mean_image_predictor(const EigenTongueBasis& basis) {
  std::vector<double> mean = basis.mean;
  for (auto& v : mean) v = std::clamp(v, 0.0, 255.0);
  return [mean](const std::string&, const FeatureMatrix& x) {
    FeatureMatrix out;
    out.cols = kFramePixels;
    for (std::size_t r = 0; r < x.rows; ++r) out.append_row(mean);
    return out;
  };
}

/// Writes predicted pixel rows for every test utterance.
inline std::size_t run_predict(const ExperimentConfig& cfg, const std::string& system_id) {
  const Layout lay{cfg.out_dir};
  const auto m = load_corpus_manifest(cfg);
  const auto basis = load_prepared_basis(cfg);
  const auto predict = model_predictor(cfg, system_id, basis);
  ensure_dir(lay.predictions(system_id));
  std::size_t frames = 0;
  for (const auto& id : m.test_ids) {
    const FeatureMatrix p = predict(id, load_prepared(lay.features(id)));
    save_feature_matrix(p, lay.predictions(system_id) / (id + ".feat"));
    frames += p.rows;
  }
  return frames;
}

struct EvaluationResult {
  std::string system;
  std::array<QualityReport, 3> reports;  // indexed by Pairing
  std::vector<UtteranceCurves> curves;

  const QualityReport& operator[](Pairing p) const { return reports[static_cast<int>(p)]; }
};

inline std::vector<Frame> rows_to_frames(const FeatureMatrix& m) {
  std::vector<Frame> frames;
  frames.reserve(m.rows);
  for (std::size_t r = 0; r < m.rows; ++r) frames.push_back(devectorize(m.row(r)));
  return frames;
}

/// Scores `predict` on the test partition, writes metrics.csv, summary.txt
/// and PGM dumps under eval/<label>/.
inline EvaluationResult evaluate_predictor(const ExperimentConfig& cfg, const std::string& label,
                                           const SystemSpec* sys, const Predictor& predict,
                                           const EigenTongueBasis& basis) {
  const Layout lay{cfg.out_dir};
  const auto m = load_corpus_manifest(cfg);
  if (m.test_ids.empty()) throw ConfigError("the corpus has no test utterances");
  const fs::path dir = lay.eval(label);
  ensure_dir(dir);
  const FrameScorer scorer;
  EvaluationResult res;
  res.system = label;
  std::array<FrameMetricsByUtterance, 3> per_pairing;
  std::string csv = metrics_csv_header();
  for (std::size_t u = 0; u < m.test_ids.size(); ++u) {
    const auto& id = m.test_ids[u];
    const auto originals = rows_to_frames(load_prepared(lay.pixels(id)));
    const auto predicted = rows_to_frames(predict(id, load_prepared(lay.features(id))));
    if (predicted.size() != originals.size()) throw ContractError("prediction length mismatch for '" + id + "'");
    auto curves = utterance_curves(originals, predicted, basis, scorer, id);
    csv += metrics_csv_rows(curves);
    for (Pairing p : kPairings) per_pairing[static_cast<int>(p)].push_back({id, curves[p]});
    if (u < cfg.dump_utterances) {
      const fs::path fdir = dir / "frames" / id;
      ensure_dir(fdir);
      for (std::size_t i = 0; i < originals.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "%04zu", i);
        io::write_file_if_changed(fdir / (std::string(name) + "_orig.pgm"), encode_pgm(originals[i]));
        io::write_file_if_changed(fdir / (std::string(name) + "_pca.pgm"),
                                  encode_pgm(reconstruct(project(originals[i], basis), basis)));
        io::write_file_if_changed(fdir / (std::string(name) + "_pred.pgm"), encode_pgm(predicted[i]));
      }
    }
    res.curves.push_back(std::move(curves));
  }
  for (Pairing p : kPairings) res.reports[static_cast<int>(p)] = aggregate(per_pairing[static_cast<int>(p)], label);

  io::write_text(dir / "metrics.csv", csv);
  std::string summary;
  std::string summary_csv = summary_csv_header();
  for (Pairing p : kPairings) {
    SummaryRow row{sys ? sys->hidden_label() : "mean image", sys ? sys->feature_label(cfg.n_components) : "-",
                   res[p]};
    summary += format_summary_table(std::span(&row, 1), std::string("Pairing ") + std::string(to_string(p))) + '\n';
    summary_csv += summary_csv_row(row, p);
  }
  io::write_text(dir / "summary.txt", summary);
  io::write_text(dir / "summary.csv", summary_csv);
  return res;
}

inline EvaluationResult run_evaluate(const ExperimentConfig& cfg, const std::string& system_id) {
  const auto basis = load_prepared_basis(cfg);
  return evaluate_predictor(cfg, system_id, &cfg.system(system_id), model_predictor(cfg, system_id, basis), basis);
}

inline EvaluationResult run_evaluate_baseline(const ExperimentConfig& cfg) {
  const auto basis = load_prepared_basis(cfg);
  return evaluate_predictor(cfg, "baseline", nullptr, mean_image_predictor(basis), basis);
}

struct ComparisonReport {
  std::vector<EvaluationResult> systems;  // config order
  EvaluationResult baseline;
  std::string table;                      // one block per pairing
};

/// Evaluates every configured system plus the mean-image baseline and writes
/// eval/summary.txt (system comparison table per pairing) and eval/summary.csv.
inline ComparisonReport run_evaluate_all(const ExperimentConfig& cfg) {
  const Layout lay{cfg.out_dir};
  ComparisonReport rep;
  for (const auto& s : cfg.systems) rep.systems.push_back(run_evaluate(cfg, s.id));
  rep.baseline = run_evaluate_baseline(cfg);
  std::string csv = summary_csv_header();
  for (Pairing p : kPairings) {
    std::vector<SummaryRow> rows;
    for (std::size_t i = 0; i < cfg.systems.size(); ++i) {
      const auto& s = cfg.systems[i];
      rows.push_back({s.hidden_label(), s.feature_label(cfg.n_components), rep.systems[i][p]});
      csv += summary_csv_row(rows.back(), p);
    }
    SummaryRow base{"mean image", "-", rep.baseline[p]};
    csv += summary_csv_row(base, p);
    rep.table += format_summary_table(rows, std::string("Pairing ") + std::string(to_string(p))) + '\n';
  }
  SummaryRow base_o{"mean image", "-", rep.baseline[Pairing::o_rec]};
  rep.table += format_summary_table(std::span(&base_o, 1), "Baseline (mean image), pairing O_rec");
  ensure_dir(lay.eval());
  io::write_text(lay.eval() / "summary.txt", rep.table);
  io::write_text(lay.eval() / "summary.csv", csv);
  return rep;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepCell {
  Optimizer optimizer = Optimizer::adam;
  std::size_t batch_size = 0;
  std::vector<std::size_t> widths;
  std::uint64_t seed = 0;
  std::optional<EvaluationResult> result;
  std::string error;

  std::string key() const {
    std::string k = std::string(to_string(optimizer)) + "_b" + std::to_string(batch_size) + "_h";
    for (std::size_t i = 0; i < widths.size(); ++i) k += (i ? "x" : "") + std::to_string(widths[i]);
    return k;
  }
};

/// Trains and evaluates every optimizer x batch size x widths cell. Each
/// cell's seed derives from its configuration, so identical cells reproduce
/// identical reports. Failures are recorded per cell. Cells are ranked by
/// descending O_rec CW-SSIM mean; failed cells sort last.
inline std::vector<SweepCell> run_sweep(const ExperimentConfig& cfg) {
  const Layout lay{cfg.out_dir};
  const auto m = load_corpus_manifest(cfg);
  const auto basis = load_prepared_basis(cfg);
  const TargetMode mode = cfg.sweep.target;
  const TrainingData data = collect_training_data(cfg, m, mode);
  std::vector<SweepCell> cells;
  for (auto opt : cfg.sweep.optimizers)
    for (auto batch : cfg.sweep.batch_sizes)
      for (const auto& widths : cfg.sweep.widths) {
        SweepCell c;
        c.optimizer = opt;
        c.batch_size = batch;
        c.widths = widths;
        cells.push_back(std::move(c));
      }
  SystemSpec sys;
  sys.target = mode;
  for (auto& c : cells) {
    c.seed = system_seed(cfg.train.seed, c.key());
    try {
      TrainConfig tc = cfg.train;
      tc.optimizer = c.optimizer;
      tc.batch_size = c.batch_size;
      auto res = train_system(data, system_mlp_spec(cfg, c.widths, mode), mode, tc, c.key());
      sys.id = c.key();
      sys.hidden = c.widths;
      const EigenTongueBasis* b = mode == TargetMode::et ? &basis : nullptr;
      auto model = std::make_shared<MlpModel>(std::move(res.model));
      Predictor p = [model, b](const std::string&, const FeatureMatrix& x) { return predict_pixels(*model, x, b); };
      ExperimentConfig cell_cfg = cfg;
      cell_cfg.dump_utterances = 0;
      c.result = evaluate_predictor(cell_cfg, "sweep_" + c.key(), &sys, p, basis);
      c.result->curves.clear();
    } catch (const Error& e) {
      c.error = std::string(category_name(e.category())) + ": " + e.what();
    }
  }
  std::stable_sort(cells.begin(), cells.end(), [](const SweepCell& a, const SweepCell& b) {
    if (a.result.has_value() != b.result.has_value()) return a.result.has_value();
    if (!a.result) return false;
    return (*a.result)[Pairing::o_rec].cwssim.mean > (*b.result)[Pairing::o_rec].cwssim.mean;
  });

  std::string txt = "rank  cell                          CW-SSIM(O_rec)  SSIM(O_rec)     MSE(O_rec)\n";
  std::string csv = "rank,cell,optimizer,batch_size,hidden,seed,status,cwssim_mean,cwssim_std,ssim_mean,ssim_std,mse_mean,mse_std\n";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    std::string hidden;
    for (std::size_t k = 0; k < c.widths.size(); ++k) hidden += (k ? "x" : "") + std::to_string(c.widths[k]);
    csv += std::to_string(i + 1) + ',' + c.key() + ',' + std::string(to_string(c.optimizer)) + ',' +
           std::to_string(c.batch_size) + ',' + hidden + ',' + std::to_string(c.seed) + ',';
    char line[256];
    if (c.result) {
      const auto& q = (*c.result)[Pairing::o_rec];
      csv += "ok";
      for (double v : {q.cwssim.mean, q.cwssim.std, q.ssim.mean, q.ssim.std, q.mse.mean, q.mse.std})
        csv += ',' + format_metric_value(v);
      std::snprintf(line, sizeof line, "%-5zu %-29s %14.4f %12.4f %14.2f\n", i + 1, c.key().c_str(), q.cwssim.mean,
                    q.ssim.mean, q.mse.mean);
    } else {
      csv += "failed,,,,,,";
      std::snprintf(line, sizeof line, "%-5zu %-29s failed (%s)\n", i + 1, c.key().c_str(), c.error.c_str());
    }
    csv += '\n';
    txt += line;
  }
  ensure_dir(lay.sweep());
  io::write_text(lay.sweep() / "ranking.txt", txt);
  io::write_text(lay.sweep() / "ranking.csv", csv);
  return cells;
}

}  // namespace uti
