// Command-line front end for the acoustic-to-tongue-image pipeline.
//
//   uti [--config FILE] [--seed N] [--out DIR] <gen|prepare|fit-et|train|predict|evaluate|sweep|run> ...
//
// Failures print a single "error: <category>: <message>" line to stderr.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "uti/pipeline.hpp"

namespace {

// Used when no --config is given.
constexpr const char* kDefaultConfig = R"(
[system 2x1000+ET]
hidden = 1000,1000
target = et

[system 2x1000+pixels]
hidden = 1000,1000
target = pixels
)";

struct GlobalOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

struct GenOptions {
  std::optional<std::size_t> utterances, min_frames, max_frames;
  std::optional<double> noise;
  std::string corpus_dir;
};

uti::ExperimentConfig load_config(const GlobalOptions& g) {
  uti::ExperimentConfig cfg = g.config.empty() ? uti::parse_experiment_config(kDefaultConfig)
                                               : uti::load_experiment_config(g.config);
  if (!g.out.empty()) cfg.out_dir = g.out;
  if (g.seed) {
    cfg.corpus.seed = *g.seed;
    cfg.train.seed = uti::derive_seed(*g.seed, 7);
  }
  return cfg;
}

std::vector<std::string> selected_systems(const uti::ExperimentConfig& cfg, const std::string& only) {
  if (!only.empty()) {
    cfg.system(only);
    return {only};
  }
  std::vector<std::string> ids;
  for (const auto& s : cfg.systems) ids.push_back(s.id);
  return ids;
}

void print_quality(const uti::EvaluationResult& r) {
  for (auto p : uti::kPairings) {
    const auto& q = r[p];
    std::printf("%-22s %-8s frames=%zu mse=%.2f(%.2f) ssim=%.4f(%.4f) cwssim=%.4f(%.4f)\n", r.system.c_str(),
                std::string(uti::to_string(p)).c_str(), q.frame_count, q.mse.mean, q.mse.std, q.ssim.mean,
                q.ssim.std, q.cwssim.mean, q.cwssim.std);
  }
}

void do_gen(uti::ExperimentConfig cfg, const GenOptions& o) {
  if (o.utterances) cfg.corpus.utterances = *o.utterances;
  if (o.min_frames) cfg.corpus.min_frames = *o.min_frames;
  if (o.max_frames) cfg.corpus.max_frames = *o.max_frames;
  if (o.noise) cfg.corpus.noise = *o.noise;
  if (!o.corpus_dir.empty()) cfg.corpus.path = o.corpus_dir;
  const auto m = uti::run_gen(cfg);
  std::printf("generated %zu train + %zu test utterances in %s\n", m.train_ids.size(), m.test_ids.size(),
              cfg.corpus_dir().string().c_str());
}

void do_prepare(const uti::ExperimentConfig& cfg) {
  const auto r = uti::run_prepare(cfg);
  if (r.skipped)
    std::printf("prepare: up to date (%zu frames)\n", r.total_frames);
  else
    std::printf("prepare: %zu frames, %zu files written\n", r.total_frames, r.files_written);
}

void do_train(const uti::ExperimentConfig& cfg, const std::string& only) {
  for (const auto& id : selected_systems(cfg, only)) {
    const auto o = uti::run_train(cfg, id);
    std::printf("trained %s: epochs=%zu best_epoch=%zu val_loss=%.6g time=%.1fs -> %s\n", id.c_str(),
                o.report.epochs_run, o.report.best_epoch, o.report.validation_loss[o.report.best_epoch],
                o.report.wall_time, o.model_path.string().c_str());
  }
}

void do_predict(const uti::ExperimentConfig& cfg, const std::string& only) {
  for (const auto& id : selected_systems(cfg, only)) {
    const auto frames = uti::run_predict(cfg, id);
    std::printf("predicted %s: %zu frames -> %s\n", id.c_str(), frames,
                uti::Layout{cfg.out_dir}.predictions(id).string().c_str());
  }
}

void do_evaluate(const uti::ExperimentConfig& cfg, const std::string& only) {
  if (!only.empty()) {
    print_quality(uti::run_evaluate(cfg, only));
    return;
  }
  const auto rep = uti::run_evaluate_all(cfg);
  std::fputs(rep.table.c_str(), stdout);
}

void do_sweep(const uti::ExperimentConfig& cfg) {
  const auto cells = uti::run_sweep(cfg);
  std::fputs(uti::io::read_text(uti::Layout{cfg.out_dir}.sweep() / "ranking.txt").c_str(), stdout);
  std::size_t failed = 0;
  for (const auto& c : cells) failed += c.result ? 0 : 1;
  if (failed == cells.size()) throw uti::TrainingError("every sweep cell failed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acoustic-to-ultrasound tongue image inversion"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--config", g.config, "experiment INI file");
  app.add_option("--seed", g.seed, "master seed (corpus generation and training)");
  app.add_option("--out", g.out, "output directory");

  GenOptions gen_opts;
  auto* gen = app.add_subcommand("gen", "generate a synthetic parallel corpus");
  gen->add_option("--utterances", gen_opts.utterances, "number of utterances");
  gen->add_option("--min-frames", gen_opts.min_frames, "minimum frames per utterance");
  gen->add_option("--max-frames", gen_opts.max_frames, "maximum frames per utterance");
  gen->add_option("--noise", gen_opts.noise, "speckle strength in [0, 1]");
  gen->add_option("--corpus-dir", gen_opts.corpus_dir, "corpus directory (default <out>/corpus)");

  auto* prepare = app.add_subcommand("prepare", "extract features, pixel targets, basis and ET targets");
  auto* fit_et = app.add_subcommand("fit-et", "refit the EigenTongue basis from prepared pixels");

  std::string system;
  auto* train = app.add_subcommand("train", "train one or all configured systems");
  auto* predict = app.add_subcommand("predict", "predict test-partition frames");
  auto* evaluate = app.add_subcommand("evaluate", "score systems on the test partition");
  for (auto* sc : {train, predict, evaluate}) sc->add_option("--system", system, "system id (default: all)");
  auto* sweep = app.add_subcommand("sweep", "optimizer x batch size x width sweep");
  auto* run = app.add_subcommand("run", "gen (if needed), prepare, train, evaluate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error: usage: %s\n", e.what());
    return 2;
  }

  try {
    const uti::ExperimentConfig cfg = load_config(g);
    if (*gen) do_gen(cfg, gen_opts);
    else if (*prepare) do_prepare(cfg);
    else if (*fit_et) {
      const auto b = uti::run_fit_et(cfg);
      std::printf("fit-et: %zu components over %zu pixels, leading eigenvalue %.6g\n", b.n_components, b.dim,
                  b.eigenvalues.empty() ? 0.0 : b.eigenvalues.front());
    } else if (*train) do_train(cfg, system);
    else if (*predict) do_predict(cfg, system);
    else if (*evaluate) do_evaluate(cfg, system);
    else if (*sweep) do_sweep(cfg);
    else if (*run) {
      if (cfg.corpus.generate || !std::filesystem::is_regular_file(cfg.corpus_dir() / "manifest.tsv"))
        do_gen(cfg, {});
      do_prepare(cfg);
      do_train(cfg, {});
      do_evaluate(cfg, {});
    }
  } catch (const uti::Error& e) {
    std::fprintf(stderr, "error: %s: %s\n", std::string(uti::category_name(e.category())).c_str(), e.what());
    return 1;
  } catch (const std::bad_alloc&) {
    std::fprintf(stderr, "error: resource: out of memory\n");
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: internal: %s\n", e.what());
    return 1;
  }
  return 0;
}
