#pragma once

// Fully connected ReLU regression networks trained with minibatch
// backpropagation under a mean-squared-error criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "uti/acoustic_features.hpp"
#include "uti/binary_io.hpp"
#include "uti/eigentongue.hpp"
#include "uti/error.hpp"
#include "uti/feature_matrix.hpp"
#include "uti/image_ops.hpp"
#include "uti/random.hpp"

namespace uti {

enum class TargetMode : std::uint8_t { pixels = 0, et = 1 };

inline std::string_view to_string(TargetMode m) { return m == TargetMode::et ? "et" : "pixels"; }

struct MlpSpec {
  std::size_t input_dim = 50;
  std::vector<std::size_t> hidden_layers{1000, 1000};
  std::size_t output_dim = kEigenTongues;

  void validate() const {
    if (input_dim < 1 || output_dim < 1) throw ContractError("layer widths must be >= 1");
    if (hidden_layers.empty()) throw ContractError("at least one hidden layer is required");
    for (auto w : hidden_layers)
      if (w < 1) throw ContractError("hidden widths must be >= 1");
  }

  bool operator==(const MlpSpec&) const = default;
};

/// Per-dimension standardization z = (x - mean) / std.
struct Scaler {
  std::vector<double> mean;
  std::vector<double> std;

  static Scaler identity(std::size_t n) { return {std::vector<double>(n, 0.0), std::vector<double>(n, 1.0)}; }

  /// Population statistics; dimensions without spread keep std = 1.
  static Scaler fit(const FeatureMatrix& m) {
    if (m.rows == 0) throw ContractError("cannot fit a scaler on zero rows");
    Scaler s{std::vector<double>(m.cols, 0.0), std::vector<double>(m.cols, 0.0)};
    for (std::size_t r = 0; r < m.rows; ++r)
      for (std::size_t c = 0; c < m.cols; ++c) s.mean[c] += m.values[r * m.cols + c];
    for (auto& v : s.mean) v /= static_cast<double>(m.rows);
    for (std::size_t r = 0; r < m.rows; ++r)
      for (std::size_t c = 0; c < m.cols; ++c) {
        const double d = m.values[r * m.cols + c] - s.mean[c];
        s.std[c] += d * d;
      }
    for (auto& v : s.std) {
      v = std::sqrt(v / static_cast<double>(m.rows));
      if (!(v > 1e-12)) v = 1.0;
    }
    return s;
  }

  std::size_t size() const { return mean.size(); }

  void apply(std::span<double> x) const {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = (x[i] - mean[i]) / std[i];
  }
  void invert(std::span<double> z) const {
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = z[i] * std[i] + mean[i];
  }

  bool operator==(const Scaler&) const = default;
};

struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd biases;   // out

  bool operator==(const DenseLayer& o) const { return weights == o.weights && biases == o.biases; }
};

/// Hidden layers use ReLU, the output layer is linear. Scalers are applied
/// inside forward(): callers pass raw features and receive raw targets.
struct MlpModel {
  MlpSpec spec;
  std::vector<DenseLayer> layers;
  Scaler input_scaler;
  Scaler target_scaler;
  TargetMode mode = TargetMode::et;

  bool operator==(const MlpModel&) const = default;
};

enum class Optimizer : std::uint8_t { sgd, rmsprop, adam };

inline std::string_view to_string(Optimizer o) {
  switch (o) {
    case Optimizer::sgd: return "sgd";
    case Optimizer::rmsprop: return "rmsprop";
    case Optimizer::adam: return "adam";
  }
  return "?";
}

inline Optimizer parse_optimizer(std::string_view s) {
  if (s == "sgd") return Optimizer::sgd;
  if (s == "rmsprop") return Optimizer::rmsprop;
  if (s == "adam") return Optimizer::adam;
  throw ConfigError("unknown optimizer '" + std::string(s) + "'");
}

struct TrainConfig {
  Optimizer optimizer = Optimizer::adam;
  double learning_rate = 1e-3;
  std::size_t batch_size = 128;
  std::size_t max_epochs = 100;
  std::size_t early_stop_patience = 5;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(learning_rate > 0.0)) throw ContractError("learning rate must be positive");
    if (batch_size < 1) throw ContractError("batch size must be >= 1");
    if (early_stop_patience < 1) throw ContractError("patience must be >= 1");
  }
};

/// Losses are recorded per epoch; index 0 holds the losses before any update.
struct TrainReport {
  std::vector<double> train_loss;
  std::vector<double> validation_loss;
  std::size_t best_epoch = 0;
  std::size_t epochs_run = 0;
  double wall_time = 0.0;
};

/// Raw inputs and raw targets, one sample per row.
struct TrainingSet {
  FeatureMatrix inputs;
  FeatureMatrix targets;
};

struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

struct LossAndGradient {
  double loss = 0.0;
  Gradients gradients;
};

// ---------------------------------------------------------------------------

/// He-uniform weights in +-sqrt(6 / fan_in), zero biases, identity scalers.
inline MlpModel init_model(const MlpSpec& spec, std::uint64_t seed) {
  spec.validate();
  MlpModel m;
  m.spec = spec;
  m.mode = spec.output_dim == kFramePixels ? TargetMode::pixels : TargetMode::et;
  m.input_scaler = Scaler::identity(spec.input_dim);
  m.target_scaler = Scaler::identity(spec.output_dim);
  Rng rng(seed);
  std::size_t fan_in = spec.input_dim;
  auto widths = spec.hidden_layers;
  widths.push_back(spec.output_dim);
  for (std::size_t out : widths) {
    DenseLayer layer;
    layer.weights.resize(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(fan_in));
    layer.biases = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(out));
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c)
        layer.weights(r, c) = rng.uniform(-bound, bound);
    m.layers.push_back(std::move(layer));
    fan_in = out;
  }
  return m;
}

inline void check_model(const MlpModel& m) {
  if (m.layers.size() != m.spec.hidden_layers.size() + 1)
    throw SizeError("layer count does not match the spec");
  std::size_t in = m.spec.input_dim;
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    const std::size_t out = l + 1 < m.layers.size() ? m.spec.hidden_layers[l] : m.spec.output_dim;
    const auto& L = m.layers[l];
    if (static_cast<std::size_t>(L.weights.rows()) != out ||
        static_cast<std::size_t>(L.weights.cols()) != in ||
        static_cast<std::size_t>(L.biases.size()) != out)
      throw SizeError("layer " + std::to_string(l) + " shape does not chain");
    if (!L.weights.allFinite() || !L.biases.allFinite())
      throw NumericError("non-finite parameter in layer " + std::to_string(l));
    in = out;
  }
  if (m.input_scaler.size() != m.spec.input_dim || m.target_scaler.size() != m.spec.output_dim)
    throw SizeError("scaler dimensions do not match the spec");
}

/// Network output for standardized inputs (one sample per column).
inline Eigen::MatrixXd forward_standardized(const MlpModel& m, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd h = x;
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    Eigen::MatrixXd z = m.layers[l].weights * h;
    z.colwise() += m.layers[l].biases;
    if (l + 1 < m.layers.size()) z = z.cwiseMax(0.0);
    h = std::move(z);
  }
  return h;
}

inline std::vector<double> forward(const MlpModel& m, std::span<const double> x) {
  if (x.size() != m.spec.input_dim)
    throw SizeError("input has " + std::to_string(x.size()) + " values, model expects " +
                    std::to_string(m.spec.input_dim));
  for (double v : x)
    if (!std::isfinite(v)) throw InputError("non-finite network input");
  Eigen::VectorXd in(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) in(static_cast<Eigen::Index>(i)) = x[i];
  m.input_scaler.apply(std::span(in.data(), x.size()));
  Eigen::MatrixXd y = forward_standardized(m, in);
  std::vector<double> out(y.data(), y.data() + y.size());
  m.target_scaler.invert(out);
  return out;
}

/// Batch forward on raw rows; returns raw outputs, one row per sample.
inline FeatureMatrix forward_rows(const MlpModel& m, const FeatureMatrix& inputs) {
  if (inputs.cols != m.spec.input_dim) throw SizeError("input width does not match the model");
  for (double v : inputs.values)
    if (!std::isfinite(v)) throw InputError("non-finite network input");
  Eigen::MatrixXd x(static_cast<Eigen::Index>(inputs.cols), static_cast<Eigen::Index>(inputs.rows));
  for (std::size_t r = 0; r < inputs.rows; ++r)
    for (std::size_t c = 0; c < inputs.cols; ++c)
      x(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r)) =
          (inputs.values[r * inputs.cols + c] - m.input_scaler.mean[c]) / m.input_scaler.std[c];
  const Eigen::MatrixXd y = forward_standardized(m, x);
  FeatureMatrix out(inputs.rows, m.spec.output_dim);
  for (std::size_t r = 0; r < out.rows; ++r)
    for (std::size_t c = 0; c < out.cols; ++c)
      out.values[r * out.cols + c] =
          y(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r)) * m.target_scaler.std[c] +
          m.target_scaler.mean[c];
  return out;
}

/// Mean squared error over samples and output dimensions, in standardized
/// space, with gradients by backpropagation. Columns are samples. The ReLU
/// derivative at exactly zero is taken as zero.
inline LossAndGradient loss_and_gradient(const MlpModel& m, const Eigen::MatrixXd& x,
                                         const Eigen::MatrixXd& y) {
  if (x.cols() == 0) throw ContractError("empty batch");
  if (x.cols() != y.cols() || static_cast<std::size_t>(x.rows()) != m.spec.input_dim ||
      static_cast<std::size_t>(y.rows()) != m.spec.output_dim)
    throw SizeError("batch shape does not match the model");
  if (!x.allFinite() || !y.allFinite()) throw NumericError("non-finite batch values");

  const std::size_t n_layers = m.layers.size();
  std::vector<Eigen::MatrixXd> acts;  // input to each layer
  acts.reserve(n_layers + 1);
  acts.push_back(x);
  for (std::size_t l = 0; l < n_layers; ++l) {
    Eigen::MatrixXd z = m.layers[l].weights * acts.back();
    z.colwise() += m.layers[l].biases;
    if (l + 1 < n_layers) z = z.cwiseMax(0.0);
    acts.push_back(std::move(z));
  }
  const Eigen::MatrixXd diff = acts.back() - y;
  const double count = static_cast<double>(diff.size());
  LossAndGradient out;
  out.loss = diff.squaredNorm() / count;
  if (!std::isfinite(out.loss)) throw NumericError("non-finite loss");

  out.gradients.weights.resize(n_layers);
  out.gradients.biases.resize(n_layers);
  Eigen::MatrixXd delta = (2.0 / count) * diff;
  for (std::size_t l = n_layers; l-- > 0;) {
    out.gradients.weights[l].noalias() = delta * acts[l].transpose();
    out.gradients.biases[l] = delta.rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd back = m.layers[l].weights.transpose() * delta;
      delta = back.cwiseProduct((acts[l].array() > 0.0).cast<double>().matrix());
    }
  }
  return out;
}

namespace detail {

inline Eigen::MatrixXd standardized_columns(const FeatureMatrix& rows, const Scaler& s) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.cols), static_cast<Eigen::Index>(rows.rows));
  for (std::size_t r = 0; r < rows.rows; ++r)
    for (std::size_t c = 0; c < rows.cols; ++c)
      out(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r)) =
          (rows.values[r * rows.cols + c] - s.mean[c]) / s.std[c];
  return out;
}

inline double dataset_loss(const MlpModel& m, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  constexpr Eigen::Index chunk = 1024;
  double sum = 0.0;
  for (Eigen::Index s = 0; s < x.cols(); s += chunk) {
    const Eigen::Index n = std::min(chunk, x.cols() - s);
    sum += (forward_standardized(m, x.middleCols(s, n)) - y.middleCols(s, n)).squaredNorm();
  }
  return sum / static_cast<double>(y.size());
}

class OptimizerState {
 public:
  OptimizerState(const MlpModel& m, const TrainConfig& cfg) : cfg_(cfg) {
    for (const auto& L : m.layers) {
      m1w_.push_back(Eigen::MatrixXd::Zero(L.weights.rows(), L.weights.cols()));
      m1b_.push_back(Eigen::VectorXd::Zero(L.biases.size()));
    }
    m2w_ = m1w_;
    m2b_ = m1b_;
  }

  void step(MlpModel& m, const Gradients& g) {
    ++t_;
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
      update(m.layers[l].weights, g.weights[l], m1w_[l], m2w_[l]);
      update(m.layers[l].biases, g.biases[l], m1b_[l], m2b_[l]);
    }
  }

 private:
  template <class P, class G>
  void update(P& param, const G& grad, P& m1, P& m2) {
    const double lr = cfg_.learning_rate;
    constexpr double eps = 1e-8;
    switch (cfg_.optimizer) {
      case Optimizer::sgd:
        param -= lr * grad;
        break;
      case Optimizer::rmsprop:
        m2 = 0.9 * m2 + 0.1 * grad.cwiseProduct(grad);
        param.array() -= lr * grad.array() / (m2.array().sqrt() + eps);
        break;
      case Optimizer::adam: {
        constexpr double b1 = 0.9, b2 = 0.999;
        m1 = b1 * m1 + (1.0 - b1) * grad;
        m2 = b2 * m2 + (1.0 - b2) * grad.cwiseProduct(grad);
        const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
        param.array() -= lr * (m1.array() / c1) / ((m2.array() / c2).sqrt() + eps);
        break;
      }
    }
  }

  TrainConfig cfg_;
  std::vector<Eigen::MatrixXd> m1w_, m2w_;
  std::vector<Eigen::VectorXd> m1b_, m2b_;
  std::uint64_t t_ = 0;
};

}  // namespace detail

/// Tracks the best validation loss and signals when `patience` consecutive
/// epochs fail to improve on it.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {}

  /// Returns true if `loss` is a new best.
  bool observe(std::size_t epoch, double loss) {
    if (epoch == 0 || loss < best_) {
      best_ = loss;
      best_epoch_ = epoch;
      stale_ = 0;
      return true;
    }
    ++stale_;
    return false;
  }

  bool should_stop() const { return stale_ >= patience_; }
  std::size_t best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_; }

 private:
  std::size_t patience_;
  double best_ = 0.0;
  std::size_t best_epoch_ = 0;
  std::size_t stale_ = 0;
};

/// Sets the model's scalers from training data.
inline void fit_scalers(MlpModel& m, const TrainingSet& train) {
  if (train.inputs.cols != m.spec.input_dim || train.targets.cols != m.spec.output_dim)
    throw SizeError("training data width does not match the model");
  m.input_scaler = Scaler::fit(train.inputs);
  m.target_scaler = Scaler::fit(train.targets);
}

struct TrainResult {
  MlpModel model;
  TrainReport report;
};

/// Minibatch training with per-epoch seeded shuffling and early stopping on
/// validation loss. Data is standardized with the model's current scalers
/// (see fit_scalers). Returns the parameters of the best validation epoch.
inline TrainResult train(MlpModel model, const TrainingSet& train_set,
                         const TrainingSet& validation_set, const TrainConfig& cfg) {
  cfg.validate();
  check_model(model);
  if (train_set.inputs.rows == 0 || validation_set.inputs.rows == 0)
    throw ContractError("training and validation sets must be non-empty");
  if (train_set.inputs.rows != train_set.targets.rows ||
      validation_set.inputs.rows != validation_set.targets.rows)
    throw SizeError("input and target row counts differ");
  const auto started = std::chrono::steady_clock::now();

  const Eigen::MatrixXd tx = detail::standardized_columns(train_set.inputs, model.input_scaler);
  const Eigen::MatrixXd ty = detail::standardized_columns(train_set.targets, model.target_scaler);
  const Eigen::MatrixXd vx = detail::standardized_columns(validation_set.inputs, model.input_scaler);
  const Eigen::MatrixXd vy = detail::standardized_columns(validation_set.targets, model.target_scaler);
  if (!tx.allFinite() || !ty.allFinite() || !vx.allFinite() || !vy.allFinite())
    throw InputError("non-finite training data");

  TrainReport report;
  EarlyStopping stopper(cfg.early_stop_patience);
  MlpModel best = model;
  detail::OptimizerState opt(model, cfg);
  Rng rng(cfg.seed);
  const std::size_t n = train_set.inputs.rows;
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  auto record = [&](std::size_t epoch) {
    const double tl = detail::dataset_loss(model, tx, ty);
    const double vl = detail::dataset_loss(model, vx, vy);
    if (!std::isfinite(tl) || !std::isfinite(vl))
      throw TrainingError("training diverged at epoch " + std::to_string(epoch) +
                          " (non-finite loss)");
    report.train_loss.push_back(tl);
    report.validation_loss.push_back(vl);
    if (stopper.observe(epoch, vl)) best = model;
  };

  record(0);
  Eigen::MatrixXd bx, by;
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    rng.shuffle(std::span(order));
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t count = std::min(cfg.batch_size, n - start);
      bx.resize(tx.rows(), static_cast<Eigen::Index>(count));
      by.resize(ty.rows(), static_cast<Eigen::Index>(count));
      for (std::size_t k = 0; k < count; ++k) {
        bx.col(static_cast<Eigen::Index>(k)) = tx.col(order[start + k]);
        by.col(static_cast<Eigen::Index>(k)) = ty.col(order[start + k]);
      }
      LossAndGradient lg;
      try {
        lg = loss_and_gradient(model, bx, by);
      } catch (const NumericError& e) {
        throw TrainingError("training diverged at epoch " + std::to_string(epoch) + ": " + e.what());
      }
      opt.step(model, lg.gradients);
    }
    report.epochs_run = epoch;
    record(epoch);
    if (stopper.should_stop()) break;
  }
  report.best_epoch = stopper.best_epoch();
  report.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return {std::move(best), std::move(report)};
}

namespace detail {

inline void check_prediction_mode(const MlpModel& m, const EigenTongueBasis* basis) {
  if (m.mode == TargetMode::et) {
    if (basis == nullptr) throw ContractError("ET-mode model needs an eigentongue basis");
    if (basis->n_components != m.spec.output_dim)
      throw ContractError("model predicts " + std::to_string(m.spec.output_dim) +
                          " coefficients but the basis has " + std::to_string(basis->n_components));
    if (basis->dim != kFramePixels) throw ContractError("basis does not describe 64x64 frames");
  } else {
    if (basis != nullptr) throw ContractError("pixel-mode model takes no eigentongue basis");
    if (m.spec.output_dim != kFramePixels)
      throw ContractError("pixel-mode model must output 4096 values");
  }
}

}  // namespace detail

/// Predicted raw255 pixel rows (4096 wide, clamped) for raw feature rows.
inline FeatureMatrix predict_pixels(const MlpModel& m, const FeatureMatrix& features,
                                    const EigenTongueBasis* basis = nullptr) {
  detail::check_prediction_mode(m, basis);
  FeatureMatrix out = forward_rows(m, features);
  if (m.mode == TargetMode::et) return reconstruct_rows(out, *basis);
  for (auto& v : out.values) v = std::clamp(v, 0.0, 255.0);
  return out;
}

/// One frame per feature vector. ET models reconstruct through `basis`; pixel
/// models devectorize. Both clamp to [0, 255].
inline std::vector<Frame> predict_utterance(const MlpModel& m,
                                            std::span<const AcousticFeatureVector> features,
                                            const EigenTongueBasis* basis = nullptr) {
  detail::check_prediction_mode(m, basis);
  if (features.empty()) return {};
  const FeatureMatrix pixels = predict_pixels(m, to_matrix(features), basis);
  std::vector<Frame> frames;
  frames.reserve(pixels.rows);
  for (std::size_t r = 0; r < pixels.rows; ++r) frames.push_back(devectorize(pixels.row(r)));
  return frames;
}

// ---------------------------------------------------------------------------
// .mlp: "MLPR", u32 layer count, per layer (u32 rows, u32 cols, weights
// row-major, biases), then input mean/std and target mean/std, then a u8 mode
// tag (0 = pixels, 1 = ET).

inline io::Bytes encode_model(const MlpModel& m) {
  check_model(m);
  io::ByteWriter w;
  w.magic("MLPR");
  w.u32(static_cast<std::uint32_t>(m.layers.size()));
  for (const auto& L : m.layers) {
    w.u32(static_cast<std::uint32_t>(L.weights.rows()));
    w.u32(static_cast<std::uint32_t>(L.weights.cols()));
    for (Eigen::Index r = 0; r < L.weights.rows(); ++r)
      for (Eigen::Index c = 0; c < L.weights.cols(); ++c) w.f64(L.weights(r, c));
    for (Eigen::Index r = 0; r < L.biases.size(); ++r) w.f64(L.biases(r));
  }
  w.f64s(m.input_scaler.mean);
  w.f64s(m.input_scaler.std);
  w.f64s(m.target_scaler.mean);
  w.f64s(m.target_scaler.std);
  w.u8(static_cast<std::uint8_t>(m.mode));
  return std::move(w).take();
}

inline MlpModel decode_model(std::span<const std::uint8_t> data, const std::string& context = "mlp") {
  io::ByteReader rd(data, context);
  rd.expect_magic("MLPR");
  const std::uint32_t n_layers = rd.u32();
  if (n_layers < 2) throw FormatError(context + ": a model needs at least one hidden layer");
  rd.begin_payload();
  MlpModel m;
  m.spec.hidden_layers.clear();
  std::size_t prev_out = 0;
  for (std::uint32_t l = 0; l < n_layers; ++l) {
    const std::uint32_t rows = rd.u32();
    const std::uint32_t cols = rd.u32();
    if (rows == 0 || cols == 0 || (l > 0 && cols != prev_out))
      throw FormatError(context + ": layer " + std::to_string(l) + " shape does not chain");
    DenseLayer L;
    L.weights.resize(rows, cols);
    const auto w = rd.f64s(std::size_t{rows} * cols);
    for (std::uint32_t r = 0; r < rows; ++r)
      for (std::uint32_t c = 0; c < cols; ++c) L.weights(r, c) = w[std::size_t{r} * cols + c];
    const auto b = rd.f64s(rows);
    L.biases = Eigen::Map<const Eigen::VectorXd>(b.data(), rows);
    if (l == 0) m.spec.input_dim = cols;
    if (l + 1 < n_layers) m.spec.hidden_layers.push_back(rows);
    else m.spec.output_dim = rows;
    prev_out = rows;
    m.layers.push_back(std::move(L));
  }
  m.input_scaler.mean = rd.f64s(m.spec.input_dim);
  m.input_scaler.std = rd.f64s(m.spec.input_dim);
  m.target_scaler.mean = rd.f64s(m.spec.output_dim);
  m.target_scaler.std = rd.f64s(m.spec.output_dim);
  const auto tag = rd.u8();
  if (tag > 1) throw FormatError(context + ": unknown mode tag " + std::to_string(tag));
  m.mode = static_cast<TargetMode>(tag);
  rd.expect_end();
  check_model(m);
  return m;
}

inline void save_model(const MlpModel& m, const std::filesystem::path& path) {
  io::write_file(path, encode_model(m));
}

inline MlpModel load_model(const std::filesystem::path& path) {
  return decode_model(io::read_file(path), path.string());
}

}  // namespace uti
