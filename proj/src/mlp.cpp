#include "consroute/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "consroute/binary_io.hpp"
#include "consroute/error.hpp"

namespace consroute {

namespace {

constexpr std::string_view kCheckpointMagic = "CRMLP001";

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void activate(Eigen::MatrixXd& z, Activation act) {
  if (act == Activation::relu) {
    z = z.cwiseMax(0.0);
  } else {
    z = z.array().tanh().matrix();
  }
}

// Derivative of the activation expressed through pre-activation z and output a.
Eigen::MatrixXd activation_grad(const Eigen::MatrixXd& z, const Eigen::MatrixXd& a,
                                Activation act) {
  if (act == Activation::relu) return (z.array() > 0.0).cast<double>().matrix();
  return (1.0 - a.array().square()).matrix();
}

struct ForwardPass {
  std::vector<Eigen::MatrixXd> pre;   // per layer, fan_out x batch
  std::vector<Eigen::MatrixXd> post;  // post[0] is the input
  Eigen::RowVectorXd output;          // logistic outputs
};

ForwardPass forward(const std::vector<DenseLayer>& layers, Activation act,
                    const Eigen::MatrixXd& input) {
  ForwardPass fp;
  fp.post.push_back(input);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Eigen::MatrixXd z = layers[l].weight * fp.post.back();
    z.colwise() += layers[l].bias;
    fp.pre.push_back(z);
    if (l + 1 < layers.size()) {
      activate(z, act);
      fp.post.push_back(std::move(z));
    }
  }
  const Eigen::MatrixXd& logits = fp.pre.back();
  fp.output.resize(logits.cols());
  for (Eigen::Index j = 0; j < logits.cols(); ++j) fp.output(j) = sigmoid(logits(0, j));
  return fp;
}

// Gradients of sum_j loss_weight * (out_j - y_j)^2.
std::vector<DenseLayer> backward(const std::vector<DenseLayer>& layers, Activation act,
                                 const ForwardPass& fp, const Eigen::RowVectorXd& targets,
                                 double loss_weight) {
  std::vector<DenseLayer> grads(layers.size());
  Eigen::MatrixXd delta(1, fp.output.size());
  for (Eigen::Index j = 0; j < fp.output.size(); ++j) {
    const double o = fp.output(j);
    delta(0, j) = loss_weight * 2.0 * (o - targets(j)) * o * (1.0 - o);
  }
  for (std::size_t l = layers.size(); l-- > 0;) {
    grads[l].weight = delta * fp.post[l].transpose();
    grads[l].bias = delta.rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd back = layers[l].weight.transpose() * delta;
      delta = back.cwiseProduct(activation_grad(fp.pre[l - 1], fp.post[l], act));
    }
  }
  return grads;
}

Eigen::MatrixXd column_of(std::span<const double> x) {
  Eigen::MatrixXd col(static_cast<Eigen::Index>(x.size()), 1);
  for (std::size_t i = 0; i < x.size(); ++i) col(static_cast<Eigen::Index>(i), 0) = x[i];
  return col;
}

Eigen::MatrixXd gather_columns(const RowMatrix& x, std::span<const std::size_t> rows) {
  Eigen::MatrixXd out(x.cols(), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = x.row(static_cast<Eigen::Index>(rows[j])).transpose();
  }
  return out;
}

double mse_of(const std::vector<DenseLayer>& layers, Activation act, const Eigen::MatrixXd& x,
              const Eigen::RowVectorXd& y) {
  if (x.cols() == 0) return 0.0;
  const ForwardPass fp = forward(layers, act, x);
  return (fp.output - y).squaredNorm() / static_cast<double>(y.size());
}

std::vector<double> flatten(const std::vector<DenseLayer>& layers) {
  std::vector<double> flat;
  for (const auto& layer : layers) {
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) flat.push_back(layer.weight(r, c));
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) flat.push_back(layer.bias(r));
  }
  return flat;
}

}  // namespace

void MlpConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::invalid_config, msg); };
  if (input_dim == 0) fail("input_dim must be positive");
  for (std::size_t h : hidden_dims) {
    if (h == 0) fail("hidden layer widths must be positive");
  }
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) fail("learning_rate must be positive");
  if (batch_size == 0) fail("batch_size must be positive");
  if (max_epochs == 0) fail("max_epochs must be positive");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    fail("validation_fraction must lie in (0,1)");
  }
}

std::size_t mlp_parameter_count(std::size_t input_dim, std::span<const std::size_t> hidden_dims) {
  std::size_t count = 0;
  std::size_t fan_in = input_dim;
  for (std::size_t h : hidden_dims) {
    count += fan_in * h + h;
    fan_in = h;
  }
  return count + fan_in + 1;
}

MlpModel::MlpModel(MlpConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  std::size_t fan_in = cfg_.input_dim;
  auto add = [&](std::size_t fan_out) {
    layers_.push_back({Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(fan_out),
                                             static_cast<Eigen::Index>(fan_in)),
                       Eigen::VectorXd::Zero(static_cast<Eigen::Index>(fan_out))});
    fan_in = fan_out;
  };
  for (std::size_t h : cfg_.hidden_dims) add(h);
  add(1);
}

std::size_t MlpModel::parameter_count() const {
  return mlp_parameter_count(cfg_.input_dim, cfg_.hidden_dims);
}

std::vector<double> MlpModel::parameters() const { return flatten(layers_); }

void MlpModel::set_parameters(std::span<const double> flat) {
  if (flat.size() != parameter_count()) {
    throw Error(ErrorKind::dimension_mismatch,
                "expected " + std::to_string(parameter_count()) + " parameters, got " +
                    std::to_string(flat.size()));
  }
  std::size_t i = 0;
  for (auto& layer : layers_) {
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = flat[i++];
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = flat[i++];
  }
}

void MlpModel::check_input(std::size_t n) const {
  if (n != cfg_.input_dim) {
    throw Error(ErrorKind::dimension_mismatch, "predictor expects input_dim " +
                                                   std::to_string(cfg_.input_dim) + ", got " +
                                                   std::to_string(n));
  }
}

double MlpModel::predict(std::span<const double> x) const {
  check_input(x.size());
  return forward(layers_, cfg_.activation, column_of(x)).output(0);
}

std::vector<double> MlpModel::predict_batch(const RowMatrix& x) const {
  check_input(static_cast<std::size_t>(x.cols()));
  std::vector<double> out(static_cast<std::size_t>(x.rows()));
  constexpr Eigen::Index kChunk = 1024;
  for (Eigen::Index start = 0; start < x.rows(); start += kChunk) {
    const Eigen::Index len = std::min(kChunk, x.rows() - start);
    const Eigen::MatrixXd cols = x.middleRows(start, len).transpose();
    const ForwardPass fp = forward(layers_, cfg_.activation, cols);
    for (Eigen::Index j = 0; j < len; ++j) out[static_cast<std::size_t>(start + j)] = fp.output(j);
  }
  return out;
}

std::vector<double> MlpModel::example_gradient(std::span<const double> x, double target) const {
  check_input(x.size());
  const ForwardPass fp = forward(layers_, cfg_.activation, column_of(x));
  Eigen::RowVectorXd y(1);
  y(0) = target;
  return flatten(backward(layers_, cfg_.activation, fp, y, 1.0));
}

double MlpModel::min_abs_preactivation(std::span<const double> x) const {
  check_input(x.size());
  const ForwardPass fp = forward(layers_, cfg_.activation, column_of(x));
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l + 1 < fp.pre.size(); ++l) best = std::min(best, fp.pre[l].cwiseAbs().minCoeff());
  return best;
}

MlpModel init_mlp(const MlpConfig& cfg) {
  MlpModel model(cfg);
  std::mt19937_64 rng(cfg.seed);
  for (auto& layer : model.layers()) {
    const double fan_sum = static_cast<double>(layer.weight.rows() + layer.weight.cols());
    std::uniform_real_distribution<double> unif(-std::sqrt(6.0 / fan_sum), std::sqrt(6.0 / fan_sum));
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = unif(rng);
    }
    layer.bias.setZero();
  }
  return model;
}

TrainResult train(const MlpModel& model, const RowMatrix& embeddings,
                  std::span<const double> targets, const MlpConfig& cfg) {
  cfg.validate();
  const std::size_t n = static_cast<std::size_t>(embeddings.rows());
  if (static_cast<std::size_t>(embeddings.cols()) != model.input_dim() ||
      cfg.input_dim != model.input_dim()) {
    throw Error(ErrorKind::dimension_mismatch, "embedding width does not match predictor input_dim");
  }
  if (targets.size() != n) {
    throw Error(ErrorKind::dimension_mismatch, "targets length does not match embedding rows");
  }
  if (n < 2) throw Error(ErrorKind::empty_input, "training needs at least two examples");
  for (double t : targets) {
    if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorKind::out_of_range, "targets must lie in [0,1]");
  }

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (cfg.shuffle) std::shuffle(order.begin(), order.end(), rng);

  const auto n_val = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(cfg.validation_fraction * static_cast<double>(n))), 1, n - 1);
  std::vector<std::size_t> train_rows(order.begin(), order.end() - static_cast<std::ptrdiff_t>(n_val));
  const std::vector<std::size_t> val_rows(order.end() - static_cast<std::ptrdiff_t>(n_val), order.end());

  auto targets_of = [&](std::span<const std::size_t> rows) {
    Eigen::RowVectorXd y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t j = 0; j < rows.size(); ++j) y(static_cast<Eigen::Index>(j)) = targets[rows[j]];
    return y;
  };
  const Eigen::MatrixXd x_train_all = gather_columns(embeddings, train_rows);
  const Eigen::RowVectorXd y_train_all = targets_of(train_rows);
  const Eigen::MatrixXd x_val = gather_columns(embeddings, val_rows);
  const Eigen::RowVectorXd y_val = targets_of(val_rows);

  std::vector<DenseLayer> params = model.layers();
  std::vector<DenseLayer> m1(params.size()), m2(params.size());
  for (std::size_t l = 0; l < params.size(); ++l) {
    m1[l] = {Eigen::MatrixXd::Zero(params[l].weight.rows(), params[l].weight.cols()),
             Eigen::VectorXd::Zero(params[l].bias.size())};
    m2[l] = m1[l];
  }
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  std::uint64_t step = 0;

  TrainResult result{model, {}};
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    if (cfg.shuffle) std::shuffle(train_rows.begin(), train_rows.end(), rng);
    for (std::size_t start = 0; start < train_rows.size(); start += cfg.batch_size) {
      const std::size_t len = std::min(cfg.batch_size, train_rows.size() - start);
      std::span<const std::size_t> batch(train_rows.data() + start, len);
      const Eigen::MatrixXd xb = gather_columns(embeddings, batch);
      const Eigen::RowVectorXd yb = targets_of(batch);
      const ForwardPass fp = forward(params, cfg.activation, xb);
      const auto grads = backward(params, cfg.activation, fp, yb, 1.0 / static_cast<double>(len));

      ++step;
      const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
      for (std::size_t l = 0; l < params.size(); ++l) {
        m1[l].weight = kBeta1 * m1[l].weight + (1.0 - kBeta1) * grads[l].weight;
        m2[l].weight = kBeta2 * m2[l].weight + (1.0 - kBeta2) * grads[l].weight.cwiseAbs2();
        m1[l].bias = kBeta1 * m1[l].bias + (1.0 - kBeta1) * grads[l].bias;
        m2[l].bias = kBeta2 * m2[l].bias + (1.0 - kBeta2) * grads[l].bias.cwiseAbs2();
        params[l].weight.array() -= cfg.learning_rate * (m1[l].weight.array() / c1) /
                                    ((m2[l].weight.array() / c2).sqrt() + kEps);
        params[l].bias.array() -= cfg.learning_rate * (m1[l].bias.array() / c1) /
                                  ((m2[l].bias.array() / c2).sqrt() + kEps);
      }
    }

    const double train_mse = mse_of(params, cfg.activation, x_train_all, y_train_all);
    const double val_mse = mse_of(params, cfg.activation, x_val, y_val);
    if (!std::isfinite(train_mse) || !std::isfinite(val_mse)) {
      throw Error(ErrorKind::training_diverged,
                  "training diverged at epoch " + std::to_string(epoch));
    }
    result.report.loss_curve.push_back({epoch, train_mse, val_mse});
    result.report.epochs_run = epoch;

    if (val_mse < best_val) {
      best_val = val_mse;
      since_best = 0;
      result.model.layers() = params;
      result.report.best_epoch = epoch;
      result.report.final_train_mse = train_mse;
      result.report.final_val_mse = val_mse;
    } else if (cfg.early_stop_patience > 0 && ++since_best >= cfg.early_stop_patience) {
      break;
    }
  }
  return result;
}

double gradient_check(const MlpModel& model, std::span<const double> x, double target, double step) {
  const std::vector<double> analytic = model.example_gradient(x, target);
  std::vector<double> theta = model.parameters();
  MlpModel probe = model;
  auto loss_at = [&](std::size_t i, double value) {
    const double saved = theta[i];
    theta[i] = value;
    probe.set_parameters(theta);
    theta[i] = saved;
    const double out = probe.predict(x);
    return (out - target) * (out - target);
  };
  double worst = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double numeric = (loss_at(i, theta[i] + step) - loss_at(i, theta[i] - step)) / (2.0 * step);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  return worst;
}

std::vector<std::uint8_t> checkpoint_bytes(const MlpModel& model) {
  const MlpConfig& cfg = model.config();
  ByteWriter w;
  w.raw(kCheckpointMagic);
  w.u32(static_cast<std::uint32_t>(cfg.input_dim));
  w.u32(static_cast<std::uint32_t>(cfg.activation));
  w.u32(static_cast<std::uint32_t>(cfg.hidden_dims.size()));
  for (std::size_t h : cfg.hidden_dims) w.u32(static_cast<std::uint32_t>(h));
  w.f64(cfg.learning_rate);
  w.u64(cfg.batch_size);
  w.u64(cfg.max_epochs);
  w.u64(cfg.early_stop_patience);
  w.u64(cfg.seed);
  w.f64(cfg.validation_fraction);
  w.u32(cfg.shuffle ? 1 : 0);
  const std::vector<double> flat = model.parameters();
  w.u64(flat.size());
  w.f64s(flat);
  w.seal();
  return w.bytes();
}

MlpModel checkpoint_from_bytes(std::vector<std::uint8_t> bytes, const std::string& what) {
  ByteReader r(std::move(bytes), what);
  r.verify_seal();
  r.expect_magic(kCheckpointMagic);
  MlpConfig cfg;
  cfg.input_dim = r.u32();
  const std::uint32_t act = r.u32();
  if (act > 1) throw Error(ErrorKind::integrity, what + ": unknown activation");
  cfg.activation = static_cast<Activation>(act);
  const std::uint32_t n_hidden = r.u32();
  if (n_hidden > 1024) throw Error(ErrorKind::integrity, what + ": implausible depth");
  cfg.hidden_dims.clear();
  for (std::uint32_t i = 0; i < n_hidden; ++i) cfg.hidden_dims.push_back(r.u32());
  cfg.learning_rate = r.f64();
  cfg.batch_size = r.u64();
  cfg.max_epochs = r.u64();
  cfg.early_stop_patience = r.u64();
  cfg.seed = r.u64();
  cfg.validation_fraction = r.f64();
  cfg.shuffle = r.u32() != 0;
  const std::uint64_t count = r.u64();
  if (count != mlp_parameter_count(cfg.input_dim, cfg.hidden_dims)) {
    throw Error(ErrorKind::integrity, what + ": parameter count does not match header");
  }
  MlpModel model;
  try {
    model = MlpModel(cfg);
  } catch (const Error& e) {
    throw Error(ErrorKind::integrity, what + ": invalid header: " + e.what());
  }
  model.set_parameters(r.f64s(count));
  if (!r.at_end()) throw Error(ErrorKind::integrity, what + ": trailing bytes");
  return model;
}

void save_checkpoint(const MlpModel& model, const std::filesystem::path& path) {
  write_file_bytes(path, checkpoint_bytes(model));
}

MlpModel load_checkpoint(const std::filesystem::path& path) {
  return checkpoint_from_bytes(read_file_bytes(path), path.string());
}

}  // namespace consroute
