#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "consroute/types.hpp"

namespace consroute {

enum class Activation : std::uint32_t { relu = 0, tanh = 1 };

struct MlpConfig {
  std::size_t input_dim = 64;
  std::vector<std::size_t> hidden_dims{256, 64};
  Activation activation = Activation::relu;
  double learning_rate = 1e-3;
  std::size_t batch_size = 64;
  std::size_t max_epochs = 100;
  // Stop after this many epochs without a validation improvement; 0 disables.
  std::size_t early_stop_patience = 10;
  std::uint64_t seed = 1;
  double validation_fraction = 0.1;
  // Seeded shuffling of the train/validation split and of every epoch.
  bool shuffle = true;

  void validate() const;
};

struct DenseLayer {
  Eigen::MatrixXd weight;  // fan_out x fan_in
  Eigen::VectorXd bias;
};

// Hidden layers followed by a single logistic output unit.
class MlpModel {
 public:
  MlpModel() = default;
  // Correct shapes, all parameters zero.
  explicit MlpModel(MlpConfig cfg);

  const MlpConfig& config() const { return cfg_; }
  std::size_t input_dim() const { return cfg_.input_dim; }
  std::size_t parameter_count() const;

  // Flat layout: per layer, weight row-major then bias.
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> flat);

  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }

  double predict(std::span<const double> x) const;
  std::vector<double> predict_batch(const RowMatrix& x) const;

  // d/dθ (predict(x) - target)^2 in the parameters() layout.
  std::vector<double> example_gradient(std::span<const double> x, double target) const;

  // Smallest |pre-activation| over hidden units; ReLU gradient checks need
  // this away from zero.
  double min_abs_preactivation(std::span<const double> x) const;

 private:
  void check_input(std::size_t n) const;

  MlpConfig cfg_;
  std::vector<DenseLayer> layers_;
};

std::size_t mlp_parameter_count(std::size_t input_dim, std::span<const std::size_t> hidden_dims);

// Glorot-uniform weights, zero biases, deterministic in cfg.seed.
MlpModel init_mlp(const MlpConfig& cfg);

inline double predict(const MlpModel& model, std::span<const double> x) { return model.predict(x); }

struct EpochStats {
  std::size_t epoch = 0;
  double train_mse = 0.0;
  double val_mse = 0.0;
};

struct TrainReport {
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;
  double final_train_mse = 0.0;  // at the best-validation epoch
  double final_val_mse = 0.0;
  std::vector<EpochStats> loss_curve;
};

struct TrainResult {
  MlpModel model;  // best-validation snapshot
  TrainReport report;
};

// Mini-batch Adam on mean squared error. Throws Error(training_diverged) when
// a loss turns non-finite.
TrainResult train(const MlpModel& model, const RowMatrix& embeddings,
                  std::span<const double> targets, const MlpConfig& cfg);

// Max relative error between backprop and central differences.
double gradient_check(const MlpModel& model, std::span<const double> x, double target,
                      double step = 1e-5);

std::vector<std::uint8_t> checkpoint_bytes(const MlpModel& model);
MlpModel checkpoint_from_bytes(std::vector<std::uint8_t> bytes, const std::string& what = "checkpoint");
void save_checkpoint(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_checkpoint(const std::filesystem::path& path);

}  // namespace consroute
