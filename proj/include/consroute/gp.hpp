#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "consroute/threshold.hpp"
#include "consroute/types.hpp"

namespace consroute {

struct Observation;

struct GpHyper {
  double length_scale = 0.2;
  double signal_variance = 1.0;
  double noise_variance = 1e-4;
  // Fit on z-scored utilities and report in raw units.
  bool standardize = true;
  // First diagonal jitter tried when the Cholesky factorization fails; grows
  // tenfold up to max_jitter.
  double jitter = 1e-10;
  double max_jitter = 1e-4;

  void validate() const;
};

// Exact GP regression over the (tau1, tau2) square with a squared-exponential
// kernel. Observations at identical inputs are merged into one site whose
// noise is divided by the multiplicity, which leaves the posterior unchanged.
class GpSurrogate {
 public:
  const GpHyper& hyper() const { return hyper_; }
  std::size_t sites() const { return static_cast<std::size_t>(inputs_.rows()); }
  double applied_jitter() const { return jitter_; }

  double kernel(double a1, double a2, double b1, double b2) const;

  // Posterior of the latent utility at one point, raw units.
  void posterior(const ThresholdPair& x, double& mean, double& variance) const;
  double mean(const ThresholdPair& x) const;
  double variance(const ThresholdPair& x) const;

  // Pieces the batch kernels need.
  const RowMatrix& inputs() const { return inputs_; }
  const Eigen::VectorXd& weights() const { return alpha_; }
  const RowMatrix& cholesky() const { return chol_; }
  double target_shift() const { return shift_; }
  double target_scale() const { return scale_; }

 private:
  friend GpSurrogate gp_fit(std::span<const Observation> obs, const GpHyper& hyper);

  GpHyper hyper_;
  RowMatrix inputs_;     // sites x 2
  Eigen::VectorXd alpha_;
  RowMatrix chol_;       // lower factor of K + noise
  double shift_ = 0.0;
  double scale_ = 1.0;
  double jitter_ = 0.0;
};

// Throws Error(empty_input) without observations and Error(numerical) when the
// kernel matrix stays indefinite at max_jitter.
GpSurrogate gp_fit(std::span<const Observation> obs, const GpHyper& hyper);

// EI for maximization given a Gaussian posterior (mean, sd).
double expected_improvement(double mean, double sd, double best_so_far);
double expected_improvement(const GpSurrogate& gp, const ThresholdPair& candidate,
                            double best_so_far);

}  // namespace consroute
