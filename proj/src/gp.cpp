#include "consroute/gp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include <Eigen/Cholesky>

#include "consroute/bayes_opt.hpp"
#include "consroute/error.hpp"

namespace consroute {

void GpHyper::validate() const {
  if (!(length_scale > 0.0) || !(signal_variance > 0.0) || !(noise_variance >= 0.0) ||
      !(jitter > 0.0) || !(max_jitter >= jitter)) {
    throw Error(ErrorKind::invalid_config, "GP hyperparameters must be positive");
  }
}

double GpSurrogate::kernel(double a1, double a2, double b1, double b2) const {
  const double d1 = a1 - b1;
  const double d2 = a2 - b2;
  return hyper_.signal_variance *
         std::exp(-(d1 * d1 + d2 * d2) / (2.0 * hyper_.length_scale * hyper_.length_scale));
}

void GpSurrogate::posterior(const ThresholdPair& x, double& mean, double& variance) const {
  const Eigen::Index n = inputs_.rows();
  Eigen::VectorXd v(n);
  double m = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double k = kernel(x.tau1, x.tau2, inputs_(i, 0), inputs_(i, 1));
    m += k * alpha_(i);
    double acc = k;
    for (Eigen::Index j = 0; j < i; ++j) acc -= chol_(i, j) * v(j);
    v(i) = acc / chol_(i, i);
  }
  const double var = std::max(0.0, hyper_.signal_variance - v.squaredNorm());
  mean = m * scale_ + shift_;
  variance = var * scale_ * scale_;
}

double GpSurrogate::mean(const ThresholdPair& x) const {
  double m, v;
  posterior(x, m, v);
  return m;
}

double GpSurrogate::variance(const ThresholdPair& x) const {
  double m, v;
  posterior(x, m, v);
  return v;
}

GpSurrogate gp_fit(std::span<const Observation> obs, const GpHyper& hyper) {
  hyper.validate();
  if (obs.empty()) throw Error(ErrorKind::empty_input, "GP fit needs at least one observation");

  GpSurrogate gp;
  gp.hyper_ = hyper;

  double sum = 0.0;
  for (const auto& o : obs) {
    if (!std::isfinite(o.utility)) throw Error(ErrorKind::numerical, "non-finite utility in GP data");
    sum += o.utility;
  }
  const double n_obs = static_cast<double>(obs.size());
  if (hyper.standardize) {
    gp.shift_ = sum / n_obs;
    double ss = 0.0;
    for (const auto& o : obs) ss += (o.utility - gp.shift_) * (o.utility - gp.shift_);
    const double sd = std::sqrt(ss / n_obs);
    gp.scale_ = sd > 1e-12 ? sd : 1.0;
  }

  // Merge repeated inputs (first-seen order keeps the fit deterministic).
  struct Site {
    double tau1, tau2, total = 0.0;
    std::size_t count = 0;
  };
  std::vector<Site> sites;
  std::map<std::pair<double, double>, std::size_t> where;
  for (const auto& o : obs) {
    const double z = (o.utility - gp.shift_) / gp.scale_;
    auto [it, fresh] = where.try_emplace({o.pair.tau1, o.pair.tau2}, sites.size());
    if (fresh) sites.push_back({o.pair.tau1, o.pair.tau2});
    sites[it->second].total += z;
    sites[it->second].count += 1;
  }

  const auto n = static_cast<Eigen::Index>(sites.size());
  gp.inputs_.resize(n, 2);
  Eigen::VectorXd y(n);
  Eigen::VectorXd noise(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Site& s = sites[static_cast<std::size_t>(i)];
    gp.inputs_(i, 0) = s.tau1;
    gp.inputs_(i, 1) = s.tau2;
    y(i) = s.total / static_cast<double>(s.count);
    noise(i) = hyper.noise_variance / static_cast<double>(s.count);
  }

  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      k(i, j) = k(j, i) = gp.kernel(gp.inputs_(i, 0), gp.inputs_(i, 1), gp.inputs_(j, 0),
                                    gp.inputs_(j, 1));
    }
    k(i, i) += noise(i);
  }

  double jitter = 0.0;
  for (;;) {
    Eigen::MatrixXd a = k;
    a.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) {
      gp.chol_ = llt.matrixL();
      gp.alpha_ = llt.solve(y);
      gp.jitter_ = jitter;
      break;
    }
    jitter = jitter == 0.0 ? hyper.jitter : jitter * 10.0;
    if (jitter > hyper.max_jitter * (1.0 + 1e-12)) {
      throw Error(ErrorKind::numerical, "GP kernel matrix not positive definite at max jitter");
    }
  }
  return gp;
}

GpSurrogate gp_fit(const ObservationSet& obs, const GpHyper& hyper) {
  const std::vector<Observation> flat(obs.points().begin(), obs.points().end());
  return gp_fit(std::span<const Observation>(flat), hyper);
}

double expected_improvement(double mean, double sd, double best_so_far) {
  const double gap = mean - best_so_far;
  if (!(sd > 0.0)) return std::max(0.0, gap);
  const double z = gap / sd;
  const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  return std::max(0.0, gap * cdf + sd * pdf);
}

double expected_improvement(const GpSurrogate& gp, const ThresholdPair& candidate,
                            double best_so_far) {
  double m, v;
  gp.posterior(candidate, m, v);
  return expected_improvement(m, std::sqrt(v), best_so_far);
}

}  // namespace consroute
