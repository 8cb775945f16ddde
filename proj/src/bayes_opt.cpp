#include "consroute/bayes_opt.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "consroute/error.hpp"
#include "consroute/format.hpp"
#include "consroute/kernels.hpp"

namespace consroute {

ObservationSet::ObservationSet(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw Error(ErrorKind::invalid_config, "observation capacity must be positive");
}

void ObservationSet::add(const ThresholdPair& pair, double utility) {
  if (!std::isfinite(utility)) throw Error(ErrorKind::numerical, "observed utility is not finite");
  points_.push_back({pair, utility, next_index_++});
  while (points_.size() > capacity_) points_.pop_front();
}

void ObservationSet::restore(const Observation& obs) {
  if (!std::isfinite(obs.utility)) throw Error(ErrorKind::numerical, "observed utility is not finite");
  points_.push_back(obs);
  next_index_ = std::max(next_index_, obs.index + 1);
  while (points_.size() > capacity_) points_.pop_front();
}

const Observation& ObservationSet::best() const {
  if (points_.empty()) throw Error(ErrorKind::empty_input, "observation set is empty");
  const Observation* best = &points_.front();
  for (const auto& o : points_) {
    if (o.utility > best->utility) best = &o;
  }
  return *best;
}

void BoConfig::validate() const {
  if (offline_budget == 0 || candidate_pool_size == 0 || capacity == 0 || !(jitter > 0.0)) {
    throw Error(ErrorKind::invalid_config, "BO budget, pool size, capacity and jitter must be positive");
  }
  offline_hyper.validate();
  online_hyper.validate();
}

ThresholdPair sample_triangle(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (;;) {
    const double a = unif(rng);
    const double b = unif(rng);
    if (a > b) return {a, b};
  }
}

ThresholdPair propose_thresholds(const GpSurrogate& gp, const ObservationSet& obs,
                                 const BoConfig& cfg, std::mt19937_64& rng) {
  std::vector<ThresholdPair> pool(cfg.candidate_pool_size);
  for (auto& c : pool) c = sample_triangle(rng);
  std::vector<double> mean(pool.size()), var(pool.size());
  kernels::gp_posterior(gp, pool, mean, var, kernels::default_exec());

  const double best = obs.best().utility;
  std::size_t arg = 0;
  double top = -1.0;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const double ei = expected_improvement(mean[i], std::sqrt(var[i]), best);
    if (ei > top) {
      top = ei;
      arg = i;
    }
  }
  return pool[arg];
}

namespace {

double evaluate_at(const Evaluator& evaluator, const ThresholdPair& pair, std::size_t iteration) {
  double u;
  try {
    u = evaluator(pair);
  } catch (const Error& e) {
    throw Error(e.kind(), "BO iteration " + std::to_string(iteration) + ": " + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorKind::numerical, "BO iteration " + std::to_string(iteration) + ": " + e.what());
  }
  if (!std::isfinite(u)) {
    throw Error(ErrorKind::numerical,
                "BO iteration " + std::to_string(iteration) + ": evaluator returned non-finite utility");
  }
  return u;
}

GpHyper with_jitter(GpHyper h, double jitter) {
  h.jitter = jitter;
  h.max_jitter = std::max(h.max_jitter, jitter);
  return h;
}

}  // namespace

OfflineResult optimize_offline(const Evaluator& evaluator, const BoConfig& cfg,
                               std::size_t seed_points) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  OfflineResult result{{}, 0.0, ObservationSet(cfg.capacity)};
  ObservationSet& obs = result.observations;

  const std::size_t seeds = std::max<std::size_t>(seed_points, 1);
  std::size_t iteration = 0;
  for (std::size_t i = 0; i < seeds; ++i, ++iteration) {
    const ThresholdPair p = sample_triangle(rng);
    obs.add(p, evaluate_at(evaluator, p, iteration));
  }
  const GpHyper hyper = with_jitter(cfg.offline_hyper, cfg.jitter);
  for (std::size_t t = 0; t < cfg.offline_budget; ++t, ++iteration) {
    const GpSurrogate gp = gp_fit(obs, hyper);
    const ThresholdPair p = propose_thresholds(gp, obs, cfg, rng);
    obs.add(p, evaluate_at(evaluator, p, iteration));
  }
  const Observation& best = obs.best();
  result.incumbent = best.pair;
  result.incumbent_utility = best.utility;
  return result;
}

RefreshResult refresh_online(ObservationSet& obs, const ThresholdPair& incumbent,
                             const Evaluator& evaluator, const BoConfig& cfg,
                             std::mt19937_64& rng) {
  RefreshResult out{incumbent, 0.0, false};
  if (cfg.online_steps_per_refresh == 0) return out;
  if (obs.empty()) throw Error(ErrorKind::empty_input, "online refresh needs observations");

  out.incumbent_utility = evaluate_at(evaluator, incumbent, 0);
  obs.add(incumbent, out.incumbent_utility);
  const GpHyper hyper = with_jitter(cfg.online_hyper, cfg.jitter);
  for (std::size_t s = 0; s < cfg.online_steps_per_refresh; ++s) {
    const GpSurrogate gp = gp_fit(obs, hyper);
    const ThresholdPair p = propose_thresholds(gp, obs, cfg, rng);
    const double u = evaluate_at(evaluator, p, s + 1);
    obs.add(p, u);
    if (u > out.incumbent_utility) {
      out.incumbent = p;
      out.incumbent_utility = u;
      out.replaced = true;
    }
  }
  return out;
}

void write_observations_csv_header(std::ostream& out) {
  out << "cluster,tau1,tau2,utility,index\n";
}

void write_observations_csv(std::size_t cluster, const ObservationSet& obs, std::ostream& out) {
  for (const auto& o : obs.points()) {
    out << cluster << ',' << fmt_real(o.pair.tau1) << ',' << fmt_real(o.pair.tau2) << ','
        << fmt_real(o.utility) << ',' << o.index << '\n';
  }
}

}  // namespace consroute
