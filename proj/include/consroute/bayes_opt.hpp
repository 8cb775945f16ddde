#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <random>

#include "consroute/gp.hpp"
#include "consroute/threshold.hpp"

namespace consroute {

struct Observation {
  ThresholdPair pair;
  double utility = 0.0;
  std::uint64_t index = 0;  // insertion order, monotone per set
};

// Bounded observation window; the oldest point is evicted first.
class ObservationSet {
 public:
  explicit ObservationSet(std::size_t capacity = 512);

  void add(const ThresholdPair& pair, double utility);
  // Restores a logged point with its original index.
  void restore(const Observation& obs);

  std::size_t size() const { return points_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return points_.empty(); }
  const std::deque<Observation>& points() const { return points_; }
  std::uint64_t next_index() const { return next_index_; }

  // First observation with the highest utility. Requires !empty().
  const Observation& best() const;

 private:
  std::size_t capacity_;
  std::deque<Observation> points_;
  std::uint64_t next_index_ = 0;
};

GpSurrogate gp_fit(const ObservationSet& obs, const GpHyper& hyper);

struct BoConfig {
  std::size_t offline_budget = 80;
  std::size_t online_steps_per_refresh = 4;
  std::size_t candidate_pool_size = 512;
  std::size_t seed_points = 8;
  std::size_t capacity = 512;
  std::uint64_t seed = 0;
  double jitter = 1e-10;
  GpHyper offline_hyper{0.2, 1.0, 1e-4};
  GpHyper online_hyper{0.2, 1.0, 1e-2};

  void validate() const;
};

using Evaluator = std::function<double(const ThresholdPair&)>;

// Uniform draw from {0 <= tau2 < tau1 <= 1} by rejection over the unit square.
ThresholdPair sample_triangle(std::mt19937_64& rng);

// EI argmax over a fresh seeded candidate pool; ties keep the first candidate.
ThresholdPair propose_thresholds(const GpSurrogate& gp, const ObservationSet& obs,
                                 const BoConfig& cfg, std::mt19937_64& rng);

struct OfflineResult {
  ThresholdPair incumbent;
  double incumbent_utility = 0.0;
  ObservationSet observations;
};

OfflineResult optimize_offline(const Evaluator& evaluator, const BoConfig& cfg,
                               std::size_t seed_points);
inline OfflineResult optimize_offline(const Evaluator& evaluator, const BoConfig& cfg) {
  return optimize_offline(evaluator, cfg, cfg.seed_points);
}

struct RefreshResult {
  ThresholdPair incumbent;
  double incumbent_utility = 0.0;  // under the current evaluator
  bool replaced = false;
};

// Re-scores the incumbent with the current evaluator, then runs a few
// fit-propose-evaluate steps. The incumbent moves only on a strictly higher
// utility.
RefreshResult refresh_online(ObservationSet& obs, const ThresholdPair& incumbent,
                             const Evaluator& evaluator, const BoConfig& cfg,
                             std::mt19937_64& rng);

// cluster,tau1,tau2,utility,index
void write_observations_csv_header(std::ostream& out);
void write_observations_csv(std::size_t cluster, const ObservationSet& obs, std::ostream& out);

}  // namespace consroute
