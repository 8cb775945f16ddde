#pragma once

#include <span>
#include <vector>

#include "consroute/types.hpp"

namespace consroute {

struct ThresholdPair;  // threshold.hpp
class GpSurrogate;

// Per-record routing outcome table: a predicted score plus the utility each
// tier would have produced for that record.
struct ScoredOutcome {
  double score = 0.0;
  PerTier<double> utility{};
};

namespace kernels {

// Data-parallel hot loops. Every kernel has a serial reference and an OpenMP
// variant; both compute each output element with identical arithmetic, so
// results are bitwise equal regardless of thread count.
enum class Exec { serial, parallel };

// Execution mode used by library call sites; parallel when built with OpenMP.
Exec default_exec();
bool openmp_enabled();
int max_threads();

// labels[i] = argmin_k ||points[i] - centroids[k]||^2 (ties to the lowest k),
// dist2[i] the matching squared distance.
void nearest_centroid(const RowMatrix& points, const RowMatrix& centroids,
                      std::span<int> labels, std::span<double> dist2, Exec exec);

// Posterior mean and variance (raw utility units) at each candidate.
void gp_posterior(const GpSurrogate& gp, std::span<const ThresholdPair> candidates,
                  std::span<double> mean, std::span<double> variance, Exec exec);

// Mean routed utility of the table for each candidate threshold pair.
void threshold_utilities(std::span<const ScoredOutcome> table,
                         std::span<const ThresholdPair> candidates, std::span<double> out,
                         Exec exec);

namespace serial {
void nearest_centroid(const RowMatrix& points, const RowMatrix& centroids,
                      std::span<int> labels, std::span<double> dist2);
void gp_posterior(const GpSurrogate& gp, std::span<const ThresholdPair> candidates,
                  std::span<double> mean, std::span<double> variance);
void threshold_utilities(std::span<const ScoredOutcome> table,
                         std::span<const ThresholdPair> candidates, std::span<double> out);
}  // namespace serial

namespace parallel {
void nearest_centroid(const RowMatrix& points, const RowMatrix& centroids,
                      std::span<int> labels, std::span<double> dist2);
void gp_posterior(const GpSurrogate& gp, std::span<const ThresholdPair> candidates,
                  std::span<double> mean, std::span<double> variance);
void threshold_utilities(std::span<const ScoredOutcome> table,
                         std::span<const ThresholdPair> candidates, std::span<double> out);
}  // namespace parallel

// Shared per-element bodies.
double squared_distance(const RowMatrix& a, Eigen::Index row_a, const RowMatrix& b,
                        Eigen::Index row_b);
double mean_routed_utility(std::span<const ScoredOutcome> table, const ThresholdPair& pair);

}  // namespace kernels
}  // namespace consroute
