#include <cstdint>
#include <limits>

#include "consroute/gp.hpp"
#include "consroute/kernels.hpp"
#include "consroute/threshold.hpp"

namespace consroute::kernels::parallel {

void nearest_centroid(const RowMatrix& points, const RowMatrix& centroids, std::span<int> labels,
                      std::span<double> dist2) {
  const std::int64_t n = points.rows();
  const Eigen::Index k_count = centroids.rows();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (Eigen::Index k = 0; k < k_count; ++k) {
      const double d = squared_distance(points, i, centroids, k);
      if (d < best) {
        best = d;
        arg = static_cast<int>(k);
      }
    }
    labels[static_cast<std::size_t>(i)] = arg;
    dist2[static_cast<std::size_t>(i)] = best;
  }
}

void gp_posterior(const GpSurrogate& gp, std::span<const ThresholdPair> candidates,
                  std::span<double> mean, std::span<double> variance) {
  const auto n = static_cast<std::int64_t>(candidates.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    gp.posterior(candidates[u], mean[u], variance[u]);
  }
}

void threshold_utilities(std::span<const ScoredOutcome> table,
                         std::span<const ThresholdPair> candidates, std::span<double> out) {
  const auto n = static_cast<std::int64_t>(candidates.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    out[u] = mean_routed_utility(table, candidates[u]);
  }
}

}  // namespace consroute::kernels::parallel
