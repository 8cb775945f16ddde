// Reference implementations; the parallel variants must match these bitwise.
#include <limits>

#include "consroute/gp.hpp"
#include "consroute/kernels.hpp"
#include "consroute/threshold.hpp"

namespace consroute::kernels::serial {

void nearest_centroid(const RowMatrix& points, const RowMatrix& centroids, std::span<int> labels,
                      std::span<double> dist2) {
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (Eigen::Index k = 0; k < centroids.rows(); ++k) {
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
  for (std::size_t i = 0; i < candidates.size(); ++i) gp.posterior(candidates[i], mean[i], variance[i]);
}

void threshold_utilities(std::span<const ScoredOutcome> table,
                         std::span<const ThresholdPair> candidates, std::span<double> out) {
  for (std::size_t i = 0; i < candidates.size(); ++i) out[i] = mean_routed_utility(table, candidates[i]);
}

}  // namespace consroute::kernels::serial
