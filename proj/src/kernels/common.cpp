#include "consroute/kernels.hpp"

#include "consroute/error.hpp"
#include "consroute/gp.hpp"
#include "consroute/threshold.hpp"

#ifdef CONSROUTE_HAVE_OPENMP
#include <omp.h>
#endif

namespace consroute::kernels {

bool openmp_enabled() {
#ifdef CONSROUTE_HAVE_OPENMP
  return true;
#else
  return false;
#endif
}

int max_threads() {
#ifdef CONSROUTE_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

Exec default_exec() { return openmp_enabled() ? Exec::parallel : Exec::serial; }

double squared_distance(const RowMatrix& a, Eigen::Index row_a, const RowMatrix& b,
                        Eigen::Index row_b) {
  const double* pa = a.data() + row_a * a.cols();
  const double* pb = b.data() + row_b * b.cols();
  double acc = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    const double d = pa[j] - pb[j];
    acc += d * d;
  }
  return acc;
}

double mean_routed_utility(std::span<const ScoredOutcome> table, const ThresholdPair& pair) {
  if (table.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& row : table) acc += row.utility[index(route_tier(row.score, pair))];
  return acc / static_cast<double>(table.size());
}

namespace {

void check_centroid_shapes(const RowMatrix& points, const RowMatrix& centroids,
                           std::span<int> labels, std::span<double> dist2) {
  if (points.cols() != centroids.cols()) {
    throw Error(ErrorKind::dimension_mismatch, "points and centroids differ in dimension");
  }
  if (centroids.rows() == 0) throw Error(ErrorKind::empty_input, "no centroids");
  if (labels.size() != static_cast<std::size_t>(points.rows()) || dist2.size() != labels.size()) {
    throw Error(ErrorKind::dimension_mismatch, "output spans must match the number of points");
  }
}

}  // namespace

void nearest_centroid(const RowMatrix& points, const RowMatrix& centroids, std::span<int> labels,
                      std::span<double> dist2, Exec exec) {
  check_centroid_shapes(points, centroids, labels, dist2);
  if (exec == Exec::parallel) {
    parallel::nearest_centroid(points, centroids, labels, dist2);
  } else {
    serial::nearest_centroid(points, centroids, labels, dist2);
  }
}

void gp_posterior(const GpSurrogate& gp, std::span<const ThresholdPair> candidates,
                  std::span<double> mean, std::span<double> variance, Exec exec) {
  if (mean.size() != candidates.size() || variance.size() != candidates.size()) {
    throw Error(ErrorKind::dimension_mismatch, "output spans must match the candidate count");
  }
  if (exec == Exec::parallel) {
    parallel::gp_posterior(gp, candidates, mean, variance);
  } else {
    serial::gp_posterior(gp, candidates, mean, variance);
  }
}

void threshold_utilities(std::span<const ScoredOutcome> table,
                         std::span<const ThresholdPair> candidates, std::span<double> out,
                         Exec exec) {
  if (out.size() != candidates.size()) {
    throw Error(ErrorKind::dimension_mismatch, "output span must match the candidate count");
  }
  if (exec == Exec::parallel) {
    parallel::threshold_utilities(table, candidates, out);
  } else {
    serial::threshold_utilities(table, candidates, out);
  }
}

}  // namespace consroute::kernels
