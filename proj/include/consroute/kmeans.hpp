#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "consroute/types.hpp"

namespace consroute {

struct ClusterModel {
  std::size_t k = 0;
  RowMatrix centroids;  // k x d
  double inertia = 0.0;
  std::uint64_t seed = 0;

  std::size_t dim() const { return static_cast<std::size_t>(centroids.cols()); }
};

struct KmeansOptions {
  std::size_t restarts = 5;
  std::size_t max_iterations = 300;
};

// One Lloyd run, kept for diagnostics.
struct LloydTrace {
  std::vector<double> inertia;  // after each assignment step
  std::size_t iterations = 0;
  bool converged = false;
};

// k-means++ seeding, Lloyd until the assignment stops changing; best of
// `restarts` runs by inertia.
ClusterModel kmeans_fit(const RowMatrix& embeddings, std::size_t k, std::uint64_t seed,
                        const KmeansOptions& opts = {});

// Lloyd from the given starting centroids. `trace` may be null.
ClusterModel lloyd(const RowMatrix& embeddings, RowMatrix centroids, std::uint64_t seed,
                   std::size_t max_iterations, LloydTrace* trace = nullptr);

struct ElbowSweep {
  std::vector<std::size_t> ks;
  std::vector<double> inertia;
  std::vector<ClusterModel> models;
  std::size_t selected = 0;  // chosen k
};

// Fits every k in [k_min, k_max]. Each k also tries a warm start from the
// previous solution plus the worst-fit point, so the curve never increases.
ElbowSweep elbow_sweep(const RowMatrix& embeddings, std::size_t k_min, std::size_t k_max,
                       std::uint64_t seed, const KmeansOptions& opts = {});
std::size_t elbow_select_k(const RowMatrix& embeddings, std::size_t k_min, std::size_t k_max,
                           std::uint64_t seed);

// Index of the point farthest from the chord of the axis-normalized curve.
// First index wins ties; a flat curve gives 0.
std::size_t knee_index(std::span<const double> curve);

std::size_t assign(const ClusterModel& model, std::span<const double> embedding);
std::vector<int> assign_all(const ClusterModel& model, const RowMatrix& embeddings);

std::vector<std::uint8_t> centroid_bytes(const ClusterModel& model);
ClusterModel centroids_from_bytes(std::vector<std::uint8_t> bytes);
void save_centroids(const ClusterModel& model, const std::filesystem::path& path);
ClusterModel load_centroids(const std::filesystem::path& path);

}  // namespace consroute
