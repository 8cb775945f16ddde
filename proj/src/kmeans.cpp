#include "consroute/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "consroute/binary_io.hpp"
#include "consroute/error.hpp"
#include "consroute/kernels.hpp"

namespace consroute {

namespace {

constexpr std::string_view kMagic = "CRCENT01";

void check_input(const RowMatrix& x, std::size_t k) {
  if (x.rows() == 0 || x.cols() == 0) throw Error(ErrorKind::empty_input, "no embeddings to cluster");
  if (k == 0) throw Error(ErrorKind::invalid_config, "k must be positive");
  if (k > static_cast<std::size_t>(x.rows())) {
    throw Error(ErrorKind::out_of_range, "k=" + std::to_string(k) + " exceeds the " +
                                             std::to_string(x.rows()) + " points");
  }
  if (!x.allFinite()) throw Error(ErrorKind::numerical, "embeddings contain non-finite values");
}

double total(std::span<const double> v) {
  double s = 0.0;
  for (double d : v) s += d;
  return s;
}

RowMatrix plus_plus_seed(const RowMatrix& x, std::size_t k, std::mt19937_64& rng) {
  const auto n = static_cast<std::size_t>(x.rows());
  RowMatrix c(static_cast<Eigen::Index>(k), x.cols());
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::vector<char> taken(n, 0);

  std::size_t pick = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  for (std::size_t j = 0; j < k; ++j) {
    c.row(static_cast<Eigen::Index>(j)) = x.row(static_cast<Eigen::Index>(pick));
    taken[pick] = 1;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], kernels::squared_distance(x, static_cast<Eigen::Index>(i), c,
                                                        static_cast<Eigen::Index>(j)));
    }
    if (j + 1 == k) break;
    const double mass = total(d2);
    if (mass > 0.0) {
      std::discrete_distribution<std::size_t> dist(d2.begin(), d2.end());
      pick = dist(rng);
    } else {
      // All remaining points coincide with chosen centers; take any unused one.
      std::vector<std::size_t> free;
      for (std::size_t i = 0; i < n; ++i) {
        if (!taken[i]) free.push_back(i);
      }
      pick = free[std::uniform_int_distribution<std::size_t>(0, free.size() - 1)(rng)];
    }
  }
  return c;
}

}  // namespace

ClusterModel lloyd(const RowMatrix& x, RowMatrix c, std::uint64_t seed, std::size_t max_iterations,
                   LloydTrace* trace) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto k = static_cast<std::size_t>(c.rows());
  const auto exec = kernels::default_exec();
  std::vector<int> labels(n, -1), next(n);
  std::vector<double> d2(n);

  kernels::nearest_centroid(x, c, next, d2, exec);
  double inertia = total(d2);
  if (trace) trace->inertia.push_back(inertia);

  std::size_t it = 0;
  bool converged = false;
  while (it < max_iterations) {
    if (next == labels) {
      converged = true;
      break;
    }
    labels = next;
    ++it;

    RowMatrix sum = RowMatrix::Zero(c.rows(), c.cols());
    std::vector<std::size_t> count(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sum.row(labels[i]) += x.row(static_cast<Eigen::Index>(i));
      ++count[static_cast<std::size_t>(labels[i])];
    }
    for (std::size_t j = 0; j < k; ++j) {
      const auto r = static_cast<Eigen::Index>(j);
      if (count[j] > 0) {
        c.row(r) = sum.row(r) / static_cast<double>(count[j]);
      } else {
        // Empty cluster: move it onto the worst-served point.
        const auto far = static_cast<std::size_t>(std::max_element(d2.begin(), d2.end()) - d2.begin());
        c.row(r) = x.row(static_cast<Eigen::Index>(far));
        d2[far] = 0.0;
      }
    }
    kernels::nearest_centroid(x, c, next, d2, exec);
    inertia = total(d2);
    if (trace) trace->inertia.push_back(inertia);
  }
  if (!converged && next == labels) converged = true;
  if (trace) {
    trace->iterations = it;
    trace->converged = converged;
  }
  return {k, std::move(c), inertia, seed};
}

ClusterModel kmeans_fit(const RowMatrix& x, std::size_t k, std::uint64_t seed,
                        const KmeansOptions& opts) {
  check_input(x, k);
  if (opts.restarts == 0) throw Error(ErrorKind::invalid_config, "need at least one restart");
  ClusterModel best;
  bool have = false;
  for (std::size_t r = 0; r < opts.restarts; ++r) {
    std::mt19937_64 rng(derive_seed(seed, r));
    ClusterModel m = lloyd(x, plus_plus_seed(x, k, rng), seed, opts.max_iterations);
    if (!have || m.inertia < best.inertia) {
      best = std::move(m);
      have = true;
    }
  }
  return best;
}

std::size_t knee_index(std::span<const double> curve) {
  if (curve.size() < 3) return 0;
  const double lo = *std::min_element(curve.begin(), curve.end());
  const double hi = *std::max_element(curve.begin(), curve.end());
  if (!(hi - lo > 0.0)) return 0;
  const double last = static_cast<double>(curve.size() - 1);
  const double y0 = (curve.front() - lo) / (hi - lo);
  const double y1 = (curve.back() - lo) / (hi - lo);
  // Chord from (0, y0) to (1, y1).
  const double dy = y1 - y0;
  const double norm = std::sqrt(1.0 + dy * dy);
  std::size_t arg = 0;
  double best = 0.0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const double x = static_cast<double>(i) / last;
    const double y = (curve[i] - lo) / (hi - lo);
    const double dist = std::abs(dy * x - (y - y0)) / norm;
    if (dist > best + 1e-12) {
      best = dist;
      arg = i;
    }
  }
  return arg;
}

ElbowSweep elbow_sweep(const RowMatrix& x, std::size_t k_min, std::size_t k_max,
                       std::uint64_t seed, const KmeansOptions& opts) {
  if (k_min < 2 || k_min >= k_max) {
    throw Error(ErrorKind::invalid_config, "elbow range needs 2 <= k_min < k_max");
  }
  check_input(x, k_max);
  ElbowSweep sweep;
  for (std::size_t k = k_min; k <= k_max; ++k) {
    ClusterModel m = kmeans_fit(x, k, seed, opts);
    if (!sweep.models.empty()) {
      const ClusterModel& prev = sweep.models.back();
      std::vector<int> labels(static_cast<std::size_t>(x.rows()));
      std::vector<double> d2(labels.size());
      kernels::nearest_centroid(x, prev.centroids, labels, d2, kernels::default_exec());
      const auto far = std::max_element(d2.begin(), d2.end()) - d2.begin();
      RowMatrix start(prev.centroids.rows() + 1, x.cols());
      start.topRows(prev.centroids.rows()) = prev.centroids;
      start.row(prev.centroids.rows()) = x.row(far);
      ClusterModel warm = lloyd(x, std::move(start), seed, opts.max_iterations);
      if (warm.inertia < m.inertia) m = std::move(warm);
    }
    sweep.ks.push_back(k);
    sweep.inertia.push_back(m.inertia);
    sweep.models.push_back(std::move(m));
  }
  sweep.selected = sweep.ks[knee_index(sweep.inertia)];
  return sweep;
}

std::size_t elbow_select_k(const RowMatrix& x, std::size_t k_min, std::size_t k_max,
                           std::uint64_t seed) {
  return elbow_sweep(x, k_min, k_max, seed).selected;
}

std::size_t assign(const ClusterModel& model, std::span<const double> e) {
  if (e.size() != model.dim()) {
    throw Error(ErrorKind::dimension_mismatch, "embedding has dimension " + std::to_string(e.size()) +
                                                   ", centroids have " + std::to_string(model.dim()));
  }
  std::size_t arg = 0;
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < model.centroids.rows(); ++k) {
    const double* c = model.centroids.data() + k * model.centroids.cols();
    double acc = 0.0;
    for (std::size_t j = 0; j < e.size(); ++j) {
      const double d = e[j] - c[j];
      acc += d * d;
    }
    if (acc < best) {
      best = acc;
      arg = static_cast<std::size_t>(k);
    }
  }
  return arg;
}

std::vector<int> assign_all(const ClusterModel& model, const RowMatrix& x) {
  std::vector<int> labels(static_cast<std::size_t>(x.rows()));
  std::vector<double> d2(labels.size());
  kernels::nearest_centroid(x, model.centroids, labels, d2, kernels::default_exec());
  return labels;
}

std::vector<std::uint8_t> centroid_bytes(const ClusterModel& m) {
  ByteWriter w;
  w.raw(kMagic);
  w.u32(static_cast<std::uint32_t>(m.k));
  w.u32(static_cast<std::uint32_t>(m.dim()));
  w.u64(m.seed);
  w.f64(m.inertia);
  w.f64s({m.centroids.data(), static_cast<std::size_t>(m.centroids.size())});
  w.seal();
  return w.bytes();
}

ClusterModel centroids_from_bytes(std::vector<std::uint8_t> bytes) {
  ByteReader r(std::move(bytes), "centroid file");
  r.verify_seal();
  r.expect_magic(kMagic);
  ClusterModel m;
  m.k = r.u32();
  const std::size_t d = r.u32();
  m.seed = r.u64();
  m.inertia = r.f64();
  if (m.k == 0 || d == 0) throw Error(ErrorKind::integrity, "centroid file has an empty shape");
  const auto values = r.f64s(m.k * d);
  if (!r.at_end()) throw Error(ErrorKind::integrity, "centroid file has trailing bytes");
  m.centroids = Eigen::Map<const RowMatrix>(values.data(), static_cast<Eigen::Index>(m.k),
                                            static_cast<Eigen::Index>(d));
  if (!m.centroids.allFinite()) throw Error(ErrorKind::integrity, "centroid file holds non-finite values");
  return m;
}

void save_centroids(const ClusterModel& model, const std::filesystem::path& path) {
  write_file_bytes(path, centroid_bytes(model));
}

ClusterModel load_centroids(const std::filesystem::path& path) {
  return centroids_from_bytes(read_file_bytes(path));
}

}  // namespace consroute
