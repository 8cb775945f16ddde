#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "consroute/error.hpp"
#include "consroute/kmeans.hpp"
#include "consroute/synthetic.hpp"

using namespace consroute;

namespace {

RowMatrix two_clouds(std::size_t per_cloud, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 0.3);
  RowMatrix x(2 * per_cloud, 2);
  for (std::size_t i = 0; i < 2 * per_cloud; ++i) {
    const double cx = i < per_cloud ? -5.0 : 5.0;
    x(i, 0) = cx + normal(rng);
    x(i, 1) = 1.0 + normal(rng);
  }
  return x;
}

double brute_inertia(const RowMatrix& x, const RowMatrix& c) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < c.rows(); ++j) best = std::min(best, (x.row(i) - c.row(j)).squaredNorm());
    total += best;
  }
  return total;
}

RowMatrix synthetic_embeddings(std::size_t k, double separation, std::uint64_t seed) {
  SyntheticConfig cfg;
  cfg.n_queries = 1200;
  cfg.embedding_dim = 16;
  cfg.n_latent_clusters = k;
  cfg.cluster_separation = separation;
  cfg.tier_accuracy_profile.assign(k, TierProfile{0.5, 0.6, 0.7});
  cfg.seed = seed;
  return generate_synthetic_trace(cfg).first.embedding_matrix();
}

}  // namespace

TEST(Kmeans, RecoversTwoCloudMeans) {
  const RowMatrix x = two_clouds(200, 1);
  const ClusterModel m = kmeans_fit(x, 2, 3);
  const Eigen::RowVectorXd left = x.topRows(200).colwise().mean();
  const Eigen::RowVectorXd right = x.bottomRows(200).colwise().mean();
  const bool first_left = m.centroids(0, 0) < 0;
  EXPECT_LT((m.centroids.row(first_left ? 0 : 1) - left).norm(), 0.1);
  EXPECT_LT((m.centroids.row(first_left ? 1 : 0) - right).norm(), 0.1);
  // And against the generating means.
  EXPECT_NEAR(std::abs(m.centroids(0, 0)), 5.0, 0.1);
  EXPECT_NEAR(m.centroids(0, 1), 1.0, 0.1);
}

TEST(Kmeans, SingleClusterIsGlobalMean) {
  const RowMatrix x = two_clouds(50, 2);
  const ClusterModel m = kmeans_fit(x, 1, 0);
  const Eigen::RowVectorXd mean = x.colwise().mean();
  EXPECT_NEAR(m.centroids(0, 0), mean(0), 1e-12);
  EXPECT_NEAR(m.centroids(0, 1), mean(1), 1e-12);
  EXPECT_NEAR(m.inertia, brute_inertia(x, m.centroids), 1e-9);
}

TEST(Kmeans, KEqualsNHasZeroInertia) {
  const RowMatrix x = two_clouds(6, 3);
  EXPECT_EQ(kmeans_fit(x, 12, 0).inertia, 0.0);
}

TEST(Kmeans, InertiaMatchesDefinition) {
  const RowMatrix x = synthetic_embeddings(4, 8.0, 2);
  const ClusterModel m = kmeans_fit(x, 5, 9);
  EXPECT_NEAR(m.inertia, brute_inertia(x, m.centroids), 1e-6 * m.inertia);
}

TEST(Kmeans, LloydInertiaNonincreasing) {
  const RowMatrix x = synthetic_embeddings(4, 3.0, 4);
  LloydTrace trace;
  RowMatrix init = x.topRows(6);
  lloyd(x, init, 1, 300, &trace);
  ASSERT_GE(trace.inertia.size(), 2u);
  for (std::size_t i = 1; i < trace.inertia.size(); ++i) {
    EXPECT_LE(trace.inertia[i], trace.inertia[i - 1] + 1e-9);
  }
  EXPECT_TRUE(trace.converged);
}

TEST(Kmeans, Errors) {
  const RowMatrix x = two_clouds(2, 1);
  try {
    kmeans_fit(x, 5, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::out_of_range);
  }
  try {
    kmeans_fit(RowMatrix(0, 3), 1, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::empty_input);
  }
  const ClusterModel m = kmeans_fit(x, 2, 0);
  const std::vector<double> wrong(3, 0.0);
  try {
    assign(m, wrong);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::dimension_mismatch);
  }
  EXPECT_THROW(elbow_sweep(x, 1, 3, 0), Error);
  EXPECT_THROW(elbow_sweep(x, 3, 3, 0), Error);
}

TEST(Kmeans, ElbowFindsThreeClusters) {
  EXPECT_EQ(elbow_select_k(synthetic_embeddings(3, 12.0, 1), 2, 10, 7), 3u);
}

TEST(Kmeans, ElbowFindsFiveClusters) {
  EXPECT_EQ(elbow_select_k(synthetic_embeddings(5, 10.0, 2), 2, 12, 7), 5u);
}

TEST(Kmeans, KneeOfLinearCurveIsFirst) {
  const std::vector<double> linear{10, 9, 8, 7, 6, 5, 4};
  EXPECT_EQ(knee_index(linear), 0u);
  const std::vector<double> flat{3, 3, 3};
  EXPECT_EQ(knee_index(flat), 0u);
  const std::vector<double> elbow{100, 20, 15, 12, 10};
  EXPECT_EQ(knee_index(elbow), 1u);
}

TEST(Kmeans, KneeMatchesChordOracle) {
  // Independent chord-distance computation on random convex curves.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> curve{100.0};
    for (int i = 0; i < 8; ++i) curve.push_back(curve.back() * u(rng));
    const double n = static_cast<double>(curve.size() - 1);
    const double lo = curve.back(), hi = curve.front();
    std::size_t best = 0;
    double best_d = 0.0;
    for (std::size_t i = 0; i < curve.size(); ++i) {
      const double x = i / n, y = (curve[i] - lo) / (hi - lo);
      // chord from (0,1) to (1,0): x + y - 1 = 0
      const double d = std::abs(x + y - 1.0) / std::sqrt(2.0);
      if (d > best_d + 1e-12) {
        best_d = d;
        best = i;
      }
    }
    EXPECT_EQ(knee_index(curve), best);
  }
}

TEST(Kmeans, SweepInertiaMonotone) {
  const RowMatrix x = synthetic_embeddings(4, 4.0, 6);
  const ElbowSweep sweep = elbow_sweep(x, 2, 12, 3);
  ASSERT_EQ(sweep.ks.size(), 11u);
  for (std::size_t i = 1; i < sweep.inertia.size(); ++i) {
    EXPECT_LE(sweep.inertia[i], sweep.inertia[i - 1] + 1e-9);
  }
  for (std::size_t i = 0; i < sweep.models.size(); ++i) EXPECT_EQ(sweep.models[i].k, sweep.ks[i]);
}

TEST(Kmeans, AssignExamples) {
  ClusterModel m;
  m.k = 3;
  m.centroids.resize(3, 2);
  m.centroids << 0, 0, 2, 0, 5, 5;
  EXPECT_EQ(assign(m, std::vector<double>{5, 5}), 2u);
  EXPECT_EQ(assign(m, std::vector<double>{1, 0}), 0u);
  EXPECT_EQ(assign(m, std::vector<double>{1.1, 0}), 1u);
  for (std::size_t k = 0; k < 3; ++k) {
    const std::vector<double> c{m.centroids(k, 0), m.centroids(k, 1)};
    EXPECT_EQ(assign(m, c), k);
  }
}

TEST(Kmeans, AssignIdempotentOnFittedCentroids) {
  const ClusterModel m = kmeans_fit(synthetic_embeddings(4, 8.0, 3), 6, 2);
  for (std::size_t k = 0; k < m.k; ++k) {
    const std::vector<double> c(m.centroids.row(k).data(), m.centroids.row(k).data() + m.dim());
    EXPECT_EQ(assign(m, c), k);
  }
}

TEST(Kmeans, Deterministic) {
  const RowMatrix x = synthetic_embeddings(4, 5.0, 8);
  const ClusterModel a = kmeans_fit(x, 4, 11);
  const ClusterModel b = kmeans_fit(x, 4, 11);
  EXPECT_EQ(a.centroids, b.centroids);
  EXPECT_EQ(a.inertia, b.inertia);
  EXPECT_EQ(centroid_bytes(a), centroid_bytes(b));
}

TEST(Kmeans, CentroidFileRoundTripAndCorruption) {
  const ClusterModel m = kmeans_fit(two_clouds(20, 4), 3, 5);
  const auto bytes = centroid_bytes(m);
  const ClusterModel back = centroids_from_bytes(bytes);
  EXPECT_EQ(back.centroids, m.centroids);
  EXPECT_EQ(back.k, m.k);
  EXPECT_EQ(back.seed, m.seed);
  EXPECT_EQ(back.inertia, m.inertia);

  const auto dir = std::filesystem::temp_directory_path() / "consroute_kmeans_test";
  std::filesystem::create_directories(dir);
  save_centroids(m, dir / "c.bin");
  EXPECT_EQ(load_centroids(dir / "c.bin").centroids, m.centroids);
  std::filesystem::remove_all(dir);

  for (std::size_t pos : {std::size_t{2}, std::size_t{10}, bytes.size() - 20}) {
    auto bad = bytes;
    bad[pos] ^= 0x40;
    try {
      centroids_from_bytes(bad);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::integrity);
    }
  }
}
