#include <gtest/gtest.h>

#include <map>

#include "consroute/error.hpp"
#include "consroute/kmeans.hpp"
#include "consroute/synthetic.hpp"

using namespace consroute;

namespace {

// Fraction of points whose cluster's majority latent label matches their own.
double purity(const std::vector<int>& assigned, const std::vector<int>& latent, std::size_t k) {
  std::vector<std::map<int, std::size_t>> counts(k);
  for (std::size_t i = 0; i < assigned.size(); ++i) ++counts[assigned[i]][latent[i]];
  std::size_t agree = 0;
  for (const auto& c : counts) {
    std::size_t best = 0;
    for (const auto& [label, n] : c) best = std::max(best, n);
    agree += best;
  }
  return static_cast<double>(agree) / static_cast<double>(assigned.size());
}

}  // namespace

TEST(Synthetic, Deterministic) {
  SyntheticConfig cfg;
  cfg.n_queries = 400;
  cfg.seed = 7;
  const auto a = generate_synthetic_trace(cfg);
  const auto b = generate_synthetic_trace(cfg);
  EXPECT_EQ(a.first, b.first);
  EXPECT_EQ(a.second.latent_cluster, b.second.latent_cluster);
  cfg.seed = 8;
  EXPECT_NE(generate_synthetic_trace(cfg).first, a.first);
}

TEST(Synthetic, ZeroNoiseScoresEqualTrueConsistency) {
  SyntheticConfig cfg;
  cfg.n_queries = 500;
  cfg.noise_sigma = 0.0;
  const auto [t, gt] = generate_synthetic_trace(cfg);
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_EQ(*t.records[i].sim_cloud, gt.consistency_cloud[i]);
    EXPECT_EQ(*t.records[i].sim_edge, gt.consistency_edge[i]);
    EXPECT_EQ(*t.records[i].judge_cloud, gt.consistency_cloud[i]);
    // independent oracle for the consistency formula
    const auto& p = gt.p_correct[i];
    EXPECT_DOUBLE_EQ(gt.consistency_cloud[i], p[0] + (1.0 - p[0]) * (1.0 - p[2]));
  }
}

TEST(Synthetic, TrueConsistencyMatchesEnumeration) {
  // P(not (device wrong and other right)) by enumerating the four outcomes.
  for (double pd : {0.1, 0.5, 0.93}) {
    for (double pt : {0.2, 0.6, 0.99}) {
      const double both = pd * pt, dev_only = pd * (1 - pt), none = (1 - pd) * (1 - pt);
      EXPECT_NEAR(true_consistency(pd, pt), both + dev_only + none, 1e-15);
    }
  }
}

TEST(Synthetic, CentersExactlySeparated) {
  SyntheticConfig cfg;
  cfg.n_queries = 10;
  cfg.n_latent_clusters = 5;
  cfg.cluster_separation = 10.0;
  const auto gt = generate_synthetic_trace(cfg).second;
  for (int a = 0; a < 5; ++a) {
    for (int b = a + 1; b < 5; ++b) {
      EXPECT_NEAR((gt.centers.row(a) - gt.centers.row(b)).norm(), 10.0, 1e-9);
    }
  }
}

TEST(Synthetic, KmeansRecoversLatentClusters) {
  SyntheticConfig cfg;
  cfg.n_queries = 1500;
  cfg.n_latent_clusters = 3;
  cfg.seed = 5;
  const auto [t, gt] = generate_synthetic_trace(cfg);
  const ClusterModel m = kmeans_fit(t.embedding_matrix(), 3, 1);
  EXPECT_GE(purity(assign_all(m, t.embedding_matrix()), gt.latent_cluster, 3), 0.95);
}

TEST(Synthetic, MarginalAccuracyMonotoneAcrossTiers) {
  SyntheticConfig cfg;
  cfg.n_queries = 6000;
  cfg.seed = 2;
  const auto t = generate_synthetic_trace(cfg).first;
  PerTier<double> rate{};
  for (const auto& r : t.records) {
    for (TierId tier : kAllTiers) rate[index(tier)] += r.correct(tier) ? 1.0 : 0.0;
  }
  for (double& v : rate) v /= static_cast<double>(t.size());
  EXPECT_LE(rate[0], rate[1] + 0.02);
  EXPECT_LE(rate[1], rate[2] + 0.02);
}

TEST(Synthetic, ProbabilitiesMonotonePerQuery) {
  SyntheticConfig cfg;
  cfg.n_queries = 1000;
  cfg.difficulty_spread = 3.0;
  const auto gt = generate_synthetic_trace(cfg).second;
  for (const auto& p : gt.p_correct) {
    EXPECT_LE(p[0], p[1]);
    EXPECT_LE(p[1], p[2]);
  }
}

TEST(Synthetic, BytesFollowTokens) {
  SyntheticConfig cfg;
  cfg.n_queries = 50;
  const auto t = generate_synthetic_trace(cfg).first;
  for (const auto& r : t.records) {
    for (TierId tier : kAllTiers) {
      const auto& info = r.tier(tier);
      EXPECT_EQ(info.request_bytes, 4 * info.prompt_tokens);
      EXPECT_EQ(info.response_bytes, 4 * info.generated_tokens);
      EXPECT_GE(info.generated_tokens, 1u);
    }
  }
}

TEST(Synthetic, DriftChangesProfile) {
  SyntheticConfig cfg;
  cfg.n_queries = 8000;
  cfg.n_latent_clusters = 1;
  cfg.tier_accuracy_profile = {{0.9, 0.92, 0.95}};
  cfg.difficulty_spread = 0.0;
  cfg.drift_start = 4000;
  cfg.drift_profile = {{0.2, 0.92, 0.95}};
  const auto [t, gt] = generate_synthetic_trace(cfg);
  double before = 0.0, after = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    (i < 4000 ? before : after) += t.records[i].correct(TierId::device) ? 1.0 : 0.0;
  }
  EXPECT_NEAR(before / 4000, 0.9, 0.03);
  EXPECT_NEAR(after / 4000, 0.2, 0.03);
  EXPECT_NEAR(gt.p_correct[7999][0], 0.2, 1e-12);
}

TEST(Synthetic, ReferenceFraction) {
  SyntheticConfig cfg;
  cfg.n_queries = 4000;
  cfg.reference_fraction = 0.25;
  const auto t = generate_synthetic_trace(cfg).first;
  double refs = 0;
  for (const auto& r : t.records) refs += r.has_reference ? 1 : 0;
  EXPECT_NEAR(refs / 4000, 0.25, 0.03);
}

TEST(Synthetic, InvalidConfigs) {
  SyntheticConfig cfg;
  cfg.tier_accuracy_profile = {{0.9, 0.8, 0.95}, {0.5, 0.6, 0.7}, {0.5, 0.6, 0.7}, {0.5, 0.6, 0.7}};
  EXPECT_THROW(generate_synthetic_trace(cfg), Error);
  cfg = {};
  cfg.n_queries = 0;
  EXPECT_THROW(generate_synthetic_trace(cfg), Error);
  cfg = {};
  cfg.tier_accuracy_profile = {{0.5, 0.6, 0.7}};
  EXPECT_THROW(generate_synthetic_trace(cfg), Error);
  cfg = {};
  cfg.drift_start = 10;
  EXPECT_THROW(generate_synthetic_trace(cfg), Error);
}
