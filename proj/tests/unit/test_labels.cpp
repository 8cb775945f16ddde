#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "consroute/error.hpp"
#include "consroute/labels.hpp"
#include "consroute/synthetic.hpp"

using namespace consroute;

TEST(Labels, ReferenceRuleCases) {
  EXPECT_EQ(aug_with_reference(false, true), 0.0);
  EXPECT_EQ(aug_with_reference(true, true), 1.0);
  EXPECT_EQ(aug_with_reference(true, false), 1.0);
  EXPECT_EQ(aug_with_reference(false, false), 1.0);
}

TEST(Labels, JudgePassThrough) {
  EXPECT_EQ(aug_without_reference(0.73), 0.73);
  EXPECT_EQ(aug_without_reference(0.0), 0.0);
  EXPECT_EQ(aug_without_reference(1.0), 1.0);
  try {
    aug_without_reference(std::nullopt, "q42");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::missing_score);
    EXPECT_NE(std::string(e.what()).find("q42"), std::string::npos);
  }
}

TEST(Labels, FuseArithmetic) {
  EXPECT_NEAR(fuse_label(0.8, 1.0, 0.5), 0.9, 1e-15);
  EXPECT_NEAR(fuse_label(0.6, 0.2, 0.25), 0.3, 1e-15);
  for (double s : {0.0, 0.37, 1.0}) {
    for (double a : {0.0, 0.5, 1.0}) EXPECT_EQ(fuse_label(s, a, 1.0), s);
  }
}

TEST(Labels, FuseRangeAndMonotonicity) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const double s = u(rng), a = u(rng), alpha = u(rng), ds = u(rng) * (1 - s), da = u(rng) * (1 - a);
    const double f = fuse_label(s, a, alpha);
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 1.0);
    EXPECT_GE(fuse_label(s + ds, a, alpha), f);
    EXPECT_GE(fuse_label(s, a + da, alpha), f);
  }
}

namespace {

QueryRecord referenced(bool dev, bool edge, bool cloud, double sim_cloud, double sim_edge) {
  QueryRecord r;
  r.id = "r";
  r.embedding = {0.0};
  r.has_reference = true;
  const bool bits[] = {dev, edge, cloud};
  for (TierId t : kAllTiers) {
    TierResponseInfo info;
    info.correct = bits[index(t)];
    info.generated_tokens = 1;
    r.tier_info[index(t)] = info;
  }
  r.sim_cloud = sim_cloud;
  r.sim_edge = sim_edge;
  return r;
}

}  // namespace

TEST(Labels, BuildComposesRules) {
  Trace t;
  t.embedding_dim = 1;
  t.records.push_back(referenced(false, true, true, 0.8, 0.6));
  const auto labels = build_labels(t, {0.5, 0.5});
  const LabelRow& row = labels.rows[0];
  EXPECT_NEAR(row.s_cloud, 0.4, 1e-15);
  EXPECT_NEAR(row.s_edge, 0.3, 1e-15);
  EXPECT_EQ(row.s_fused, 0.5 * row.s_cloud + 0.5 * row.s_edge);
  EXPECT_EQ(row.aug_cloud, 0.0);
}

TEST(Labels, ReferenceTakesPrecedenceOverJudge) {
  Trace t;
  t.embedding_dim = 1;
  QueryRecord r = referenced(true, true, true, 0.5, 0.5);
  r.judge_cloud = 0.0;
  r.judge_edge = 0.0;
  t.records.push_back(r);
  const auto labels = build_labels(t, {});
  EXPECT_EQ(labels.rows[0].aug_cloud, 1.0);
  EXPECT_EQ(labels.rows[0].aug_edge, 1.0);
}

TEST(Labels, UnreferencedUsesJudgeAndNeedsIt) {
  Trace t;
  t.embedding_dim = 1;
  QueryRecord r;
  r.id = "u1";
  r.embedding = {0.0};
  r.sim_cloud = 0.2;
  r.sim_edge = 0.4;
  r.judge_cloud = 0.6;
  r.judge_edge = 0.8;
  t.records.push_back(r);
  const auto labels = build_labels(t, {0.5, 0.25});
  EXPECT_NEAR(labels.rows[0].s_cloud, 0.4, 1e-15);
  EXPECT_NEAR(labels.rows[0].s_edge, 0.6, 1e-15);
  EXPECT_EQ(labels.rows[0].s_fused, 0.25 * labels.rows[0].s_cloud + 0.75 * labels.rows[0].s_edge);

  t.records[0].judge_edge.reset();
  try {
    build_labels(t, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::missing_score);
    EXPECT_NE(std::string(e.what()).find("u1"), std::string::npos);
  }
}

TEST(Labels, AlphaHalfIsPlainAverage) {
  SyntheticConfig cfg;
  cfg.n_queries = 300;
  cfg.reference_fraction = 0.5;
  const Trace t = generate_synthetic_trace(cfg).first;
  const auto labels = build_labels(t, {0.5, 0.5});
  for (const auto& row : labels.rows) {
    EXPECT_EQ(row.s_cloud, (row.sim_cloud + row.aug_cloud) / 2.0);
    EXPECT_EQ(row.s_edge, (row.sim_edge + row.aug_edge) / 2.0);
  }
}

TEST(Labels, BetaOneGivesCloudLabel) {
  SyntheticConfig cfg;
  cfg.n_queries = 200;
  const Trace t = generate_synthetic_trace(cfg).first;
  const auto labels = build_labels(t, {0.5, 1.0});
  for (const auto& row : labels.rows) EXPECT_EQ(row.s_fused, row.s_cloud);
}

TEST(Labels, SwappingPairsAndBetaGivesSameFused) {
  SyntheticConfig cfg;
  cfg.n_queries = 300;
  cfg.reference_fraction = 0.0;
  Trace t = generate_synthetic_trace(cfg).first;
  const auto a = build_labels(t, {0.3, 0.8});
  for (auto& r : t.records) {
    std::swap(r.sim_cloud, r.sim_edge);
    std::swap(r.judge_cloud, r.judge_edge);
  }
  const auto b = build_labels(t, {0.3, 0.2});
  for (std::size_t i = 0; i < a.rows.size(); ++i) EXPECT_NEAR(a.rows[i].s_fused, b.rows[i].s_fused, 1e-15);
}

TEST(Labels, AllLabelsInUnitInterval) {
  SyntheticConfig cfg;
  cfg.n_queries = 2000;
  cfg.noise_sigma = 0.3;
  cfg.reference_fraction = 0.5;
  const Trace t = generate_synthetic_trace(cfg).first;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 5; ++rep) {
    const auto labels = build_labels(t, {u(rng), u(rng)});
    for (const auto& r : labels.rows) {
      for (double v : {r.sim_cloud, r.sim_edge, r.aug_cloud, r.aug_edge, r.s_cloud, r.s_edge, r.s_fused}) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
      }
    }
  }
}

TEST(Labels, InvalidConfigAndMissingSim) {
  Trace t;
  t.embedding_dim = 1;
  t.records.push_back(referenced(true, true, true, 0.5, 0.5));
  EXPECT_THROW(build_labels(t, {1.5, 0.5}), Error);
  EXPECT_THROW(build_labels(t, {0.5, -0.1}), Error);
  t.records[0].sim_edge.reset();
  EXPECT_THROW(build_labels(t, {}), Error);
}

TEST(Labels, CsvExport) {
  Trace t;
  t.embedding_dim = 1;
  t.records.push_back(referenced(false, true, true, 0.8, 0.6));
  std::ostringstream os;
  write_labels_csv(build_labels(t, {}), os);
  EXPECT_EQ(os.str().rfind("id,sim_cloud,sim_edge,aug_cloud,aug_edge,s_cloud,s_edge,s_fused\nr,0.8,0.6,0,0,0.4,0.3,", 0), 0u);
}
