#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "consroute/bayes_opt.hpp"
#include "consroute/error.hpp"

using namespace consroute;

namespace {

double concave(const ThresholdPair& p) {
  return 1.0 - (p.tau1 - 0.7) * (p.tau1 - 0.7) - (p.tau2 - 0.4) * (p.tau2 - 0.4);
}

double bowl(const ThresholdPair& p) { return concave(p) - 1.0; }

// 200x200 grid restricted to tau1 > tau2.
double grid_max(const Evaluator& f) {
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < 200; ++i) {
    for (int j = 0; j < 200; ++j) {
      const double t1 = i / 199.0, t2 = j / 199.0;
      if (t1 > t2) best = std::max(best, f({t1, t2}));
    }
  }
  return best;
}

Evaluator peak_at(double c1, double c2) {
  return [=](const ThresholdPair& p) {
    const double d2 = (p.tau1 - c1) * (p.tau1 - c1) + (p.tau2 - c2) * (p.tau2 - c2);
    return std::exp(-d2 / (2 * 0.15 * 0.15));
  };
}

}  // namespace

TEST(BayesOpt, TriangleSamplesFeasible) {
  std::mt19937_64 rng(0);
  double sum1 = 0.0, sum2 = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const auto p = sample_triangle(rng);
    ASSERT_TRUE(ThresholdPair::feasible(p.tau1, p.tau2));
    sum1 += p.tau1;
    sum2 += p.tau2;
  }
  // Uniform on the triangle: E[tau1] = 2/3, E[tau2] = 1/3.
  EXPECT_NEAR(sum1 / n, 2.0 / 3.0, 0.01);
  EXPECT_NEAR(sum2 / n, 1.0 / 3.0, 0.01);
}

TEST(BayesOpt, ThresholdPairMake) {
  EXPECT_NO_THROW(ThresholdPair::make(0.5, 0.2));
  EXPECT_THROW(ThresholdPair::make(0.2, 0.2), Error);
  EXPECT_THROW(ThresholdPair::make(1.2, 0.2), Error);
  EXPECT_THROW(ThresholdPair::make(0.5, -0.1), Error);
}

TEST(BayesOpt, ProposalsFeasible) {
  ObservationSet obs(16);
  obs.add({0.8, 0.3}, 0.4);
  obs.add({0.5, 0.1}, 0.1);
  const auto gp = gp_fit(obs, GpHyper{});
  BoConfig cfg;
  cfg.candidate_pool_size = 4;
  std::mt19937_64 rng(3);
  for (int i = 0; i < 10000; ++i) {
    const auto p = propose_thresholds(gp, obs, cfg, rng);
    ASSERT_GT(p.tau1, p.tau2);
    ASSERT_GE(p.tau2, 0.0);
    ASSERT_LE(p.tau1, 1.0);
  }
}

TEST(BayesOpt, PoolOfOneReturnsThatCandidate) {
  ObservationSet obs(16);
  obs.add({0.8, 0.3}, 0.4);
  const auto gp = gp_fit(obs, GpHyper{});
  BoConfig cfg;
  cfg.candidate_pool_size = 1;
  std::mt19937_64 a(11), b(11);
  const auto expected = sample_triangle(b);
  EXPECT_EQ(propose_thresholds(gp, obs, cfg, a), expected);
}

TEST(BayesOpt, ProposalMaximizesEiOverPool) {
  ObservationSet obs(16);
  obs.add({0.8, 0.3}, 0.4);
  obs.add({0.5, 0.1}, 0.1);
  obs.add({0.3, 0.2}, 0.9);
  const auto gp = gp_fit(obs, GpHyper{});
  BoConfig cfg;
  cfg.candidate_pool_size = 64;
  std::mt19937_64 a(5), b(5);
  const auto chosen = propose_thresholds(gp, obs, cfg, a);
  double best_ei = -1.0;
  ThresholdPair best{};
  for (std::size_t i = 0; i < 64; ++i) {
    const auto c = sample_triangle(b);
    const double ei = expected_improvement(gp, c, obs.best().utility);
    if (ei > best_ei) {
      best_ei = ei;
      best = c;
    }
  }
  EXPECT_EQ(chosen, best);
}

TEST(BayesOpt, OfflineFindsConcaveOptimum) {
  BoConfig cfg;
  cfg.seed = 4;
  cfg.offline_budget = 30;
  const auto res = optimize_offline(concave, cfg);
  const double oracle = grid_max(concave);
  EXPECT_GE(res.incumbent_utility, 0.98 * oracle);
  EXPECT_GE(bowl(res.incumbent), grid_max(bowl) - 0.05);
  EXPECT_EQ(res.observations.size(), cfg.seed_points + cfg.offline_budget);
  EXPECT_EQ(res.incumbent_utility, concave(res.incumbent));
  EXPECT_EQ(res.incumbent, res.observations.best().pair);
}

TEST(BayesOpt, ConstantEvaluator) {
  BoConfig cfg;
  const auto res = optimize_offline([](const ThresholdPair&) { return 0.0; }, cfg);
  EXPECT_TRUE(ThresholdPair::feasible(res.incumbent.tau1, res.incumbent.tau2));
  for (const auto& o : res.observations.points()) EXPECT_EQ(o.utility, 0.0);
}

TEST(BayesOpt, Deterministic) {
  BoConfig cfg;
  cfg.seed = 99;
  const auto a = optimize_offline(peak_at(0.9, 0.75), cfg);
  const auto b = optimize_offline(peak_at(0.9, 0.75), cfg);
  EXPECT_EQ(a.incumbent, b.incumbent);
  EXPECT_EQ(a.incumbent_utility, b.incumbent_utility);
  ASSERT_EQ(a.observations.size(), b.observations.size());
  for (std::size_t i = 0; i < a.observations.size(); ++i) {
    EXPECT_EQ(a.observations.points()[i].pair, b.observations.points()[i].pair);
  }
}

TEST(BayesOpt, EvaluatorFailureNamesIteration) {
  BoConfig cfg;
  int calls = 0;
  try {
    optimize_offline(
        [&](const ThresholdPair&) -> double {
          if (++calls == 12) throw std::runtime_error("boom");
          return 0.0;
        },
        cfg);
    FAIL();
  } catch (const std::exception& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("boom"), std::string::npos);
    EXPECT_NE(msg.find("iteration"), std::string::npos);
  }
}

TEST(BayesOpt, NonFiniteUtilityRejected) {
  BoConfig cfg;
  EXPECT_THROW(optimize_offline([](const ThresholdPair&) { return std::nan(""); }, cfg), std::exception);
}

TEST(BayesOpt, ObservationEvictionKeepsMostRecent) {
  ObservationSet obs(5);
  for (int i = 0; i < 12; ++i) obs.add({0.9, 0.1}, i);
  EXPECT_EQ(obs.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(obs.points()[i].utility, 7.0 + i);
    EXPECT_EQ(obs.points()[i].index, 7u + i);
  }
  EXPECT_EQ(obs.best().utility, 11.0);
}

TEST(BayesOpt, BestPicksFirstOfTies) {
  ObservationSet obs(8);
  obs.add({0.9, 0.1}, 1.0);
  obs.add({0.8, 0.1}, 1.0);
  EXPECT_EQ(obs.best().pair, (ThresholdPair{0.9, 0.1}));
}

TEST(BayesOpt, OnlineNoStepsKeepsIncumbent) {
  BoConfig cfg;
  const auto off = optimize_offline(concave, cfg);
  ObservationSet obs = off.observations;
  cfg.online_steps_per_refresh = 0;
  std::mt19937_64 rng(1);
  const auto res = refresh_online(obs, off.incumbent, peak_at(0.2, 0.1), cfg, rng);
  EXPECT_EQ(res.incumbent, off.incumbent);
  EXPECT_FALSE(res.replaced);
}

TEST(BayesOpt, OnlineUtilityNeverDecreasesUnderFixedEvaluator) {
  BoConfig cfg;
  cfg.seed = 2;
  const Evaluator f = peak_at(0.9, 0.75);
  const auto off = optimize_offline(f, cfg);
  ObservationSet obs = off.observations;
  ThresholdPair inc = off.incumbent;
  double last = off.incumbent_utility;
  std::mt19937_64 rng(8);
  for (int r = 0; r < 20; ++r) {
    const auto res = refresh_online(obs, inc, f, cfg, rng);
    EXPECT_GE(res.incumbent_utility, last);
    EXPECT_EQ(res.incumbent_utility, f(res.incumbent));
    last = res.incumbent_utility;
    inc = res.incumbent;
    EXPECT_LE(obs.size(), cfg.capacity);
  }
}

TEST(BayesOpt, OnlineTracksShiftedOptimum) {
  BoConfig cfg;
  cfg.capacity = 16;
  cfg.seed = 6;
  const auto off = optimize_offline(peak_at(0.9, 0.6), cfg);
  EXPECT_LE(std::max(std::abs(off.incumbent.tau1 - 0.9), std::abs(off.incumbent.tau2 - 0.6)), 0.1);
  ObservationSet obs = off.observations;
  ThresholdPair inc = off.incumbent;
  std::mt19937_64 rng(3);
  const Evaluator shifted = peak_at(0.5, 0.2);
  for (int r = 0; r < 10; ++r) {
    inc = refresh_online(obs, inc, shifted, cfg, rng).incumbent;
    EXPECT_LE(obs.size(), 16u);
  }
  EXPECT_LE(std::max(std::abs(inc.tau1 - 0.5), std::abs(inc.tau2 - 0.2)), 0.1);
}

TEST(BayesOpt, ConfigValidation) {
  BoConfig cfg;
  cfg.candidate_pool_size = 0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.capacity = 0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.jitter = -1;
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(BayesOpt, ObservationCsv) {
  ObservationSet obs(4);
  obs.add({0.75, 0.5}, 0.25);
  std::ostringstream os;
  write_observations_csv_header(os);
  write_observations_csv(3, obs, os);
  EXPECT_EQ(os.str(), "cluster,tau1,tau2,utility,index\n3,0.75,0.5,0.25,0\n");
}
