#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "consroute/net_sim.hpp"
#include "consroute/trace.hpp"
#include "consroute/types.hpp"

namespace consroute {

// Billions of activated parameters per tier.
struct CostModel {
  PerTier<double> activated_params{1.7, 14.0, 32.0};

  void validate() const;
  // Mixed-family deployment whose cloud model is a mixture-of-experts; cost
  // uses activated rather than total parameters.
  static CostModel cross_family() { return {{3.0, 14.0, 37.0}}; }
};

struct UtilityWeights {
  double lambda1 = 1.0;
  double lambda2 = 0.2;
  double lambda3 = 0.2;
  bool normalize_by_cloud = true;

  void validate() const;
  // lambda1 = 1, lambda2 = 1/kappa1, lambda3 = 1/kappa2.
  static UtilityWeights from_kappa(double kappa1, double kappa2, bool normalize = true);
  double kappa1() const { return lambda1 / lambda2; }
  double kappa2() const { return lambda1 / lambda3; }
};

// Mean latency and cost of sending every query to the cloud tier.
struct CloudBaselines {
  double mean_latency_s = 1.0;
  double mean_cost = 1.0;
};

struct UtilityRecord {
  std::string query_id;
  TierId tier = TierId::cloud;
  bool correct = false;
  double latency_s = 0.0;
  double cost = 0.0;
  double utility = 0.0;
};

double inference_cost(const CostModel& model, TierId tier, std::uint64_t generated_tokens);

// Device: compute time only. Edge/cloud: compute plus the link round trip for
// the given window.
double query_latency(TierId tier, const TierResponseInfo& info, const NetworkScenario& scenario,
                     std::size_t window);

// Throws Error(invalid_config) when normalizing against a nonpositive baseline.
double per_query_utility(bool correct, double latency_s, double cost, const UtilityWeights& w,
                         const CloudBaselines& base);

// Evaluates one query served by `tier`.
UtilityRecord account(const QueryRecord& rec, TierId tier, const CostModel& cost,
                      const NetworkScenario& scenario, std::size_t window,
                      const UtilityWeights& w, const CloudBaselines& base);

// Mean of the records' per-query utilities. Throws Error(empty_input).
double cluster_utility(std::span<const UtilityRecord> records, const UtilityWeights& w,
                       const CloudBaselines& base);

// Cloud-only means over the trace under the scenario's first window.
CloudBaselines cloud_baselines(const Trace& trace, const CostModel& cost,
                               const NetworkScenario& scenario);

struct Aggregate {
  std::size_t n = 0;
  std::size_t correct = 0;
  double latency_sum = 0.0;
  double cost_sum = 0.0;
  double utility_sum = 0.0;
  PerTier<std::size_t> tier_counts{};

  void add(const UtilityRecord& r);
  double accuracy() const;
  double mean_latency() const;
  double mean_cost() const;
  double mean_utility() const;
  double tier_share(TierId t) const;
};

// query_id,cluster,tier,correct,latency_s,cost,utility
void write_utility_log_header(std::ostream& out);
void write_utility_log_row(const UtilityRecord& r, std::size_t cluster, std::ostream& out);

}  // namespace consroute
