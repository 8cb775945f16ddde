#include "consroute/accounting.hpp"

#include <cmath>
#include <ostream>

#include "consroute/error.hpp"
#include "consroute/format.hpp"

namespace consroute {

void CostModel::validate() const {
  for (double p : activated_params) {
    if (!(p > 0.0) || !std::isfinite(p)) {
      throw Error(ErrorKind::invalid_config, "activated parameter counts must be positive");
    }
  }
}

void UtilityWeights::validate() const {
  if (!(lambda1 > 0.0) || !(lambda2 > 0.0) || !(lambda3 > 0.0) ||
      !std::isfinite(lambda1 + lambda2 + lambda3)) {
    throw Error(ErrorKind::invalid_config, "utility weights must be positive and finite");
  }
}

UtilityWeights UtilityWeights::from_kappa(double kappa1, double kappa2, bool normalize) {
  if (!(kappa1 > 0.0) || !(kappa2 > 0.0)) {
    throw Error(ErrorKind::invalid_config, "kappa values must be positive");
  }
  return {1.0, 1.0 / kappa1, 1.0 / kappa2, normalize};
}

double inference_cost(const CostModel& model, TierId tier, std::uint64_t generated_tokens) {
  return model.activated_params[index(tier)] * static_cast<double>(generated_tokens);
}

double query_latency(TierId tier, const TierResponseInfo& info, const NetworkScenario& scenario,
                     std::size_t window) {
  if (tier == TierId::device) return info.compute_seconds;
  return info.compute_seconds + round_trip_latency(scenario_link(scenario, tier, window),
                                                   info.request_bytes, info.response_bytes);
}

double per_query_utility(bool correct, double latency_s, double cost, const UtilityWeights& w,
                         const CloudBaselines& base) {
  double lat = latency_s;
  double c = cost;
  if (w.normalize_by_cloud) {
    if (!(base.mean_latency_s > 0.0) || !(base.mean_cost > 0.0)) {
      throw Error(ErrorKind::invalid_config, "cloud baselines must be positive to normalize");
    }
    lat /= base.mean_latency_s;
    c /= base.mean_cost;
  }
  return w.lambda1 * (correct ? 1.0 : 0.0) - w.lambda2 * lat - w.lambda3 * c;
}

UtilityRecord account(const QueryRecord& rec, TierId tier, const CostModel& cost,
                      const NetworkScenario& scenario, std::size_t window,
                      const UtilityWeights& w, const CloudBaselines& base) {
  const TierResponseInfo& info = rec.tier(tier);
  UtilityRecord r;
  r.query_id = rec.id;
  r.tier = tier;
  r.correct = rec.correct(tier);
  r.latency_s = query_latency(tier, info, scenario, window);
  r.cost = inference_cost(cost, tier, info.generated_tokens);
  r.utility = per_query_utility(r.correct, r.latency_s, r.cost, w, base);
  return r;
}

double cluster_utility(std::span<const UtilityRecord> records, const UtilityWeights& w,
                       const CloudBaselines& base) {
  if (records.empty()) throw Error(ErrorKind::empty_input, "cluster utility over no records");
  double sum = 0.0;
  for (const auto& r : records) sum += per_query_utility(r.correct, r.latency_s, r.cost, w, base);
  return sum / static_cast<double>(records.size());
}

CloudBaselines cloud_baselines(const Trace& trace, const CostModel& cost,
                               const NetworkScenario& scenario) {
  if (trace.records.empty()) throw Error(ErrorKind::empty_input, "cloud baselines need records");
  double lat = 0.0, c = 0.0;
  for (const auto& rec : trace.records) {
    const TierResponseInfo& info = rec.tier(TierId::cloud);
    lat += query_latency(TierId::cloud, info, scenario, 0);
    c += inference_cost(cost, TierId::cloud, info.generated_tokens);
  }
  const double n = static_cast<double>(trace.records.size());
  return {lat / n, c / n};
}

void Aggregate::add(const UtilityRecord& r) {
  ++n;
  correct += r.correct ? 1 : 0;
  latency_sum += r.latency_s;
  cost_sum += r.cost;
  utility_sum += r.utility;
  ++tier_counts[index(r.tier)];
}

namespace {
double safe_mean(double sum, std::size_t n) { return n == 0 ? 0.0 : sum / static_cast<double>(n); }
}  // namespace

double Aggregate::accuracy() const { return safe_mean(static_cast<double>(correct), n); }
double Aggregate::mean_latency() const { return safe_mean(latency_sum, n); }
double Aggregate::mean_cost() const { return safe_mean(cost_sum, n); }
double Aggregate::mean_utility() const { return safe_mean(utility_sum, n); }
double Aggregate::tier_share(TierId t) const {
  return safe_mean(static_cast<double>(tier_counts[index(t)]), n);
}

void write_utility_log_header(std::ostream& out) {
  out << "query_id,cluster,tier,correct,latency_s,cost,utility\n";
}

void write_utility_log_row(const UtilityRecord& r, std::size_t cluster, std::ostream& out) {
  out << r.query_id << ',' << cluster << ',' << to_string(r.tier) << ',' << (r.correct ? 1 : 0)
      << ',' << fmt_real(r.latency_s) << ',' << fmt_real(r.cost) << ',' << fmt_real(r.utility)
      << '\n';
}

}  // namespace consroute
