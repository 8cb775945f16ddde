#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "consroute/accounting.hpp"
#include "consroute/bayes_opt.hpp"
#include "consroute/kernels.hpp"
#include "consroute/kmeans.hpp"
#include "consroute/labels.hpp"
#include "consroute/mlp.hpp"
#include "consroute/net_sim.hpp"
#include "consroute/threshold.hpp"
#include "consroute/trace.hpp"

namespace consroute {

// Per-cluster threshold pairs. Readers and the updater may run on different
// threads; each entry is replaced as a whole under the lock.
class ThresholdTable {
 public:
  ThresholdTable() = default;
  explicit ThresholdTable(std::vector<ThresholdPair> pairs);
  ThresholdTable(const ThresholdTable& other);
  ThresholdTable& operator=(const ThresholdTable& other);

  std::size_t size() const;
  // Throws Error(out_of_range) for an unknown cluster.
  ThresholdPair get(std::size_t cluster) const;
  // Throws Error(out_of_range) for an unknown cluster or infeasible pair.
  void set(std::size_t cluster, const ThresholdPair& pair);
  std::vector<ThresholdPair> snapshot() const;

 private:
  mutable std::shared_mutex mu_;
  std::vector<ThresholdPair> pairs_;
};

struct RouterState {
  MlpModel predictor;
  ClusterModel clusters;
  ThresholdTable thresholds;
  std::vector<ObservationSet> observations;
  UtilityWeights weights;
  BoConfig bo;
  CostModel cost;
  CloudBaselines baselines;
  std::size_t update_interval = 200;
  std::uint64_t query_counter = 0;
  std::uint64_t seed = 0;
  // Elbow diagnostics from the offline phase.
  std::vector<std::size_t> elbow_ks;
  std::vector<double> elbow_inertia;

  std::size_t k() const { return clusters.k; }
  // Throws Error(integrity) when tables are not keyed for every cluster or
  // the predictor and centroids disagree on the embedding dimension.
  void check() const;
};

struct RoutingDecision {
  std::string query_id;
  double score = 0.0;
  std::size_t cluster = 0;
  TierId tier = TierId::cloud;
  double tau1 = 1.0;
  double tau2 = 0.0;
};

RoutingDecision route_query(const RouterState& state, const QueryRecord& record);

struct OfflineConfig {
  LabelConfig labels;
  MlpConfig mlp;  // input_dim is taken from the trace
  std::size_t k_min = 2;
  std::size_t k_max = 12;
  std::optional<std::size_t> fixed_k;
  KmeansOptions kmeans;
  BoConfig bo;
  UtilityWeights weights;
  CostModel cost;
  NetworkScenario scenario = builtin_scenario("good");
  std::size_t update_interval = 200;
  std::uint64_t seed = 0;
  // Per-cluster BO runs concurrently; results do not depend on this flag.
  bool parallel_clusters = false;

  void validate() const;
};

// Predictor training as done by the offline phase: input_dim from the trace,
// seed derived from `seed`.
TrainResult train_predictor(const Trace& history, const ConsistencyLabels& labels,
                            MlpConfig cfg, std::uint64_t seed);

// Trains the predictor, clusters the history, and tunes every cluster's
// thresholds against the history's counterfactual outcomes.
RouterState run_offline_phase(const Trace& history, const ConsistencyLabels& labels,
                              const OfflineConfig& cfg);

struct WindowMetrics {
  std::size_t index = 0;
  std::size_t n = 0;
  double accuracy = 0.0;
  double mean_latency_s = 0.0;
  double mean_cost = 0.0;
  double mean_utility = 0.0;
  PerTier<double> tier_fraction{};
};

struct StreamReport {
  std::string policy;
  std::string scenario;
  bool online = false;
  std::size_t window_size = 200;
  std::vector<WindowMetrics> windows;
  WindowMetrics totals;
  // Thresholds in force during each window, one vector per window.
  std::vector<std::vector<ThresholdPair>> threshold_history;
  std::size_t refreshes = 0;
  std::size_t replacements = 0;
  std::vector<RoutingDecision> decisions;
  std::vector<UtilityRecord> utilities;
};

struct StreamOptions {
  bool online = true;
  // Queries per cluster kept for counterfactual re-evaluation.
  std::size_t recent_capacity = 256;
};

// Routes the stream in order, logging utilities into the per-cluster
// observation sets. With options.online, every update_interval queries the
// clusters that saw new data get a BO refresh. The state is updated in place.
StreamReport run_stream(RouterState& state, const Trace& stream, const NetworkScenario& scenario,
                        const StreamOptions& options = {});

enum class PolicyKind { dlm_only, elm_only, clm_only, global_static };

struct BaselinePolicy {
  PolicyKind kind = PolicyKind::clm_only;
  ThresholdPair pair;  // global_static only

  std::string name() const;
  // "dlm-only", "elm-only", "clm-only", "global-static".
  static BaselinePolicy parse(const std::string& name, const ThresholdPair& pair = {});
};

// Fixed-policy routing with the state's accounting parameters; global_static
// scores queries with the state's predictor.
StreamReport baseline_route(const BaselinePolicy& policy, const Trace& stream,
                            const NetworkScenario& scenario, const RouterState& state);

// Predicted score plus each tier's utility for every record, with latency
// taken from the given window of the scenario.
std::vector<ScoredOutcome> score_outcomes(const RouterState& state, const Trace& trace,
                                          const NetworkScenario& scenario, std::size_t window);

// Hash over everything save_bundle writes.
std::uint64_t state_fingerprint(const RouterState& state);

void write_report_json(const StreamReport& report, std::ostream& out);
void write_windows_csv(const StreamReport& report, std::ostream& out);
void write_threshold_history_csv(const StreamReport& report, std::ostream& out);
void write_decisions_csv(const StreamReport& report, std::ostream& out);
void save_report(const StreamReport& report, const std::filesystem::path& dir);

// Bundle directory: predictor.ckpt, centroids.bin, observations.csv and a
// state.json carrying the remaining fields plus content hashes of the others.
void save_bundle(const RouterState& state, const std::filesystem::path& dir);
// Throws Error(integrity) when any file is missing, altered or inconsistent.
RouterState load_bundle(const std::filesystem::path& dir);

}  // namespace consroute
