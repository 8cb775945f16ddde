#include "consroute/router.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <deque>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>

#include <nlohmann/json.hpp>

#include "consroute/binary_io.hpp"
#include "consroute/error.hpp"
#include "consroute/format.hpp"
#include "consroute/kernels.hpp"

namespace consroute {

using Json = nlohmann::ordered_json;

namespace {

constexpr std::uint64_t kMlpSeedTag = 11;
constexpr std::uint64_t kKmeansSeedTag = 12;
constexpr std::uint64_t kOfflineBoTag = 1000;
constexpr std::uint64_t kOnlineBoTag = 2000;

[[noreturn]] void rethrow_in(const std::string& phase) {
  try {
    throw;
  } catch (const Error& e) {
    throw Error(e.kind(), phase + ": " + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorKind::numerical, phase + ": " + e.what());
  }
}

}  // namespace

ThresholdTable::ThresholdTable(std::vector<ThresholdPair> pairs) {
  for (const auto& p : pairs) ThresholdPair::make(p.tau1, p.tau2);
  pairs_ = std::move(pairs);
}

ThresholdTable::ThresholdTable(const ThresholdTable& other) : pairs_(other.snapshot()) {}

ThresholdTable& ThresholdTable::operator=(const ThresholdTable& other) {
  if (this != &other) {
    auto copy = other.snapshot();
    std::unique_lock lock(mu_);
    pairs_ = std::move(copy);
  }
  return *this;
}

std::size_t ThresholdTable::size() const {
  std::shared_lock lock(mu_);
  return pairs_.size();
}

ThresholdPair ThresholdTable::get(std::size_t cluster) const {
  std::shared_lock lock(mu_);
  if (cluster >= pairs_.size()) {
    throw Error(ErrorKind::out_of_range, "no thresholds for cluster " + std::to_string(cluster));
  }
  return pairs_[cluster];
}

void ThresholdTable::set(std::size_t cluster, const ThresholdPair& pair) {
  ThresholdPair::make(pair.tau1, pair.tau2);
  std::unique_lock lock(mu_);
  if (cluster >= pairs_.size()) {
    throw Error(ErrorKind::out_of_range, "no thresholds for cluster " + std::to_string(cluster));
  }
  pairs_[cluster] = pair;
}

std::vector<ThresholdPair> ThresholdTable::snapshot() const {
  std::shared_lock lock(mu_);
  return pairs_;
}

void RouterState::check() const {
  if (clusters.k == 0 || static_cast<std::size_t>(clusters.centroids.rows()) != clusters.k) {
    throw Error(ErrorKind::integrity, "router state has no clusters");
  }
  if (thresholds.size() != clusters.k || observations.size() != clusters.k) {
    throw Error(ErrorKind::integrity, "router state tables do not cover every cluster");
  }
  if (predictor.input_dim() != clusters.dim()) {
    throw Error(ErrorKind::integrity, "predictor and centroids disagree on embedding dimension");
  }
  if (update_interval == 0) throw Error(ErrorKind::integrity, "update interval must be positive");
}

RoutingDecision route_query(const RouterState& state, const QueryRecord& record) {
  RoutingDecision d;
  d.query_id = record.id;
  d.score = state.predictor.predict(record.embedding);
  d.cluster = assign(state.clusters, record.embedding);
  const ThresholdPair pair = state.thresholds.get(d.cluster);
  d.tau1 = pair.tau1;
  d.tau2 = pair.tau2;
  d.tier = route_tier(d.score, pair);
  return d;
}

void OfflineConfig::validate() const {
  labels.validate();
  bo.validate();
  weights.validate();
  cost.validate();
  scenario.validate();
  if (update_interval == 0) throw Error(ErrorKind::invalid_config, "update interval must be positive");
  if (fixed_k) {
    if (*fixed_k == 0) throw Error(ErrorKind::invalid_config, "cluster count must be positive");
  } else if (k_min < 2 || k_min >= k_max) {
    throw Error(ErrorKind::invalid_config, "cluster range needs 2 <= k_min < k_max");
  }
}

namespace {

PerTier<double> tier_utilities(const RouterState& state, const QueryRecord& rec,
                               const NetworkScenario& scenario, std::size_t window) {
  PerTier<double> u{};
  for (TierId t : kAllTiers) {
    u[index(t)] =
        account(rec, t, state.cost, scenario, window, state.weights, state.baselines).utility;
  }
  return u;
}

}  // namespace

std::vector<ScoredOutcome> score_outcomes(const RouterState& state, const Trace& trace,
                                          const NetworkScenario& scenario, std::size_t window) {
  const auto scores = state.predictor.predict_batch(trace.embedding_matrix());
  std::vector<ScoredOutcome> out(trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out[i].score = scores[i];
    out[i].utility = tier_utilities(state, trace.records[i], scenario, window);
  }
  return out;
}

TrainResult train_predictor(const Trace& history, const ConsistencyLabels& labels,
                            MlpConfig cfg, std::uint64_t seed) {
  if (labels.rows.size() != history.size()) {
    throw Error(ErrorKind::dimension_mismatch, "labels do not cover the history trace");
  }
  cfg.input_dim = history.embedding_dim;
  cfg.seed = derive_seed(seed, kMlpSeedTag);
  const auto targets = labels.fused();
  return train(init_mlp(cfg), history.embedding_matrix(), targets, cfg);
}

RouterState run_offline_phase(const Trace& history, const ConsistencyLabels& labels,
                              const OfflineConfig& cfg) {
  cfg.validate();
  if (history.records.empty()) throw Error(ErrorKind::empty_input, "offline phase needs history");
  if (labels.rows.size() != history.size()) {
    throw Error(ErrorKind::dimension_mismatch, "labels do not cover the history trace");
  }

  RouterState state;
  state.weights = cfg.weights;
  state.bo = cfg.bo;
  state.cost = cfg.cost;
  state.update_interval = cfg.update_interval;
  state.seed = cfg.seed;

  const RowMatrix x = history.embedding_matrix();
  try {
    state.predictor = train_predictor(history, labels, cfg.mlp, cfg.seed).model;
  } catch (...) {
    rethrow_in("predictor training");
  }

  try {
    const std::uint64_t kseed = derive_seed(cfg.seed, kKmeansSeedTag);
    if (cfg.fixed_k) {
      state.clusters = kmeans_fit(x, *cfg.fixed_k, kseed, cfg.kmeans);
    } else {
      ElbowSweep sweep = elbow_sweep(x, cfg.k_min, cfg.k_max, kseed, cfg.kmeans);
      state.elbow_ks = sweep.ks;
      state.elbow_inertia = sweep.inertia;
      state.clusters = sweep.models[sweep.selected - sweep.ks.front()];
    }
  } catch (...) {
    rethrow_in("clustering");
  }

  const std::size_t k = state.clusters.k;
  std::vector<std::vector<ScoredOutcome>> tables(k);
  try {
    state.baselines = cloud_baselines(history, state.cost, cfg.scenario);
    const auto outcomes = score_outcomes(state, history, cfg.scenario, 0);
    const auto members = assign_all(state.clusters, x);
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      tables[static_cast<std::size_t>(members[i])].push_back(outcomes[i]);
    }
  } catch (...) {
    rethrow_in("history accounting");
  }

  std::vector<ThresholdPair> pairs(k);
  state.observations.assign(k, ObservationSet(cfg.bo.capacity));
  std::vector<std::exception_ptr> failures(k);
  const auto n_clusters = static_cast<std::int64_t>(k);
#pragma omp parallel for schedule(dynamic, 1) if (cfg.parallel_clusters)
  for (std::int64_t c = 0; c < n_clusters; ++c) {
    const auto ci = static_cast<std::size_t>(c);
    try {
      BoConfig bcfg = cfg.bo;
      bcfg.seed = derive_seed(cfg.seed, kOfflineBoTag + ci);
      const auto& table = tables[ci];
      Evaluator eval = [&table](const ThresholdPair& p) {
        return kernels::mean_routed_utility(table, p);
      };
      OfflineResult r = optimize_offline(eval, bcfg);
      pairs[ci] = r.incumbent;
      state.observations[ci] = std::move(r.observations);
    } catch (...) {
      failures[ci] = std::current_exception();
    }
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (!failures[c]) continue;
    try {
      std::rethrow_exception(failures[c]);
    } catch (...) {
      rethrow_in("threshold search, cluster " + std::to_string(c));
    }
  }
  state.thresholds = ThresholdTable(std::move(pairs));
  return state;
}

namespace {

class WindowAccumulator {
 public:
  WindowAccumulator(StreamReport& report) : report_(report) {}

  void add(const UtilityRecord& r, std::size_t window) {
    if (current_.n > 0 && window != window_) flush();
    window_ = window;
    current_.add(r);
    total_.add(r);
  }

  void finish() {
    if (current_.n > 0) flush();
    report_.totals = metrics(total_, report_.windows.size());
  }

 private:
  static WindowMetrics metrics(const Aggregate& a, std::size_t idx) {
    WindowMetrics m;
    m.index = idx;
    m.n = a.n;
    m.accuracy = a.accuracy();
    m.mean_latency_s = a.mean_latency();
    m.mean_cost = a.mean_cost();
    m.mean_utility = a.mean_utility();
    for (TierId t : kAllTiers) m.tier_fraction[index(t)] = a.tier_share(t);
    return m;
  }

  void flush() {
    report_.windows.push_back(metrics(current_, window_));
    current_ = {};
  }

  StreamReport& report_;
  Aggregate current_;
  Aggregate total_;
  std::size_t window_ = 0;
};

}  // namespace

StreamReport run_stream(RouterState& state, const Trace& stream, const NetworkScenario& scenario,
                        const StreamOptions& options) {
  state.check();
  scenario.validate();
  if (stream.embedding_dim != state.clusters.dim()) {
    throw Error(ErrorKind::dimension_mismatch, "stream embeddings do not match the router state");
  }
  const std::size_t m = state.update_interval;
  const std::size_t k = state.k();

  StreamReport report;
  report.policy = "consroute";
  report.scenario = scenario.name;
  report.online = options.online;
  report.window_size = m;
  WindowAccumulator acc(report);

  struct Recent {
    std::size_t record;
    double score;
  };
  std::vector<std::deque<Recent>> recent(k);
  std::vector<char> fresh(k, 0);

  for (std::size_t i = 0; i < stream.size(); ++i) {
    const std::size_t window = i / m;
    if (i % m == 0) report.threshold_history.push_back(state.thresholds.snapshot());
    const QueryRecord& rec = stream.records[i];
    try {
      RoutingDecision d = route_query(state, rec);
      UtilityRecord u = account(rec, d.tier, state.cost, scenario, window, state.weights,
                                state.baselines);
      state.observations[d.cluster].add({d.tau1, d.tau2}, u.utility);
      auto& r = recent[d.cluster];
      r.push_back({i, d.score});
      while (r.size() > options.recent_capacity) r.pop_front();
      fresh[d.cluster] = 1;
      acc.add(u, window);
      report.decisions.push_back(std::move(d));
      report.utilities.push_back(std::move(u));
    } catch (...) {
      rethrow_in("query " + std::to_string(i));
    }
    ++state.query_counter;

    if (!options.online || (i + 1) % m != 0) continue;
    for (std::size_t c = 0; c < k; ++c) {
      if (!fresh[c]) continue;
      fresh[c] = 0;
      try {
        std::vector<ScoredOutcome> table;
        table.reserve(recent[c].size());
        for (const auto& q : recent[c]) {
          table.push_back({q.score, tier_utilities(state, stream.records[q.record], scenario, window)});
        }
        Evaluator eval = [&table](const ThresholdPair& p) {
          return kernels::mean_routed_utility(table, p);
        };
        std::mt19937_64 rng(derive_seed(derive_seed(state.seed, kOnlineBoTag + c), state.query_counter));
        const RefreshResult r =
            refresh_online(state.observations[c], state.thresholds.get(c), eval, state.bo, rng);
        state.thresholds.set(c, r.incumbent);
        ++report.refreshes;
        if (r.replaced) ++report.replacements;
      } catch (...) {
        rethrow_in("refresh after query " + std::to_string(i) + ", cluster " + std::to_string(c));
      }
    }
  }
  acc.finish();
  return report;
}

std::string BaselinePolicy::name() const {
  switch (kind) {
    case PolicyKind::dlm_only: return "dlm-only";
    case PolicyKind::elm_only: return "elm-only";
    case PolicyKind::clm_only: return "clm-only";
    case PolicyKind::global_static: return "global-static";
  }
  return "?";
}

BaselinePolicy BaselinePolicy::parse(const std::string& name, const ThresholdPair& pair) {
  if (name == "dlm-only") return {PolicyKind::dlm_only, pair};
  if (name == "elm-only") return {PolicyKind::elm_only, pair};
  if (name == "clm-only") return {PolicyKind::clm_only, pair};
  if (name == "global-static") {
    ThresholdPair::make(pair.tau1, pair.tau2);
    return {PolicyKind::global_static, pair};
  }
  throw Error(ErrorKind::invalid_config, "unknown policy '" + name + "'");
}

StreamReport baseline_route(const BaselinePolicy& policy, const Trace& stream,
                            const NetworkScenario& scenario, const RouterState& state) {
  scenario.validate();
  if (state.update_interval == 0) throw Error(ErrorKind::invalid_config, "update interval must be positive");
  const std::size_t m = state.update_interval;
  StreamReport report;
  report.policy = policy.name();
  report.scenario = scenario.name;
  report.window_size = m;
  WindowAccumulator acc(report);

  std::vector<double> scores;
  if (policy.kind == PolicyKind::global_static) {
    ThresholdPair::make(policy.pair.tau1, policy.pair.tau2);
    if (stream.embedding_dim != state.predictor.input_dim()) {
      throw Error(ErrorKind::dimension_mismatch, "stream embeddings do not match the predictor");
    }
    scores = state.predictor.predict_batch(stream.embedding_matrix());
  }

  for (std::size_t i = 0; i < stream.size(); ++i) {
    const std::size_t window = i / m;
    const QueryRecord& rec = stream.records[i];
    RoutingDecision d;
    d.query_id = rec.id;
    switch (policy.kind) {
      case PolicyKind::dlm_only: d.tier = TierId::device; break;
      case PolicyKind::elm_only: d.tier = TierId::edge; break;
      case PolicyKind::clm_only: d.tier = TierId::cloud; break;
      case PolicyKind::global_static:
        d.score = scores[i];
        d.tau1 = policy.pair.tau1;
        d.tau2 = policy.pair.tau2;
        d.tier = route_tier(d.score, policy.pair);
        break;
    }
    if (i % m == 0 && policy.kind == PolicyKind::global_static) {
      report.threshold_history.push_back({policy.pair});
    }
    try {
      UtilityRecord u = account(rec, d.tier, state.cost, scenario, window, state.weights,
                                state.baselines);
      acc.add(u, window);
      report.decisions.push_back(std::move(d));
      report.utilities.push_back(std::move(u));
    } catch (...) {
      rethrow_in("query " + std::to_string(i));
    }
  }
  acc.finish();
  return report;
}

namespace {

Json metrics_json(const WindowMetrics& m) {
  Json j;
  j["index"] = m.index;
  j["n"] = m.n;
  j["accuracy"] = m.accuracy;
  j["mean_latency_s"] = m.mean_latency_s;
  j["mean_cost"] = m.mean_cost;
  j["mean_utility"] = m.mean_utility;
  j["tier_fraction"] = {{"device", m.tier_fraction[0]},
                        {"edge", m.tier_fraction[1]},
                        {"cloud", m.tier_fraction[2]}};
  return j;
}

}  // namespace

void write_report_json(const StreamReport& r, std::ostream& out) {
  Json j;
  j["policy"] = r.policy;
  j["scenario"] = r.scenario;
  j["online"] = r.online;
  j["window_size"] = r.window_size;
  j["queries"] = r.totals.n;
  j["refreshes"] = r.refreshes;
  j["replacements"] = r.replacements;
  j["totals"] = metrics_json(r.totals);
  j["windows"] = Json::array();
  for (const auto& w : r.windows) j["windows"].push_back(metrics_json(w));
  out << j.dump(2) << '\n';
}

void write_windows_csv(const StreamReport& r, std::ostream& out) {
  out << "window,n,accuracy,mean_latency_s,mean_cost,mean_utility,frac_device,frac_edge,frac_cloud\n";
  for (const auto& w : r.windows) {
    out << w.index << ',' << w.n << ',' << fmt_real(w.accuracy) << ',' << fmt_real(w.mean_latency_s)
        << ',' << fmt_real(w.mean_cost) << ',' << fmt_real(w.mean_utility) << ','
        << fmt_real(w.tier_fraction[0]) << ',' << fmt_real(w.tier_fraction[1]) << ','
        << fmt_real(w.tier_fraction[2]) << '\n';
  }
}

void write_threshold_history_csv(const StreamReport& r, std::ostream& out) {
  out << "window,cluster,tau1,tau2\n";
  for (std::size_t w = 0; w < r.threshold_history.size(); ++w) {
    const auto& row = r.threshold_history[w];
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << w << ',' << c << ',' << fmt_real(row[c].tau1) << ',' << fmt_real(row[c].tau2) << '\n';
    }
  }
}

void write_decisions_csv(const StreamReport& r, std::ostream& out) {
  out << "query_id,cluster,score,tau1,tau2,tier,correct,latency_s,cost,utility\n";
  for (std::size_t i = 0; i < r.decisions.size(); ++i) {
    const auto& d = r.decisions[i];
    const auto& u = r.utilities[i];
    out << d.query_id << ',' << d.cluster << ',' << fmt_real(d.score) << ',' << fmt_real(d.tau1)
        << ',' << fmt_real(d.tau2) << ',' << to_string(d.tier) << ',' << (u.correct ? 1 : 0) << ','
        << fmt_real(u.latency_s) << ',' << fmt_real(u.cost) << ',' << fmt_real(u.utility) << '\n';
  }
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::io, "write failed for " + path.string());
}

template <class Fn>
std::string render(Fn&& fn) {
  std::ostringstream os;
  fn(os);
  return os.str();
}

}  // namespace

void save_report(const StreamReport& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "report.json", render([&](std::ostream& o) { write_report_json(r, o); }));
  write_text(dir / "windows.csv", render([&](std::ostream& o) { write_windows_csv(r, o); }));
  write_text(dir / "thresholds.csv", render([&](std::ostream& o) { write_threshold_history_csv(r, o); }));
  write_text(dir / "decisions.csv", render([&](std::ostream& o) { write_decisions_csv(r, o); }));
}

namespace {

constexpr const char* kBundleFormat = "consroute-bundle-1";

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t hash_bytes(std::span<const std::uint8_t> b) { return fnv1a64(b); }

std::uint64_t hash_text(const std::string& s) {
  return fnv1a64({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
}

Json hyper_json(const GpHyper& h) {
  return {{"length_scale", h.length_scale}, {"signal_variance", h.signal_variance},
          {"noise_variance", h.noise_variance}, {"standardize", h.standardize},
          {"jitter", h.jitter}, {"max_jitter", h.max_jitter}};
}

GpHyper hyper_from(const Json& j) {
  GpHyper h;
  h.length_scale = j.at("length_scale").get<double>();
  h.signal_variance = j.at("signal_variance").get<double>();
  h.noise_variance = j.at("noise_variance").get<double>();
  h.standardize = j.at("standardize").get<bool>();
  h.jitter = j.at("jitter").get<double>();
  h.max_jitter = j.at("max_jitter").get<double>();
  return h;
}

std::string observations_text(const RouterState& s) {
  std::ostringstream os;
  write_observations_csv_header(os);
  for (std::size_t c = 0; c < s.observations.size(); ++c) write_observations_csv(c, s.observations[c], os);
  return os.str();
}

struct BundleParts {
  std::vector<std::uint8_t> predictor;
  std::vector<std::uint8_t> centroids;
  std::string observations;
  std::string state;
};

Json state_body(const RouterState& s, const BundleParts& parts) {
  Json j;
  j["format"] = kBundleFormat;
  j["k"] = s.k();
  j["embedding_dim"] = s.clusters.dim();
  j["weights"] = {{"lambda1", s.weights.lambda1},
                  {"lambda2", s.weights.lambda2},
                  {"lambda3", s.weights.lambda3},
                  {"normalize_by_cloud", s.weights.normalize_by_cloud}};
  j["bo"] = {{"offline_budget", s.bo.offline_budget},
             {"online_steps_per_refresh", s.bo.online_steps_per_refresh},
             {"candidate_pool_size", s.bo.candidate_pool_size},
             {"seed_points", s.bo.seed_points},
             {"capacity", s.bo.capacity},
             {"seed", s.bo.seed},
             {"jitter", s.bo.jitter},
             {"offline_hyper", hyper_json(s.bo.offline_hyper)},
             {"online_hyper", hyper_json(s.bo.online_hyper)}};
  j["activated_params"] = {s.cost.activated_params[0], s.cost.activated_params[1],
                           s.cost.activated_params[2]};
  j["cloud_baselines"] = {{"mean_latency_s", s.baselines.mean_latency_s},
                          {"mean_cost", s.baselines.mean_cost}};
  j["update_interval"] = s.update_interval;
  j["query_counter"] = s.query_counter;
  j["seed"] = s.seed;
  j["thresholds"] = Json::array();
  for (const auto& p : s.thresholds.snapshot()) j["thresholds"].push_back({p.tau1, p.tau2});
  j["elbow"] = {{"k", s.elbow_ks}, {"inertia", s.elbow_inertia}};
  j["files"] = {{"predictor.ckpt", hex64(hash_bytes(parts.predictor))},
                {"centroids.bin", hex64(hash_bytes(parts.centroids))},
                {"observations.csv", hex64(hash_text(parts.observations))}};
  return j;
}

BundleParts render_bundle(const RouterState& s) {
  s.check();
  BundleParts parts{checkpoint_bytes(s.predictor), centroid_bytes(s.clusters), observations_text(s), {}};
  Json j = state_body(s, parts);
  j["checksum"] = hex64(hash_text(j.dump()));
  parts.state = j.dump(2) + "\n";
  return parts;
}

[[noreturn]] void corrupt(const std::string& what) {
  throw Error(ErrorKind::integrity, "bundle " + what);
}

std::string read_text(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return {bytes.begin(), bytes.end()};
}

double parse_double(std::string_view s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) corrupt("observations hold a malformed number");
  return v;
}

std::uint64_t parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) corrupt("observations hold a malformed integer");
  return v;
}

void restore_observations(RouterState& s, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::string_view rest(line);
    for (;;) {
      const auto comma = rest.find(',');
      f.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (f.size() != 5) corrupt("observation row has the wrong field count");
    const std::uint64_t c = parse_u64(f[0]);
    if (c >= s.observations.size()) corrupt("observation row names an unknown cluster");
    s.observations[c].restore({{parse_double(f[1]), parse_double(f[2])}, parse_double(f[3]),
                               parse_u64(f[4])});
  }
}

}  // namespace

void save_bundle(const RouterState& state, const std::filesystem::path& dir) {
  const BundleParts parts = render_bundle(state);
  std::filesystem::create_directories(dir);
  write_file_bytes(dir / "predictor.ckpt", parts.predictor);
  write_file_bytes(dir / "centroids.bin", parts.centroids);
  write_text(dir / "observations.csv", parts.observations);
  write_text(dir / "state.json", parts.state);
}

std::uint64_t state_fingerprint(const RouterState& state) {
  return hash_text(render_bundle(state).state);
}

RouterState load_bundle(const std::filesystem::path& dir) {
  for (const char* name : {"state.json", "predictor.ckpt", "centroids.bin", "observations.csv"}) {
    if (!std::filesystem::exists(dir / name)) corrupt("is missing " + (dir / name).string());
  }
  Json j;
  try {
    j = Json::parse(read_text(dir / "state.json"));
    if (!j.is_object() || !j.contains("checksum")) corrupt("state has no checksum");
    const std::string stored = j.at("checksum").get<std::string>();
    j.erase("checksum");
    if (hex64(hash_text(j.dump())) != stored) corrupt("state checksum mismatch");
  } catch (const nlohmann::json::exception& e) {
    corrupt(std::string("state is not valid JSON: ") + e.what());
  }

  try {
    if (j.at("format").get<std::string>() != kBundleFormat) corrupt("has an unknown format");
    const auto predictor_bytes = read_file_bytes(dir / "predictor.ckpt");
    const auto centroid_bytes_ = read_file_bytes(dir / "centroids.bin");
    const std::string obs_text = read_text(dir / "observations.csv");
    const Json& files = j.at("files");
    if (files.at("predictor.ckpt").get<std::string>() != hex64(hash_bytes(predictor_bytes)) ||
        files.at("centroids.bin").get<std::string>() != hex64(hash_bytes(centroid_bytes_)) ||
        files.at("observations.csv").get<std::string>() != hex64(hash_text(obs_text))) {
      corrupt("file hash mismatch");
    }

    RouterState s;
    s.predictor = checkpoint_from_bytes(predictor_bytes, "predictor.ckpt");
    s.clusters = centroids_from_bytes(centroid_bytes_);
    const Json& w = j.at("weights");
    s.weights = {w.at("lambda1").get<double>(), w.at("lambda2").get<double>(),
                 w.at("lambda3").get<double>(), w.at("normalize_by_cloud").get<bool>()};
    const Json& b = j.at("bo");
    s.bo.offline_budget = b.at("offline_budget").get<std::size_t>();
    s.bo.online_steps_per_refresh = b.at("online_steps_per_refresh").get<std::size_t>();
    s.bo.candidate_pool_size = b.at("candidate_pool_size").get<std::size_t>();
    s.bo.seed_points = b.at("seed_points").get<std::size_t>();
    s.bo.capacity = b.at("capacity").get<std::size_t>();
    s.bo.seed = b.at("seed").get<std::uint64_t>();
    s.bo.jitter = b.at("jitter").get<double>();
    s.bo.offline_hyper = hyper_from(b.at("offline_hyper"));
    s.bo.online_hyper = hyper_from(b.at("online_hyper"));
    for (std::size_t t = 0; t < 3; ++t) s.cost.activated_params[t] = j.at("activated_params").at(t).get<double>();
    s.baselines = {j.at("cloud_baselines").at("mean_latency_s").get<double>(),
                   j.at("cloud_baselines").at("mean_cost").get<double>()};
    s.update_interval = j.at("update_interval").get<std::size_t>();
    s.query_counter = j.at("query_counter").get<std::uint64_t>();
    s.seed = j.at("seed").get<std::uint64_t>();
    std::vector<ThresholdPair> pairs;
    for (const auto& p : j.at("thresholds")) pairs.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    s.thresholds = ThresholdTable(std::move(pairs));
    s.elbow_ks = j.at("elbow").at("k").get<std::vector<std::size_t>>();
    s.elbow_inertia = j.at("elbow").at("inertia").get<std::vector<double>>();
    if (j.at("k").get<std::size_t>() != s.k()) corrupt("cluster count disagrees with centroids");
    s.observations.assign(s.k(), ObservationSet(s.bo.capacity));
    restore_observations(s, obs_text);
    s.weights.validate();
    s.bo.validate();
    s.cost.validate();
    s.check();
    return s;
  } catch (const nlohmann::json::exception& e) {
    corrupt(std::string("state is malformed: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::integrity) throw;
    corrupt(e.what());
  }
}

}  // namespace consroute
