#include "consroute/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include <Eigen/QR>

#include "consroute/error.hpp"
#include "consroute/format.hpp"

namespace consroute {

namespace {

double logit(double p) { return std::log(p / (1.0 - p)); }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double clip01(double v) { return std::clamp(v, 0.0, 1.0); }

RowMatrix make_centers(std::size_t k, std::size_t d, double separation, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  RowMatrix centers(k, d);
  if (k <= d) {
    // Scaled orthonormal directions: every pair is exactly `separation` apart.
    Eigen::MatrixXd g(d, k);
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t i = 0; i < d; ++i) g(i, j) = normal(rng);
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, k);
    const double radius = separation / std::sqrt(2.0);
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t i = 0; i < d; ++i) centers(c, i) = radius * q(i, c);
    }
    return centers;
  }
  // More clusters than dimensions: rejection-sample points in a box.
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const double half = separation * std::pow(static_cast<double>(k), 1.0 / d);
  for (std::size_t c = 0; c < k; ++c) {
    for (int attempt = 0;; ++attempt) {
      for (std::size_t i = 0; i < d; ++i) centers(c, i) = half * unif(rng);
      bool ok = true;
      for (std::size_t o = 0; o < c && ok; ++o) {
        ok = (centers.row(c) - centers.row(o)).norm() >= separation;
      }
      if (ok || attempt > 10000) break;
    }
  }
  return centers;
}

std::uint64_t sample_tokens(double median, double log_sigma, double z) {
  double v = std::round(median * std::exp(log_sigma * z));
  return static_cast<std::uint64_t>(std::max(1.0, v));
}

}  // namespace

double TierProfile::at(TierId t) const {
  switch (t) {
    case TierId::device: return device;
    case TierId::edge: return edge;
    case TierId::cloud: return cloud;
  }
  return 0.0;
}

std::vector<TierProfile> default_tier_profile(std::size_t k) {
  static const TierProfile archetypes[] = {
      {0.96, 0.965, 0.97},  // easy
      {0.92, 0.94, 0.95},  // mostly easy
      {0.30, 0.91, 0.93},  // edge-solvable
      {0.20, 0.40, 0.94},  // cloud-only
  };
  std::vector<TierProfile> out;
  out.reserve(k);
  for (std::size_t c = 0; c < k; ++c) out.push_back(archetypes[c % std::size(archetypes)]);
  return out;
}

double true_consistency(double p_device, double p_stronger) {
  return 1.0 - (1.0 - p_device) * p_stronger;
}

std::vector<TierProfile> SyntheticConfig::resolved_profile() const {
  return tier_accuracy_profile.empty() ? default_tier_profile(n_latent_clusters)
                                       : tier_accuracy_profile;
}

void SyntheticConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::invalid_config, msg); };
  if (n_queries == 0) fail("n_queries must be positive");
  if (embedding_dim == 0) fail("embedding_dim must be positive");
  if (n_latent_clusters == 0) fail("n_latent_clusters must be positive");
  if (!(noise_sigma >= 0.0)) fail("noise_sigma must be nonnegative");
  if (!(embedding_sigma > 0.0)) fail("embedding_sigma must be positive");
  if (!(cluster_separation >= 0.0)) fail("cluster_separation must be nonnegative");
  if (!(difficulty_spread >= 0.0)) fail("difficulty_spread must be nonnegative");
  if (!(reference_fraction >= 0.0 && reference_fraction <= 1.0)) {
    fail("reference_fraction must lie in [0,1]");
  }
  auto check_profile = [&](const std::vector<TierProfile>& prof, const char* what) {
    if (prof.size() != n_latent_clusters) {
      fail(std::string(what) + " needs one entry per latent cluster");
    }
    for (const auto& p : prof) {
      for (double v : {p.device, p.edge, p.cloud}) {
        if (!(v > 0.0 && v < 1.0)) fail(std::string(what) + " probabilities must lie in (0,1)");
      }
      if (p.device > p.edge || p.edge > p.cloud) {
        fail(std::string(what) + " must be nondecreasing device -> edge -> cloud");
      }
    }
  };
  check_profile(resolved_profile(), "tier_accuracy_profile");
  if (drift_start) check_profile(drift_profile, "drift_profile");
  if (!cluster_weights.empty()) {
    if (cluster_weights.size() != n_latent_clusters) fail("cluster_weights size mismatch");
    double total = 0.0;
    for (double w : cluster_weights) {
      if (!(w >= 0.0)) fail("cluster_weights must be nonnegative");
      total += w;
    }
    if (!(total > 0.0)) fail("cluster_weights must not all be zero");
  }
  for (TierId t : kAllTiers) {
    if (!(tokens.median_generated[index(t)] >= 1.0)) fail("median_generated must be >= 1");
    if (!(tokens.seconds_per_token[index(t)] >= 0.0) || !(tokens.fixed_seconds[index(t)] >= 0.0)) {
      fail("compute time parameters must be nonnegative");
    }
  }
}

std::pair<Trace, GroundTruth> generate_synthetic_trace(const SyntheticConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.n_queries;
  const std::size_t d = cfg.embedding_dim;
  const std::size_t k = cfg.n_latent_clusters;

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  GroundTruth truth;
  truth.centers = make_centers(k, d, cfg.cluster_separation * cfg.embedding_sigma, rng);

  // Hidden difficulty direction, unit norm.
  Eigen::VectorXd direction(d);
  for (std::size_t i = 0; i < d; ++i) direction(i) = normal(rng);
  direction.normalize();

  std::vector<double> weights = cfg.cluster_weights;
  if (weights.empty()) weights.assign(k, 1.0);
  std::discrete_distribution<int> pick_cluster(weights.begin(), weights.end());

  const auto base_profile = cfg.resolved_profile();
  const PerTier<double> spread_scale{1.0, 0.5, 0.25};

  Trace trace;
  trace.embedding_dim = d;
  trace.metadata["generator"] = "synthetic";
  trace.metadata["seed"] = std::to_string(cfg.seed);
  trace.metadata["n_latent_clusters"] = std::to_string(k);
  trace.metadata["noise_sigma"] = fmt_real(cfg.noise_sigma);
  if (cfg.drift_start) trace.metadata["drift_start"] = std::to_string(*cfg.drift_start);
  trace.records.reserve(n);

  truth.latent_cluster.reserve(n);
  truth.p_correct.reserve(n);
  truth.consistency_cloud.reserve(n);
  truth.consistency_edge.reserve(n);

  Eigen::VectorXd offset(d);
  for (std::size_t q = 0; q < n; ++q) {
    const int c = pick_cluster(rng);
    for (std::size_t i = 0; i < d; ++i) offset(i) = normal(rng);
    const double difficulty = direction.dot(offset);

    QueryRecord rec;
    char id[32];
    std::snprintf(id, sizeof(id), "q%07zu", q);
    rec.id = id;
    rec.embedding.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
      rec.embedding[i] = truth.centers(c, i) + cfg.embedding_sigma * offset(i);
    }

    const bool drifted = cfg.drift_start && q >= *cfg.drift_start;
    const TierProfile& prof = drifted ? cfg.drift_profile[c] : base_profile[c];
    PerTier<double> p{};
    for (TierId t : kAllTiers) {
      p[index(t)] = sigmoid(logit(prof.at(t)) +
                            cfg.difficulty_spread * spread_scale[index(t)] * difficulty);
    }
    p[1] = std::max(p[1], p[0]);
    p[2] = std::max(p[2], p[1]);

    const std::uint64_t prompt_tokens =
        sample_tokens(cfg.tokens.median_prompt, cfg.tokens.prompt_log_sigma, normal(rng));
    for (TierId t : kAllTiers) {
      const std::size_t ti = index(t);
      TierResponseInfo info;
      info.prompt_tokens = prompt_tokens;
      info.generated_tokens = sample_tokens(cfg.tokens.median_generated[ti],
                                            cfg.tokens.generated_log_sigma, normal(rng));
      info.correct = unif(rng) < p[ti];
      info.compute_seconds = cfg.tokens.fixed_seconds[ti] +
                             cfg.tokens.seconds_per_token[ti] *
                                 static_cast<double>(info.generated_tokens);
      info.request_bytes = kBytesPerToken * info.prompt_tokens;
      info.response_bytes = kBytesPerToken * info.generated_tokens;
      rec.tier_info[ti] = info;
    }

    const double cons_cloud = true_consistency(p[0], p[2]);
    const double cons_edge = true_consistency(p[0], p[1]);
    rec.has_reference = unif(rng) < cfg.reference_fraction;
    rec.sim_cloud = clip01(cons_cloud + cfg.noise_sigma * normal(rng));
    rec.sim_edge = clip01(cons_edge + cfg.noise_sigma * normal(rng));
    rec.judge_cloud = clip01(cons_cloud + cfg.noise_sigma * normal(rng));
    rec.judge_edge = clip01(cons_edge + cfg.noise_sigma * normal(rng));

    trace.records.push_back(std::move(rec));
    truth.latent_cluster.push_back(c);
    truth.p_correct.push_back(p);
    truth.consistency_cloud.push_back(cons_cloud);
    truth.consistency_edge.push_back(cons_edge);
  }
  return {std::move(trace), std::move(truth)};
}

}  // namespace consroute
