#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "consroute/trace.hpp"
#include "consroute/types.hpp"

namespace consroute {

// Per-cluster probability that each tier answers correctly.
struct TierProfile {
  double device = 0.5;
  double edge = 0.5;
  double cloud = 0.5;

  double at(TierId t) const;
};

struct TokenModel {
  PerTier<double> median_generated{64.0, 64.0, 64.0};
  double generated_log_sigma = 0.35;
  double median_prompt = 80.0;
  double prompt_log_sigma = 0.5;
  // compute_seconds = fixed + per_token * generated_tokens
  PerTier<double> seconds_per_token{0.015, 0.020, 0.030};
  PerTier<double> fixed_seconds{0.05, 0.02, 0.02};
};

struct SyntheticConfig {
  std::size_t n_queries = 2000;
  std::size_t embedding_dim = 64;
  std::size_t n_latent_clusters = 4;
  std::uint64_t seed = 0;
  double noise_sigma = 0.05;
  // Empty means default_tier_profile(n_latent_clusters).
  std::vector<TierProfile> tier_accuracy_profile;
  TokenModel tokens;
  // Pairwise distance between latent centers, in units of embedding_sigma.
  double cluster_separation = 12.0;
  double embedding_sigma = 1.0;
  // Logit-scale spread of per-query difficulty along a hidden direction of the
  // within-cluster offset. The device tier gets the full spread, edge half,
  // cloud a quarter.
  double difficulty_spread = 0.75;
  // Fraction of records carrying ground-truth references; the rest are
  // labelled through judge scores.
  double reference_fraction = 1.0;
  // Mixture weights over latent clusters; empty means uniform.
  std::vector<double> cluster_weights;
  // From this record index on, drift_profile replaces tier_accuracy_profile.
  std::optional<std::size_t> drift_start;
  std::vector<TierProfile> drift_profile;

  std::vector<TierProfile> resolved_profile() const;
  // Throws Error(invalid_config).
  void validate() const;
};

// Latent quantities behind a synthetic trace.
struct GroundTruth {
  std::vector<int> latent_cluster;
  std::vector<PerTier<double>> p_correct;
  // 1 - P(device wrong and stronger tier right), tiers sampled independently.
  std::vector<double> consistency_cloud;
  std::vector<double> consistency_edge;
  RowMatrix centers;

  double fused(std::size_t i, double beta) const {
    return beta * consistency_cloud[i] + (1.0 - beta) * consistency_edge[i];
  }
};

// Four archetypes cycled over k clusters: easy, mostly easy, edge-solvable and
// cloud-only.
std::vector<TierProfile> default_tier_profile(std::size_t k);

// P(device answer is not beaten by the stronger tier) under independence.
double true_consistency(double p_device, double p_stronger);

std::pair<Trace, GroundTruth> generate_synthetic_trace(const SyntheticConfig& cfg);

}  // namespace consroute
