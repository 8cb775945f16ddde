#pragma once

#include "consroute/types.hpp"

namespace consroute {

// Cluster-specific routing cut points; tau1 > tau2, both in [0,1].
struct ThresholdPair {
  double tau1 = 1.0;
  double tau2 = 0.0;

  static bool feasible(double tau1, double tau2) {
    return tau1 >= 0.0 && tau1 <= 1.0 && tau2 >= 0.0 && tau2 <= 1.0 && tau1 > tau2;
  }
  // Throws Error(out_of_range) for infeasible pairs.
  static ThresholdPair make(double tau1, double tau2);

  bool operator==(const ThresholdPair&) const = default;
};

// Strict comparisons: a score equal to a threshold goes to the stronger tier.
constexpr TierId route_tier(double score, const ThresholdPair& pair) {
  if (score > pair.tau1) return TierId::device;
  if (score > pair.tau2) return TierId::edge;
  return TierId::cloud;
}

}  // namespace consroute
