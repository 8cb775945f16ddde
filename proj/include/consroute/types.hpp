#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>

#include <Eigen/Core>

namespace consroute {

// Serving tiers, ordered by capability.
enum class TierId : std::uint8_t { device = 0, edge = 1, cloud = 2 };

inline constexpr std::array<TierId, 3> kAllTiers{TierId::device, TierId::edge,
                                                 TierId::cloud};

constexpr std::size_t index(TierId tier) { return static_cast<std::size_t>(tier); }

std::string_view to_string(TierId tier);
TierId tier_from_string(std::string_view name);

template <class T>
using PerTier = std::array<T, 3>;

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// splitmix64 finalizer over (base, tag); used to fan one experiment seed out
// into independent sub-seeds.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (tag + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace consroute
