#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "consroute/types.hpp"

namespace consroute {

// Fixed instruction appended to every query before EOS pooling on the device
// model. Recorded in trace headers as provenance; never interpreted here.
inline constexpr std::string_view kConsistencyPrompt =
    "How closely would the on-device answer to this query agree with a "
    "stronger model's answer?";

inline constexpr std::uint64_t kBytesPerToken = 4;

struct TierResponseInfo {
  std::optional<bool> correct;
  std::uint64_t prompt_tokens = 0;
  std::uint64_t generated_tokens = 0;
  double compute_seconds = 0.0;
  std::uint64_t request_bytes = 0;
  std::uint64_t response_bytes = 0;

  bool operator==(const TierResponseInfo&) const = default;
};

struct QueryRecord {
  std::string id;
  std::vector<double> embedding;
  PerTier<std::optional<TierResponseInfo>> tier_info;
  std::optional<double> sim_cloud;
  std::optional<double> sim_edge;
  std::optional<double> judge_cloud;
  std::optional<double> judge_edge;
  bool has_reference = false;

  // Throws Error(missing_tier) when the tier has no recorded response.
  const TierResponseInfo& tier(TierId t) const;
  // Throws Error(missing_score) when the tier has no correctness bit.
  bool correct(TierId t) const;

  bool operator==(const QueryRecord&) const = default;
};

struct Trace {
  std::vector<QueryRecord> records;
  std::size_t embedding_dim = 0;
  std::string prompt_text{kConsistencyPrompt};
  std::map<std::string, std::string> metadata;

  std::size_t size() const { return records.size(); }
  RowMatrix embedding_matrix() const;
  // Records [begin, end) with the same header.
  Trace slice(std::size_t begin, std::size_t end) const;

  bool operator==(const Trace&) const = default;
};

// Checks every Trace/QueryRecord invariant, throwing the matching Error kind.
void validate(const Trace& trace);

Trace parse_trace(std::istream& in);
Trace load_trace(const std::filesystem::path& path);
void write_trace(const Trace& trace, std::ostream& out);
void save_trace(const Trace& trace, const std::filesystem::path& path);

}  // namespace consroute
