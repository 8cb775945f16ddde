#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "consroute/trace.hpp"

namespace consroute {

struct LabelConfig {
  double alpha = 0.5;  // weight on reranker similarity vs augmentation signal
  double beta = 0.5;   // weight on the cloud pair vs the edge pair

  void validate() const;
};

struct LabelRow {
  std::string id;
  double sim_cloud = 0.0;
  double sim_edge = 0.0;
  double aug_cloud = 0.0;
  double aug_edge = 0.0;
  double s_cloud = 0.0;
  double s_edge = 0.0;
  double s_fused = 0.0;
};

struct ConsistencyLabels {
  std::vector<LabelRow> rows;  // same order as the source trace

  std::vector<double> fused() const;
};

// Hard rule when references exist: 0 only if the device is wrong while the
// stronger tier is right.
double aug_with_reference(bool device_correct, bool other_correct);

// Judge score passed through; throws Error(missing_score) when absent.
double aug_without_reference(const std::optional<double>& judge_score,
                             const std::string& record_id = {});

double fuse_label(double sim, double aug, double alpha);

ConsistencyLabels build_labels(const Trace& trace, const LabelConfig& cfg);

void write_labels_csv(const ConsistencyLabels& labels, std::ostream& out);
void save_labels_csv(const ConsistencyLabels& labels, const std::filesystem::path& path);

}  // namespace consroute
