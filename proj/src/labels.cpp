#include "consroute/labels.hpp"

#include <fstream>
#include <ostream>

#include "consroute/error.hpp"
#include "consroute/format.hpp"

namespace consroute {

void LabelConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorKind::invalid_config, "alpha must lie in [0,1]");
  if (!(beta >= 0.0 && beta <= 1.0)) throw Error(ErrorKind::invalid_config, "beta must lie in [0,1]");
}

std::vector<double> ConsistencyLabels::fused() const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.s_fused);
  return out;
}

double aug_with_reference(bool device_correct, bool other_correct) {
  return (!device_correct && other_correct) ? 0.0 : 1.0;
}

double aug_without_reference(const std::optional<double>& judge_score,
                             const std::string& record_id) {
  if (!judge_score) {
    throw Error(ErrorKind::missing_score, "record '" + record_id + "' has no judge score");
  }
  return *judge_score;
}

double fuse_label(double sim, double aug, double alpha) {
  return alpha * sim + (1.0 - alpha) * aug;
}

ConsistencyLabels build_labels(const Trace& trace, const LabelConfig& cfg) {
  cfg.validate();
  ConsistencyLabels labels;
  labels.rows.reserve(trace.size());
  for (const auto& rec : trace.records) {
    if (!rec.sim_cloud || !rec.sim_edge) {
      throw Error(ErrorKind::missing_score, "record '" + rec.id + "' has no similarity score");
    }
    LabelRow row;
    row.id = rec.id;
    row.sim_cloud = *rec.sim_cloud;
    row.sim_edge = *rec.sim_edge;
    if (rec.has_reference) {
      const bool dev = rec.correct(TierId::device);
      row.aug_cloud = aug_with_reference(dev, rec.correct(TierId::cloud));
      row.aug_edge = aug_with_reference(dev, rec.correct(TierId::edge));
    } else {
      row.aug_cloud = aug_without_reference(rec.judge_cloud, rec.id);
      row.aug_edge = aug_without_reference(rec.judge_edge, rec.id);
    }
    row.s_cloud = fuse_label(row.sim_cloud, row.aug_cloud, cfg.alpha);
    row.s_edge = fuse_label(row.sim_edge, row.aug_edge, cfg.alpha);
    row.s_fused = cfg.beta * row.s_cloud + (1.0 - cfg.beta) * row.s_edge;
    labels.rows.push_back(std::move(row));
  }
  return labels;
}

void write_labels_csv(const ConsistencyLabels& labels, std::ostream& out) {
  out << "id,sim_cloud,sim_edge,aug_cloud,aug_edge,s_cloud,s_edge,s_fused\n";
  for (const auto& r : labels.rows) {
    out << r.id << ',' << fmt_real(r.sim_cloud) << ',' << fmt_real(r.sim_edge) << ','
        << fmt_real(r.aug_cloud) << ',' << fmt_real(r.aug_edge) << ',' << fmt_real(r.s_cloud)
        << ',' << fmt_real(r.s_edge) << ',' << fmt_real(r.s_fused) << '\n';
  }
}

void save_labels_csv(const ConsistencyLabels& labels, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  write_labels_csv(labels, out);
}

}  // namespace consroute
