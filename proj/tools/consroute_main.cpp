// consroute command-line front end.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "consroute/accounting.hpp"
#include "consroute/binary_io.hpp"
#include "consroute/error.hpp"
#include "consroute/format.hpp"
#include "consroute/labels.hpp"
#include "consroute/mlp.hpp"
#include "consroute/net_sim.hpp"
#include "consroute/router.hpp"
#include "consroute/synthetic.hpp"
#include "consroute/trace.hpp"
#include "consroute/version.hpp"
#include "json_lines_config.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;
using namespace consroute;

namespace {

struct Options {
  std::string command;
  std::uint64_t seed = 0;
  std::string out;

  // synthetic world
  std::size_t n = 2000;
  std::size_t dim = 64;
  std::size_t clusters = 4;
  double noise = 0.05;
  double separation = 12.0;
  double spread = 0.75;
  double reference_fraction = 1.0;
  std::string tier_profile;
  std::optional<std::size_t> drift_start;
  std::string drift_profile;
  std::optional<std::size_t> history_size;

  std::string trace;
  std::vector<std::string> bundles;

  double alpha = 0.5;
  double beta = 0.5;

  std::vector<std::size_t> hidden{256, 64};
  std::string activation = "relu";
  double lr = 1e-3;
  std::size_t batch = 64;
  std::size_t epochs = 100;
  std::size_t patience = 10;
  double val_fraction = 0.1;

  std::size_t k_min = 2;
  std::size_t k_max = 12;
  std::optional<std::size_t> k;

  std::size_t bo_budget = 80;
  std::size_t online_steps = 4;
  std::size_t pool = 512;
  std::size_t seed_points = 8;
  std::size_t capacity = 512;

  double lambda1 = 1.0;
  double lambda2 = 0.2;
  double lambda3 = 0.2;
  std::optional<double> kappa1;
  std::optional<double> kappa2;
  bool raw_units = false;
  std::vector<double> kappa_sweep;
  std::vector<double> kappa2_sweep;
  std::string cost_model = "default";

  std::string network = "good";
  std::optional<std::size_t> switch_window;
  std::size_t interval = 200;
  bool static_mode = false;
  std::string policy = "consroute";
  double tau1 = 0.8;
  double tau2 = 0.5;
  std::size_t grid = 20;
  bool parallel_clusters = false;
};

// Phase-labelled failure carrying the exit code.
struct CliFailure {
  int code;
  std::string message;
};

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::numerical:
    case ErrorKind::training_diverged:
      return 1;
    default:
      return 2;
  }
}

template <class Fn>
auto phase(const std::string& name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw CliFailure{exit_code_for(e.kind()), name + ": " + e.what()};
  } catch (const CliFailure&) {
    throw;
  } catch (const std::exception& e) {
    throw CliFailure{1, name + ": " + e.what()};
  }
}

[[noreturn]] void user_error(const std::string& msg) { throw CliFailure{2, msg}; }

std::vector<double> parse_reals(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      user_error("not a number: '" + item + "'");
    }
  }
  return out;
}

// "d,e,c;d,e,c;..." -> one profile per cluster.
std::vector<TierProfile> parse_profile(const std::string& text) {
  std::vector<TierProfile> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    const auto v = parse_reals(item);
    if (v.size() != 3) user_error("tier profile entries need three accuracies: '" + item + "'");
    out.push_back({v[0], v[1], v[2]});
  }
  return out;
}

SyntheticConfig synthetic_config(const Options& o) {
  SyntheticConfig c;
  c.n_queries = o.n;
  c.embedding_dim = o.dim;
  c.n_latent_clusters = o.clusters;
  c.seed = derive_seed(o.seed, 1);
  c.noise_sigma = o.noise;
  c.cluster_separation = o.separation;
  c.difficulty_spread = o.spread;
  c.reference_fraction = o.reference_fraction;
  if (!o.tier_profile.empty()) c.tier_accuracy_profile = parse_profile(o.tier_profile);
  c.drift_start = o.drift_start;
  if (!o.drift_profile.empty()) c.drift_profile = parse_profile(o.drift_profile);
  return c;
}

UtilityWeights weights_for(const Options& o, std::optional<double> k1, std::optional<double> k2) {
  UtilityWeights w{o.lambda1, o.lambda2, o.lambda3, !o.raw_units};
  if (k1) w.lambda2 = w.lambda1 / *k1;
  if (k2) w.lambda3 = w.lambda1 / *k2;
  return w;
}

CostModel cost_for(const Options& o) {
  if (o.cost_model == "default") return {};
  if (o.cost_model == "cross-family") return CostModel::cross_family();
  const auto v = parse_reals(o.cost_model);
  if (v.size() != 3) user_error("--cost-model needs 'default', 'cross-family' or three numbers");
  CostModel m{{v[0], v[1], v[2]}};
  return m;
}

NetworkScenario scenario_for(const Options& o) {
  return phase("network", [&] {
    const auto builtins = builtin_profiles();
    NetworkScenario s = builtins.count(o.network) ? builtin_scenario(o.network)
                                                  : load_scenario(o.network);
    if (o.switch_window) {
      if (!s.after) user_error("--switch-window needs a switching network profile");
      s.switch_at = o.switch_window;
    }
    s.validate();
    return s;
  });
}

MlpConfig mlp_config(const Options& o) {
  MlpConfig m;
  m.hidden_dims = o.hidden;
  if (o.activation == "relu") {
    m.activation = Activation::relu;
  } else if (o.activation == "tanh") {
    m.activation = Activation::tanh;
  } else {
    user_error("unknown activation '" + o.activation + "'");
  }
  m.learning_rate = o.lr;
  m.batch_size = o.batch;
  m.max_epochs = o.epochs;
  m.early_stop_patience = o.patience;
  m.validation_fraction = o.val_fraction;
  return m;
}

BoConfig bo_config(const Options& o) {
  BoConfig b;
  b.offline_budget = o.bo_budget;
  b.online_steps_per_refresh = o.online_steps;
  b.candidate_pool_size = o.pool;
  b.seed_points = o.seed_points;
  b.capacity = o.capacity;
  return b;
}

Json options_json(const Options& o) {
  Json j;
  j["seed"] = o.seed;
  j["synthetic"] = {{"n", o.n}, {"dim", o.dim}, {"clusters", o.clusters}, {"noise", o.noise},
                    {"separation", o.separation}, {"spread", o.spread},
                    {"reference_fraction", o.reference_fraction},
                    {"tier_profile", o.tier_profile},
                    {"drift_start", o.drift_start ? Json(*o.drift_start) : Json()},
                    {"drift_profile", o.drift_profile},
                    {"history_size", o.history_size ? Json(*o.history_size) : Json()}};
  j["labels"] = {{"alpha", o.alpha}, {"beta", o.beta}};
  j["mlp"] = {{"hidden", o.hidden}, {"activation", o.activation}, {"lr", o.lr},
              {"batch", o.batch}, {"epochs", o.epochs}, {"patience", o.patience},
              {"val_fraction", o.val_fraction}};
  j["clusters"] = {{"k_min", o.k_min}, {"k_max", o.k_max}, {"k", o.k ? Json(*o.k) : Json()}};
  j["bo"] = {{"budget", o.bo_budget}, {"online_steps", o.online_steps}, {"pool", o.pool},
             {"seed_points", o.seed_points}, {"capacity", o.capacity}};
  j["utility"] = {{"lambda1", o.lambda1}, {"lambda2", o.lambda2}, {"lambda3", o.lambda3},
                  {"kappa1", o.kappa1 ? Json(*o.kappa1) : Json()},
                  {"kappa2", o.kappa2 ? Json(*o.kappa2) : Json()},
                  {"raw_units", o.raw_units}, {"kappa_sweep", o.kappa_sweep},
                  {"kappa2_sweep", o.kappa2_sweep}, {"cost_model", o.cost_model}};
  j["stream"] = {{"network", o.network},
                 {"switch_window", o.switch_window ? Json(*o.switch_window) : Json()},
                 {"interval", o.interval}, {"static", o.static_mode}, {"policy", o.policy},
                 {"tau1", o.tau1}, {"tau2", o.tau2}, {"grid", o.grid},
                 {"parallel_clusters", o.parallel_clusters}};
  return j;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << v;
  return os.str();
}

std::uint64_t hash_text(const std::string& s) {
  return fnv1a64({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
}

std::uint64_t hash_file(const fs::path& p) { return fnv1a64(read_file_bytes(p)); }

std::uint64_t hash_dir(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::string acc;
  for (const auto& f : files) acc += f.filename().string() + ":" + hex64(hash_file(f)) + ";";
  return hash_text(acc);
}

class Outputs {
 public:
  Outputs(const Options& o) : opts_(o), dir_(o.out) {
    phase("output", [&] { fs::create_directories(dir_); });
  }

  const fs::path& dir() const { return dir_; }

  void text(const std::string& name, const std::string& body) {
    phase("output", [&] {
      const fs::path p = dir_ / name;
      fs::create_directories(p.parent_path());
      std::ofstream out(p, std::ios::binary);
      if (!out) throw Error(ErrorKind::io, "cannot write " + p.string());
      out << body;
    });
  }

  template <class Fn>
  void render(const std::string& name, Fn&& fn) {
    std::ostringstream os;
    fn(os);
    text(name, os.str());
  }

  void input(const std::string& role, const std::string& digest) { inputs_[role] = digest; }

  void manifest() {
    Json j;
    j["tool"] = "consroute";
    j["version"] = kVersion;
    j["command"] = opts_.command;
    j["seed"] = opts_.seed;
    const Json cfg = options_json(opts_);
    j["config_hash"] = hex64(hash_text(cfg.dump()));
    j["config"] = cfg;
    j["inputs"] = inputs_;
    text("manifest.json", j.dump(2) + "\n");
  }

 private:
  const Options& opts_;
  fs::path dir_;
  Json inputs_ = Json::object();
};

Trace load_input_trace(const Options& o, Outputs& out) {
  if (o.trace.empty()) user_error("--trace is required");
  const fs::path p(o.trace);
  if (!fs::exists(p)) user_error("trace file not found: " + p.string());
  Trace t = phase("loading trace " + p.string(), [&] { return load_trace(p); });
  out.input("trace", hex64(hash_file(p)));
  return t;
}

// Training data: an explicit trace or a synthetic world, never both.
Trace history_trace(const Options& o, const CLI::App& app, Outputs& out) {
  static const char* synthetic_flags[] = {"--n", "--dim", "--clusters", "--noise", "--separation",
                                          "--spread", "--reference-fraction", "--tier-profile",
                                          "--drift-start", "--drift-profile"};
  bool synthetic_set = false;
  for (const char* f : synthetic_flags) synthetic_set = synthetic_set || app.count(f) > 0;
  if (!o.trace.empty()) {
    if (synthetic_set) user_error("give either --trace or synthetic world options, not both");
    return load_input_trace(o, out);
  }
  return phase("synthetic trace", [&] { return generate_synthetic_trace(synthetic_config(o)).first; });
}

void cmd_gen(const Options& o, Outputs& out) {
  auto [trace, gt] = phase("synthetic trace", [&] { return generate_synthetic_trace(synthetic_config(o)); });
  auto dump = [&](const std::string& name, const Trace& t) {
    out.render(name, [&](std::ostream& os) { write_trace(t, os); });
  };
  if (o.history_size) {
    if (*o.history_size == 0 || *o.history_size >= trace.size()) {
      user_error("--history-size must lie strictly between 0 and --n");
    }
    dump("history.jsonl", trace.slice(0, *o.history_size));
    dump("stream.jsonl", trace.slice(*o.history_size, trace.size()));
  } else {
    dump("trace.jsonl", trace);
  }
  out.render("ground_truth.csv", [&](std::ostream& os) {
    os << "id,latent_cluster,p_device,p_edge,p_cloud,consistency_cloud,consistency_edge\n";
    for (std::size_t i = 0; i < trace.size(); ++i) {
      os << trace.records[i].id << ',' << gt.latent_cluster[i] << ',' << fmt_real(gt.p_correct[i][0])
         << ',' << fmt_real(gt.p_correct[i][1]) << ',' << fmt_real(gt.p_correct[i][2]) << ','
         << fmt_real(gt.consistency_cloud[i]) << ',' << fmt_real(gt.consistency_edge[i]) << '\n';
    }
  });
  out.manifest();
}

ConsistencyLabels labels_for(const Options& o, const Trace& t) {
  return phase("labels", [&] { return build_labels(t, {o.alpha, o.beta}); });
}

void cmd_train(const Options& o, const CLI::App& app, Outputs& out) {
  const Trace history = history_trace(o, app, out);
  const ConsistencyLabels labels = labels_for(o, history);
  const MlpConfig mcfg = mlp_config(o);
  const TrainResult result =
      phase("training", [&] { return train_predictor(history, labels, mcfg, o.seed); });

  out.render("labels.csv", [&](std::ostream& os) { write_labels_csv(labels, os); });
  phase("output", [&] {
    const auto bytes = checkpoint_bytes(result.model);
    out.text("predictor.ckpt", std::string(bytes.begin(), bytes.end()));
  });
  const TrainReport& r = result.report;
  Json j;
  j["epochs_run"] = r.epochs_run;
  j["best_epoch"] = r.best_epoch;
  j["final_train_mse"] = r.final_train_mse;
  j["final_val_mse"] = r.final_val_mse;
  j["parameters"] = result.model.parameter_count();
  out.text("train_report.json", j.dump(2) + "\n");
  out.render("loss_curve.csv", [&](std::ostream& os) {
    os << "epoch,train_mse,val_mse\n";
    for (const auto& e : r.loss_curve) {
      os << e.epoch << ',' << fmt_real(e.train_mse) << ',' << fmt_real(e.val_mse) << '\n';
    }
  });
  out.manifest();
}

std::string kappa_dir(double k1, double k2) {
  return "bundles/kappa1_" + fmt_real(k1) + "_kappa2_" + fmt_real(k2);
}

void cmd_tune(const Options& o, const CLI::App& app, Outputs& out) {
  const Trace history = history_trace(o, app, out);
  const ConsistencyLabels labels = labels_for(o, history);

  OfflineConfig base;
  base.labels = {o.alpha, o.beta};
  base.mlp = mlp_config(o);
  base.k_min = o.k_min;
  base.k_max = o.k_max;
  base.fixed_k = o.k;
  base.bo = bo_config(o);
  base.cost = cost_for(o);
  base.scenario = scenario_for(o);
  base.update_interval = o.interval;
  base.seed = o.seed;
  base.parallel_clusters = o.parallel_clusters;

  struct Point {
    std::optional<double> k1, k2;
  };
  std::vector<Point> points;
  if (o.kappa_sweep.empty()) {
    if (!o.kappa2_sweep.empty()) user_error("--kappa2-sweep needs --kappa-sweep");
    points.push_back({o.kappa1, o.kappa2});
  } else if (o.kappa2_sweep.empty()) {
    for (double k : o.kappa_sweep) points.push_back({k, k});
  } else {
    for (double k1 : o.kappa_sweep) {
      for (double k2 : o.kappa2_sweep) points.push_back({k1, k2});
    }
  }

  std::ostringstream summary;
  summary << "bundle,kappa1,kappa2,k,cluster,tau1,tau2\n";
  for (const Point& p : points) {
    OfflineConfig cfg = base;
    cfg.weights = weights_for(o, p.k1, p.k2);
    const std::string name =
        o.kappa_sweep.empty() ? std::string("bundle") : kappa_dir(cfg.weights.kappa1(), cfg.weights.kappa2());
    RouterState state = phase("tune " + name, [&] { return run_offline_phase(history, labels, cfg); });
    phase("output", [&] { save_bundle(state, out.dir() / name); });
    const auto pairs = state.thresholds.snapshot();
    for (std::size_t c = 0; c < pairs.size(); ++c) {
      summary << name << ',' << fmt_real(cfg.weights.kappa1()) << ',' << fmt_real(cfg.weights.kappa2())
              << ',' << state.k() << ',' << c << ',' << fmt_real(pairs[c].tau1) << ','
              << fmt_real(pairs[c].tau2) << '\n';
    }
    if (points.size() == 1) {
      out.render("elbow.csv", [&](std::ostream& os) {
        os << "k,inertia\n";
        for (std::size_t i = 0; i < state.elbow_ks.size(); ++i) {
          os << state.elbow_ks[i] << ',' << fmt_real(state.elbow_inertia[i]) << '\n';
        }
      });
    }
  }
  out.text("tune_summary.csv", summary.str());
  out.manifest();
}

RouterState load_state(const std::string& dir, Outputs& out, const std::string& role) {
  if (!fs::is_directory(dir)) user_error("bundle directory not found: " + dir);
  RouterState s = phase("loading bundle " + dir, [&] { return load_bundle(dir); });
  out.input(role, hex64(hash_dir(dir)));
  return s;
}

void save_stream_outputs(const StreamReport& report, Outputs& out) {
  out.render("report.json", [&](std::ostream& os) { write_report_json(report, os); });
  out.render("windows.csv", [&](std::ostream& os) { write_windows_csv(report, os); });
  out.render("thresholds.csv", [&](std::ostream& os) { write_threshold_history_csv(report, os); });
  out.render("decisions.csv", [&](std::ostream& os) { write_decisions_csv(report, os); });
  out.render("utility_log.csv", [&](std::ostream& os) {
    write_utility_log_header(os);
    for (std::size_t i = 0; i < report.utilities.size(); ++i) {
      write_utility_log_row(report.utilities[i], report.decisions[i].cluster, os);
    }
  });
}

void cmd_stream(const Options& o, Outputs& out, bool baseline_only) {
  if (o.bundles.size() != 1) user_error("give exactly one --bundle");
  RouterState state = load_state(o.bundles.front(), out, "bundle");
  const Trace stream = load_input_trace(o, out);
  const NetworkScenario scenario = scenario_for(o);
  state.update_interval = o.interval;

  StreamReport report;
  if (o.policy == "consroute") {
    if (baseline_only) user_error("baseline needs a fixed --policy");
    StreamOptions so;
    so.online = !o.static_mode;
    report = phase("stream", [&] { return run_stream(state, stream, scenario, so); });
  } else {
    const BaselinePolicy policy =
        phase("policy", [&] { return BaselinePolicy::parse(o.policy, {o.tau1, o.tau2}); });
    report = phase("baseline", [&] { return baseline_route(policy, stream, scenario, state); });
  }
  save_stream_outputs(report, out);
  out.manifest();
}

void cmd_sweep(const Options& o, Outputs& out) {
  if (o.bundles.empty()) user_error("sweep needs at least one --bundle");
  if (o.grid < 2) user_error("--grid must be at least 2");
  std::vector<RouterState> states;
  for (std::size_t i = 0; i < o.bundles.size(); ++i) {
    states.push_back(load_state(o.bundles[i], out, "bundle" + std::to_string(i)));
  }
  const Trace stream = load_input_trace(o, out);
  const NetworkScenario scenario = scenario_for(o);
  for (auto& s : states) s.update_interval = o.interval;
  const RouterState& ref = states.front();

  struct Row {
    std::string policy;
    std::string setting;
    WindowMetrics m;
  };
  std::vector<Row> rows;
  auto baseline = [&](PolicyKind kind, const ThresholdPair& pair, const std::string& setting) {
    BaselinePolicy p{kind, pair};
    rows.push_back({p.name(), setting, phase("sweep", [&] { return baseline_route(p, stream, scenario, ref); }).totals});
  };
  baseline(PolicyKind::dlm_only, {}, "");
  baseline(PolicyKind::elm_only, {}, "");
  baseline(PolicyKind::clm_only, {}, "");
  const WindowMetrics dlm = rows[0].m;
  const WindowMetrics clm = rows[2].m;

  for (std::size_t i = 0; i < states.size(); ++i) {
    RouterState s = states[i];
    StreamOptions so;
    so.online = false;
    const auto rep = phase("sweep", [&] { return run_stream(s, stream, scenario, so); });
    rows.push_back({"consroute", "kappa1=" + fmt_real(s.weights.kappa1()) + " kappa2=" +
                                     fmt_real(s.weights.kappa2()),
                    rep.totals});
  }
  const double step = 1.0 / static_cast<double>(o.grid);
  for (std::size_t a = 1; a <= o.grid; ++a) {
    for (std::size_t b = 0; b < a; ++b) {
      const ThresholdPair pair{static_cast<double>(a) * step, static_cast<double>(b) * step};
      baseline(PolicyKind::global_static, pair,
               "tau1=" + fmt_real(pair.tau1) + " tau2=" + fmt_real(pair.tau2));
    }
  }

  auto norm = [](double v, double lo, double hi) {
    return hi == lo ? 0.0 : 100.0 * (v - lo) / (hi - lo);
  };
  out.render("pareto.csv", [&](std::ostream& os) {
    os << "policy,setting,accuracy,mean_latency_s,mean_cost,norm_accuracy,norm_latency,norm_cost,"
          "frac_device,frac_edge,frac_cloud\n";
    for (const auto& r : rows) {
      os << r.policy << ',' << r.setting << ',' << fmt_real(r.m.accuracy) << ','
         << fmt_real(r.m.mean_latency_s) << ',' << fmt_real(r.m.mean_cost) << ','
         << fmt_real(norm(r.m.accuracy, dlm.accuracy, clm.accuracy)) << ','
         << fmt_real(norm(r.m.mean_latency_s, dlm.mean_latency_s, clm.mean_latency_s)) << ','
         << fmt_real(norm(r.m.mean_cost, dlm.mean_cost, clm.mean_cost)) << ','
         << fmt_real(r.m.tier_fraction[0]) << ',' << fmt_real(r.m.tier_fraction[1]) << ','
         << fmt_real(r.m.tier_fraction[2]) << '\n';
    }
  });
  out.manifest();
}

std::string default_out_dir() {
  if (const char* env = std::getenv("CONSROUTE_OUT_DIR"); env && *env) return env;
  return "consroute-out";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Consistency-aware device/edge/cloud LLM routing simulator", "consroute"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.config_formatter(std::make_shared<consroute::cli::JsonLinesConfig>());
  app.set_config("--config", "", "Line-delimited JSON config; flags override it");
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();

  Options o;
  o.out = default_out_dir();
  app.add_option("--seed", o.seed, "Experiment seed");
  app.add_option("--out", o.out, "Output directory (default $CONSROUTE_OUT_DIR or ./consroute-out)");

  auto* world = app.add_option_group("synthetic world");
  world->add_option("--n", o.n, "Queries to generate");
  world->add_option("--dim", o.dim, "Embedding dimension");
  world->add_option("--clusters", o.clusters, "Latent clusters");
  world->add_option("--noise", o.noise, "Score noise sigma");
  world->add_option("--separation", o.separation, "Center separation in sigmas");
  world->add_option("--spread", o.spread, "Within-cluster difficulty spread");
  world->add_option("--reference-fraction", o.reference_fraction, "Share of referenced records");
  world->add_option("--tier-profile", o.tier_profile, "Per-cluster accuracies 'd,e,c;d,e,c;...'");
  world->add_option("--drift-start", o.drift_start, "Record index where the drift profile starts");
  world->add_option("--drift-profile", o.drift_profile, "Post-drift accuracies 'd,e,c;...'");
  world->add_option("--history-size", o.history_size, "gen: split into history/stream files");

  auto* io = app.add_option_group("inputs");
  io->add_option("--trace", o.trace, "Trace file (line-delimited JSON)");
  io->add_option("--bundle", o.bundles, "Router bundle directory")->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);

  auto* model = app.add_option_group("labels and predictor");
  model->add_option("--alpha", o.alpha, "Similarity vs augmentation weight");
  model->add_option("--beta", o.beta, "Cloud vs edge pair weight");
  model->add_option("--hidden", o.hidden, "Hidden layer widths")->delimiter(',')->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  model->add_option("--activation", o.activation, "relu or tanh");
  model->add_option("--lr", o.lr, "Adam learning rate");
  model->add_option("--batch", o.batch, "Mini-batch size");
  model->add_option("--epochs", o.epochs, "Maximum epochs");
  model->add_option("--patience", o.patience, "Early-stopping patience (0 disables)");
  model->add_option("--val-fraction", o.val_fraction, "Validation share");

  auto* tuning = app.add_option_group("clustering and threshold search");
  tuning->add_option("--k-min", o.k_min, "Smallest k for the elbow sweep");
  tuning->add_option("--k-max", o.k_max, "Largest k for the elbow sweep");
  tuning->add_option("--k", o.k, "Fixed cluster count (skips the elbow sweep)");
  tuning->add_option("--bo-budget", o.bo_budget, "Offline BO iterations per cluster");
  tuning->add_option("--online-steps", o.online_steps, "BO steps per online refresh");
  tuning->add_option("--pool", o.pool, "EI candidate pool size");
  tuning->add_option("--seed-points", o.seed_points, "Random points before BO");
  tuning->add_option("--capacity", o.capacity, "Observations kept per cluster");
  tuning->add_flag("--parallel-clusters", o.parallel_clusters, "Run per-cluster BO concurrently");

  auto* utility = app.add_option_group("utility");
  utility->add_option("--lambda1", o.lambda1, "Accuracy weight");
  utility->add_option("--lambda2", o.lambda2, "Latency weight");
  utility->add_option("--lambda3", o.lambda3, "Cost weight");
  utility->add_option("--kappa1", o.kappa1, "lambda1/lambda2 (overrides --lambda2)");
  utility->add_option("--kappa2", o.kappa2, "lambda1/lambda3 (overrides --lambda3)");
  utility->add_flag("--raw-units", o.raw_units, "Do not normalize latency and cost by the cloud means");
  utility->add_option("--kappa-sweep", o.kappa_sweep, "tune: kappa values (kappa1 = kappa2 unless --kappa2-sweep)")->delimiter(',')->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  utility->add_option("--kappa2-sweep", o.kappa2_sweep, "tune: kappa2 values for a full grid")->delimiter(',')->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  utility->add_option("--cost-model", o.cost_model, "'default', 'cross-family' or 'd,e,c' billions");

  auto* streaming = app.add_option_group("streaming");
  streaming->add_option("--network", o.network, "good, bad, bad2good or a scenario file");
  streaming->add_option("--switch-window", o.switch_window, "Window index where bad2good switches");
  streaming->add_option("--interval", o.interval, "Refresh interval and window size");
  streaming->add_flag("--static,!--online", o.static_mode, "Keep offline thresholds (default --online)");
  streaming->add_option("--policy", o.policy, "consroute, dlm-only, elm-only, clm-only or global-static");
  streaming->add_option("--tau1", o.tau1, "global-static tau1");
  streaming->add_option("--tau2", o.tau2, "global-static tau2");
  streaming->add_option("--grid", o.grid, "sweep: global threshold grid resolution");

  app.add_subcommand("gen", "Generate a synthetic trace");
  app.add_subcommand("train", "Build labels and train the consistency predictor");
  app.add_subcommand("tune", "Offline phase: predictor, clusters and per-cluster thresholds");
  app.add_subcommand("stream", "Route a trace with a tuned bundle");
  app.add_subcommand("baseline", "Route a trace with a fixed policy");
  app.add_subcommand("sweep", "Pareto sweep over bundles and global thresholds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  o.command = app.get_subcommands().front()->get_name();

  try {
    Outputs out(o);
    if (o.command == "gen") {
      cmd_gen(o, out);
    } else if (o.command == "train") {
      cmd_train(o, app, out);
    } else if (o.command == "tune") {
      cmd_tune(o, app, out);
    } else if (o.command == "stream") {
      cmd_stream(o, out, false);
    } else if (o.command == "baseline") {
      cmd_stream(o, out, true);
    } else {
      cmd_sweep(o, out);
    }
  } catch (const CliFailure& f) {
    std::cerr << "consroute " << o.command << ": " << f.message << '\n';
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "consroute " << o.command << ": internal error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
