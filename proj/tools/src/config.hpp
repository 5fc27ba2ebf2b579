#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace kolmo::cli {

/// Malformed configuration text or values; maps to exit status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Each stage record lists its keys once in visit(); parsing, printing and
// flag binding all go through that list.

struct SimulateConfig {
  double re = 14.4;
  int n = 2;
  int nx = 32;
  int ny = 32;
  double dt = 0.01;
  double t_total = 1000.0;
  double save_every = 5.0;
  double discard = 1000.0;
  std::uint64_t seed = 0;
  std::string out;

  template <class V>
  void visit(V&& v) {
    v("re", re);
    v("n", n);
    v("nx", nx);
    v("ny", ny);
    v("dt", dt);
    v("t-total", t_total);
    v("save-every", save_every);
    v("discard", discard);
    v("seed", seed);
    v("out", out);
  }
};

struct ReduceConfig {
  std::string in;
  std::string out;
  bool phase = true;
  bool sr = false;
  bool rotation = false;
  std::string templ;  // rotation template (KFLOW1, first snapshot used)

  template <class V>
  void visit(V&& v) {
    v("in", in);
    v("out", out);
    v("phase", phase);
    v("sr", sr);
    v("rotation", rotation);
    v("template", templ);
  }
};

struct PcaConfig {
  std::string in;
  double train_fraction = 0.8;
  int max_dh = 20;
  bool center = true;
  std::string out;    // CSV: d_h, singular_value, train_mse, test_mse
  std::string basis;  // optional pca.bin

  template <class V>
  void visit(V&& v) {
    v("in", in);
    v("train-fraction", train_fraction);
    v("max-dh", max_dh);
    v("center", center);
    v("out", out);
    v("basis", basis);
  }
};

struct TrainAeConfig {
  std::string in;
  int dh = 5;
  int epochs = 300;
  int batch = 64;
  double lr = 1e-3;
  std::uint64_t seed_base = 0;
  int models = 4;
  std::vector<int> enc_hidden{5000, 1000};
  std::vector<int> dec_hidden{1000, 5000};
  double alpha_l = 1.0;
  double train_fraction = 0.8;
  bool center = true;
  std::string out;

  template <class V>
  void visit(V&& v) {
    v("in", in);
    v("dh", dh);
    v("epochs", epochs);
    v("batch", batch);
    v("lr", lr);
    v("seed-base", seed_base);
    v("models", models);
    v("enc-hidden", enc_hidden);
    v("dec-hidden", dec_hidden);
    v("alpha-l", alpha_l);
    v("train-fraction", train_fraction);
    v("center", center);
    v("out", out);
  }
};

struct EncodeConfig {
  std::string model;
  std::string in;
  std::string phase;  // sidecar CSV from reduce; phi_x = 0 when empty
  std::string out;

  template <class V>
  void visit(V&& v) {
    v("model", model);
    v("in", in);
    v("phase", phase);
    v("out", out);
  }
};

struct TrainMapConfig {
  std::string in;  // latent CSV
  std::vector<int> hidden{500, 500};
  int epochs = 600;
  int lr_drop_epoch = 300;  // <= 0 disables the drop
  double lr_drop_factor = 0.1;
  int batch = 64;
  double lr = 1e-3;
  int models = 5;
  std::uint64_t seed_base = 0;
  double train_fraction = 0.8;
  std::string out;

  template <class V>
  void visit(V&& v) {
    v("in", in);
    v("hidden", hidden);
    v("epochs", epochs);
    v("lr-drop-epoch", lr_drop_epoch);
    v("lr-drop-factor", lr_drop_factor);
    v("batch", batch);
    v("lr", lr);
    v("models", models);
    v("seed-base", seed_base);
    v("train-fraction", train_fraction);
    v("out", out);
  }
};

struct RolloutConfig {
  std::string model_dir;
  std::string latent;  // source of the initial condition
  int ic_index = 0;
  int steps = 1000;
  bool apply_phase = false;
  std::string like;  // KFLOW1 whose metadata the decoded output inherits
  std::string decoded;
  std::string out;

  template <class V>
  void visit(V&& v) {
    v("model-dir", model_dir);
    v("latent", latent);
    v("ic-index", ic_index);
    v("steps", steps);
    v("apply-phase", apply_phase);
    v("like", like);
    v("decoded", decoded);
    v("out", out);
  }
};

struct LabelConfig {
  std::string in;
  double norm_threshold = 60.0;
  double diff_threshold = 5.0;
  int past = 10;
  int future = 10;
  std::string out;

  template <class V>
  void visit(V&& v) {
    v("in", in);
    v("norm-threshold", norm_threshold);
    v("diff-threshold", diff_threshold);
    v("past", past);
    v("future", future);
    v("out", out);
  }
};

struct StatsPdfConfig {
  std::string in;
  std::string pred;
  std::string vars = "id";  // id (I, D) or a01 (Re, Im a_{0,1})
  int bins = 100;
  std::string out;       // truth PDF matrix
  std::string pred_out;  // predicted PDF matrix

  template <class V>
  void visit(V&& v) {
    v("in", in);
    v("pred", pred);
    v("vars", vars);
    v("bins", bins);
    v("out", out);
    v("pred-out", pred_out);
  }
};

struct StatsKlConfig {
  std::string truth;
  std::string pred;
  std::string vars = "id";
  int bins = 100;
  std::string out;

  template <class V>
  void visit(V&& v) {
    v("truth", truth);
    v("pred", pred);
    v("vars", vars);
    v("bins", bins);
    v("out", out);
  }
};

struct StatsDurationsConfig {
  std::string labels;
  std::string pred;  // labels of a predicted run; enables the KL table
  double tau = 5.0;
  int bins = 20;
  std::string out;
  std::string kl_out;  // CSV: label, kl, split_half_baseline

  template <class V>
  void visit(V&& v) {
    v("labels", labels);
    v("pred", pred);
    v("tau", tau);
    v("bins", bins);
    v("out", out);
    v("kl-out", kl_out);
  }
};

struct StatsMsdConfig {
  std::string in;  // latent CSV or phase CSV (phi_x column)
  int max_lag = 200;
  std::string out;

  template <class V>
  void visit(V&& v) {
    v("in", in);
    v("max-lag", max_lag);
    v("out", out);
  }
};

struct StatsEnsembleConfig {
  std::string model_dir;
  std::string in;      // aligned KFLOW1 (truth)
  std::string labels;  // label CSV of the same series
  int n_ics = 1000;
  int horizon = 12;
  std::uint64_t seed = 0;
  std::string out;

  template <class V>
  void visit(V&& v) {
    v("model-dir", model_dir);
    v("in", in);
    v("labels", labels);
    v("n-ics", n_ics);
    v("horizon", horizon);
    v("seed", seed);
    v("out", out);
  }
};

struct PredictBurstConfig {
  std::string in;      // aligned KFLOW1
  std::string phase;   // sidecar phase CSV
  std::string labels;  // label CSV
  std::string model;   // AE bundle (latent indicator)
  std::string indicator = "latent";  // comma list
  int dh = 5;
  double tau_b_max = 40.0;
  double c = 1.0;
  double gamma = 0.0;  // <= 0 selects 1 / (dim * var)
  int max_train = 5000;
  std::uint64_t seed = 0;
  std::string out;

  template <class V>
  void visit(V&& v) {
    v("in", in);
    v("phase", phase);
    v("labels", labels);
    v("model", model);
    v("indicator", indicator);
    v("dh", dh);
    v("tau-b-max", tau_b_max);
    v("c", c);
    v("gamma", gamma);
    v("max-train", max_train);
    v("seed", seed);
    v("out", out);
  }
};

inline TrainMapConfig phase_map_defaults() {
  TrainMapConfig c;
  c.hidden = {500, 500, 500};
  return c;
}

struct RunConfig {
  std::uint64_t seed = 0;  // added to every stage seed
  std::vector<std::string> stages;

  SimulateConfig simulate;
  ReduceConfig reduce;
  PcaConfig pca;
  TrainAeConfig train_ae;
  EncodeConfig encode;
  TrainMapConfig train_map;
  TrainMapConfig train_phase = phase_map_defaults();
  RolloutConfig rollout;
  LabelConfig label;
  StatsPdfConfig stats_pdf;
  StatsKlConfig stats_kl;
  StatsDurationsConfig stats_durations;
  StatsMsdConfig stats_msd;
  StatsEnsembleConfig stats_ensemble;
  PredictBurstConfig predict_burst;

  /// Calls f(section_name, record) for every stage section.
  template <class F>
  void sections(F&& f) {
    f("simulate", simulate);
    f("reduce", reduce);
    f("pca", pca);
    f("train-ae", train_ae);
    f("encode", encode);
    f("train-map", train_map);
    f("train-phase", train_phase);
    f("rollout", rollout);
    f("label", label);
    f("stats-pdf", stats_pdf);
    f("stats-kl", stats_kl);
    f("stats-durations", stats_durations);
    f("stats-msd", stats_msd);
    f("stats-ensemble", stats_ensemble);
    f("predict-burst", predict_burst);
  }
};

std::vector<std::string> section_names();

// Text form:
//   # comment (whole lines only)
//   [run]
//   seed = 0
//   stages = simulate, reduce
//   [simulate]
//   re = 14.4
// Sections may be omitted; omitted keys keep their defaults.
RunConfig parse_config(std::string_view text, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);
std::string to_text(RunConfig& cfg);
/// One section only, in the same format.
std::string section_text(RunConfig& cfg, const std::string& section);

/// Sets one key from its textual value. Throws ConfigError.
void set_value(RunConfig& cfg, const std::string& section, const std::string& key, const std::string& value);
/// Key -> text for one section.
std::map<std::string, std::string> section_values(RunConfig& cfg, const std::string& section);

}  // namespace kolmo::cli
