#include "commands.hpp"

#include <cmath>
#include <filesystem>
#include <limits>
#include <ostream>

#include "kolmo/burst_predict.hpp"
#include "kolmo/csv.hpp"
#include "kolmo/error.hpp"
#include "kolmo/labeling.hpp"
#include "kolmo/latent_dynamics.hpp"
#include "kolmo/reduction.hpp"
#include "kolmo/snapshot.hpp"
#include "kolmo/spectral.hpp"
#include "kolmo/stats.hpp"
#include "kolmo/symmetry.hpp"
#include "manifest.hpp"

namespace kolmo::cli {

namespace fs = std::filesystem;

namespace {

struct StageIo {
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::string primary;  // manifest placement
};

void require_key(const std::string& value, const std::string& stage, const std::string& key) {
  if (value.empty()) throw ConfigError("[" + stage + "] '" + key + "' is required");
}

void ensure_parent(const std::string& path) {
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

std::size_t split_point(std::size_t count, double fraction) {
  require(fraction > 0.0 && fraction < 1.0, ErrorKind::InvalidArgument, "train-fraction must lie in (0, 1)");
  const auto n = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(count)));
  require(n >= 1 && n < count, ErrorKind::TooShort, "too few samples for a train/test split");
  return n;
}

nn::TrainConfig train_config(int epochs, int batch, double lr, std::uint64_t seed) {
  nn::TrainConfig t;
  t.epochs = epochs;
  t.batch_size = batch;
  t.lr = lr;
  t.seed = seed;
  return t;
}

std::string phase_path_for(const std::string& kflow) { return kflow + ".phase.csv"; }

StageIo do_simulate(const SimulateConfig& c, std::uint64_t seed, std::ostream& log) {
  require_key(c.out, "simulate", "out");
  FlowParams p{c.re, c.n, c.dt};
  p.validate();
  Grid g;
  g.nx = c.nx;
  g.ny = c.ny;
  g.validate();
  auto ic = random_initial_condition(g, c.seed + seed);
  if (c.discard > 0.0) ic = advance(ic, p, c.discard);
  const auto series = simulate(ic, p, c.t_total, c.save_every);
  ensure_parent(c.out);
  save_snapshots(c.out, series);
  log << "simulate: " << series.count() << " snapshots -> " << c.out << '\n';
  return {{}, {c.out}, c.out};
}

StageIo do_reduce(const ReduceConfig& c, std::ostream& log) {
  require_key(c.in, "reduce", "in");
  require_key(c.out, "reduce", "out");
  const auto series = load_snapshots(c.in);
  AlignedSeries al;
  if (c.phase) {
    al = phase_align(series);
  } else {
    require(!c.sr && !c.rotation, ErrorKind::InvalidArgument, "sr and rotation collapse need phase alignment");
    al.snapshots = series;
    for (std::size_t i = 0; i < series.count(); ++i) {
      al.phase.phi_x.push_back(phase_x(series.grid, series.snapshot(i)));
      al.phase.phi_y.push_back(phase_y(series.grid, series.snapshot(i)));
    }
    al.ops_applied.resize(series.count());
  }
  if (c.sr) al = collapse_shift_reflect(al);
  StageIo io{{c.in}, {}, c.out};
  if (c.rotation) {
    std::vector<double> templ;
    if (!c.templ.empty()) {
      const auto t = load_snapshots(c.templ);
      require(t.count() > 0, ErrorKind::EmptyData, "rotation template holds no snapshot");
      require(t.grid == series.grid, ErrorKind::GridIncompatible, "rotation template grid differs from input");
      const auto s = t.snapshot(0);
      templ.assign(s.begin(), s.end());
      io.inputs.push_back(c.templ);
    } else {
      const auto s = al.snapshots.snapshot(0);
      templ.assign(s.begin(), s.end());
    }
    al = collapse_rotation(al, templ);
  }
  ensure_parent(c.out);
  save_snapshots(c.out, al.snapshots);
  save_phase_csv(phase_path_for(c.out), al);
  io.outputs = {c.out, phase_path_for(c.out)};
  log << "reduce: " << al.snapshots.count() << " snapshots -> " << c.out << '\n';
  return io;
}

StageIo do_pca(const PcaConfig& c, std::ostream& log) {
  require_key(c.in, "pca", "in");
  require_key(c.out, "pca", "out");
  const auto series = load_snapshots(c.in);
  const Eigen::MatrixXd x = series_matrix(series);
  const auto n_train = split_point(series.count(), c.train_fraction);
  const Eigen::MatrixXd train = x.leftCols(static_cast<Eigen::Index>(n_train));
  const Eigen::MatrixXd test = x.rightCols(x.cols() - static_cast<Eigen::Index>(n_train));
  const auto basis = fit_pca(train, c.center);
  require(c.max_dh >= 1, ErrorKind::InvalidArgument, "max-dh must be positive");
  CsvTable table{{"d_h", "singular_value", "train_mse", "test_mse"}, {}};
  const int top = std::min(c.max_dh, basis.dim());
  for (int d = 1; d <= top; ++d) {
    table.rows.push_back({static_cast<double>(d), basis.singular_values(d - 1),
                          reconstruction_mse(train, basis.truncate(train, d)),
                          reconstruction_mse(test, basis.truncate(test, d))});
  }
  ensure_parent(c.out);
  write_csv(c.out, table);
  StageIo io{{c.in}, {c.out}, c.out};
  if (!c.basis.empty()) {
    ensure_parent(c.basis);
    save_pca(c.basis, basis);
    io.outputs.push_back(c.basis);
  }
  log << "pca: " << top << " truncation levels -> " << c.out << '\n';
  return io;
}

StageIo do_train_ae(const TrainAeConfig& c, std::uint64_t seed, std::ostream& log) {
  require_key(c.in, "train-ae", "in");
  require_key(c.out, "train-ae", "out");
  const auto series = load_snapshots(c.in);
  const Eigen::MatrixXd x = series_matrix(series);
  const auto n_train = split_point(series.count(), c.train_fraction);
  AeConfig cfg;
  cfg.d_h = c.dh;
  cfg.enc_hidden = c.enc_hidden;
  cfg.dec_hidden = c.dec_hidden;
  cfg.alpha_l = c.alpha_l;
  cfg.n_models = c.models;
  cfg.seed_base = c.seed_base + seed;
  cfg.train = train_config(c.epochs, c.batch, c.lr, 0);
  const auto result = train_autoencoder(x.leftCols(static_cast<Eigen::Index>(n_train)),
                                        x.rightCols(x.cols() - static_cast<Eigen::Index>(n_train)), cfg, c.center);
  fs::create_directories(c.out);
  save_autoencoder(c.out, result.best, {result.seeds, result.test_mse, result.best_index, series.grid});
  const fs::path dir(c.out);
  StageIo io{{c.in}, {}, c.out};
  for (const char* f : {"pca.bin", "enc.knet1", "dec.knet1", "meta.json"}) io.outputs.push_back((dir / f).string());
  CsvTable models{{"model", "seed", "test_mse", "pca_test_mse"}, {}};
  for (std::size_t m = 0; m < result.seeds.size(); ++m) {
    models.rows.push_back({static_cast<double>(m), static_cast<double>(result.seeds[m]), result.test_mse[m],
                           result.pca_test_mse});
    const auto hist = (dir / ("ae_history_" + std::to_string(m) + ".csv")).string();
    nn::save_history_csv(hist, result.histories[m]);
    io.outputs.push_back(hist);
  }
  write_csv(dir / "ae_models.csv", models);
  io.outputs.push_back((dir / "ae_models.csv").string());
  log << "train-ae: d_h=" << c.dh << " best test MSE " << format_double(result.test_mse[result.best_index])
      << " (PCA " << format_double(result.pca_test_mse) << ") -> " << c.out << '\n';
  return io;
}

std::vector<double> phase_or_zero(const std::string& path, std::size_t count) {
  if (path.empty()) return std::vector<double>(count, 0.0);
  auto trace = load_phase_csv(path);
  require(trace.phi_x.size() == count, ErrorKind::ShapeMismatch, "phase CSV length does not match the snapshots");
  return trace.phi_x;
}

StageIo do_encode(const EncodeConfig& c, std::ostream& log) {
  require_key(c.model, "encode", "model");
  require_key(c.in, "encode", "in");
  require_key(c.out, "encode", "out");
  const auto ae = load_autoencoder(c.model);
  const auto series = load_snapshots(c.in);
  const auto latent = encode_series(ae, series, phase_or_zero(c.phase, series.count()));
  ensure_parent(c.out);
  save_latent_csv(c.out, latent);
  log << "encode: " << latent.count() << " latent states -> " << c.out << '\n';
  return {{c.model, c.in, c.phase}, {c.out}, c.out};
}

MapConfig map_config(const TrainMapConfig& c, std::uint64_t seed) {
  MapConfig cfg;
  cfg.hidden = c.hidden;
  cfg.n_models = c.models;
  cfg.seed_base = c.seed_base + seed;
  cfg.train = train_config(c.epochs, c.batch, c.lr, 0);
  if (c.lr_drop_epoch > 0) cfg.train.lr_drop_epoch = c.lr_drop_epoch;
  cfg.train.lr_drop_factor = c.lr_drop_factor;
  return cfg;
}

StageIo do_train_map(const TrainMapConfig& c, std::uint64_t seed, bool phase, std::ostream& log) {
  const std::string stage = phase ? "train-phase" : "train-map";
  require_key(c.in, stage, "in");
  require_key(c.out, stage, "out");
  const auto latent = load_latent_csv(c.in);
  const auto n_train = split_point(latent.count(), c.train_fraction);
  const auto train = latent.slice(0, n_train);
  const auto test = latent.slice(n_train, latent.count() - n_train);
  fs::create_directories(c.out);
  const fs::path dir(c.out);
  const std::string prefix = phase ? "phase" : "map";
  MapTrainResult info;
  if (phase) {
    auto [g, r] = train_phase_map(train, test, map_config(c, seed));
    save_phase_map(dir, g, r);
    info = std::move(r);
  } else {
    auto [f, r] = train_map(train, test, map_config(c, seed));
    save_time_map(dir, f, r);
    info = std::move(r);
  }
  StageIo io{{c.in}, {(dir / (prefix + ".knet1")).string(), (dir / (prefix + ".json")).string()}, c.out};
  for (std::size_t m = 0; m < info.histories.size(); ++m) {
    const auto hist = (dir / (prefix + "_history_" + std::to_string(m) + ".csv")).string();
    nn::save_history_csv(hist, info.histories[m]);
    io.outputs.push_back(hist);
  }
  log << stage << ": best test MSE " << format_double(info.test_mse[info.best_index]) << " -> " << c.out << '\n';
  return io;
}

StageIo do_rollout(const RolloutConfig& c, std::ostream& log) {
  require_key(c.model_dir, "rollout", "model-dir");
  require_key(c.latent, "rollout", "latent");
  require_key(c.out, "rollout", "out");
  const fs::path dir(c.model_dir);
  const auto f = load_time_map(dir);
  std::optional<PhaseMap> g;
  if (fs::exists(dir / "phase.json")) g = load_phase_map(dir);
  const auto source = load_latent_csv(c.latent);
  require(c.ic_index >= 0 && static_cast<std::size_t>(c.ic_index) < source.count(), ErrorKind::InvalidArgument,
          "ic-index outside the latent series");
  const auto ic = static_cast<Eigen::Index>(c.ic_index);
  const auto series = rollout(f, g ? &*g : nullptr, source.h.col(ic), source.phi_x[ic], c.steps, source.tau);
  ensure_parent(c.out);
  save_latent_csv(c.out, series);
  StageIo io{{c.model_dir, c.latent}, {c.out}, c.out};
  if (!c.decoded.empty()) {
    require_key(c.like, "rollout", "like");
    const auto ae = load_autoencoder(dir);
    const auto like = load_snapshots(c.like);
    const auto snaps = decode_rollout(ae, series, like, c.apply_phase);
    ensure_parent(c.decoded);
    save_snapshots(c.decoded, snaps);
    io.inputs.push_back(c.like);
    io.outputs.push_back(c.decoded);
  }
  log << "rollout: " << c.steps << " steps" << (g ? " with phase" : "") << " -> " << c.out << '\n';
  return io;
}

StageIo do_label(const LabelConfig& c, std::ostream& log) {
  require_key(c.in, "label", "in");
  require_key(c.out, "label", "out");
  LabelParams p{c.norm_threshold, c.diff_threshold, c.past, c.future};
  const auto labels = label(load_snapshots(c.in), p);
  ensure_parent(c.out);
  save_labels_csv(c.out, labels);
  std::size_t bursting = 0;
  for (auto l : labels.labels) bursting += l;
  log << "label: " << labels.labels.size() << " labeled, " << bursting << " bursting -> " << c.out << '\n';
  return {{c.in}, {c.out}, c.out};
}

struct PdfVars {
  std::vector<double> x, y;
};

PdfVars pdf_vars(const std::string& path, const std::string& vars) {
  const auto series = load_snapshots(path);
  PdfVars out;
  if (vars == "id") {
    for (const auto& d : series_diagnostics(series)) {
      out.x.push_back(d.i);
      out.y.push_back(d.d);
    }
  } else if (vars == "a01") {
    for (std::size_t k = 0; k < series.count(); ++k) {
      const auto f = SpectralField::from_physical(series.grid, series.snapshot(k));
      out.x.push_back(f.mode(0, 1).real());
      out.y.push_back(f.mode(0, 1).imag());
    }
  } else {
    throw ConfigError("unknown vars '" + vars + "' (expected id or a01)");
  }
  return out;
}

Range2D range_of(const PdfVars& a, const PdfVars* b) {
  std::vector<std::span<const double>> xs{a.x}, ys{a.y};
  if (b) {
    xs.emplace_back(b->x);
    ys.emplace_back(b->y);
  }
  return pooled_range(xs, ys);
}

StageIo do_stats_pdf(const StatsPdfConfig& c, std::ostream& log) {
  require_key(c.in, "stats-pdf", "in");
  require_key(c.out, "stats-pdf", "out");
  require(c.bins > 0, ErrorKind::InvalidArgument, "bins must be positive");
  const auto truth = pdf_vars(c.in, c.vars);
  std::optional<PdfVars> pred;
  if (!c.pred.empty()) pred = pdf_vars(c.pred, c.vars);
  const auto range = range_of(truth, pred ? &*pred : nullptr);
  const auto bins = static_cast<std::size_t>(c.bins);
  ensure_parent(c.out);
  save_pdf_matrix(c.out, joint_pdf(truth.x, truth.y, bins, bins, range));
  StageIo io{{c.in}, {c.out}, c.out};
  if (pred) {
    require_key(c.pred_out, "stats-pdf", "pred-out");
    ensure_parent(c.pred_out);
    save_pdf_matrix(c.pred_out, joint_pdf(pred->x, pred->y, bins, bins, range));
    io.inputs.push_back(c.pred);
    io.outputs.push_back(c.pred_out);
  }
  log << "stats pdf: " << c.vars << " -> " << c.out << '\n';
  return io;
}

StageIo do_stats_kl(const StatsKlConfig& c, std::ostream& log) {
  require_key(c.truth, "stats-kl", "truth");
  require_key(c.pred, "stats-kl", "pred");
  require_key(c.out, "stats-kl", "out");
  require(c.bins > 0, ErrorKind::InvalidArgument, "bins must be positive");
  const auto truth = pdf_vars(c.truth, c.vars);
  const auto pred = pdf_vars(c.pred, c.vars);
  const auto range = range_of(truth, &pred);
  const auto bins = static_cast<std::size_t>(c.bins);
  const double kl =
      kl_divergence(joint_pdf(pred.x, pred.y, bins, bins, range), joint_pdf(truth.x, truth.y, bins, bins, range));
  const double baseline = split_half_kl(truth.x, truth.y, bins, range);
  ensure_parent(c.out);
  write_csv(c.out, {{"kl", "split_half_baseline"}, {{kl, baseline}}});
  log << "stats kl: " << format_double(kl) << " (baseline " << format_double(baseline) << ") -> " << c.out << '\n';
  return {{c.truth, c.pred}, {c.out}, c.out};
}

StageIo do_stats_durations(const StatsDurationsConfig& c, std::ostream& log) {
  require_key(c.labels, "stats-durations", "labels");
  require_key(c.out, "stats-durations", "out");
  const auto labels = load_labels_csv(c.labels);
  const auto d = durations(labels.labels, c.tau);
  CsvTable table{{"label", "duration"}, {}};
  for (double t : d.quiescent) table.rows.push_back({0.0, t});
  for (double t : d.bursting) table.rows.push_back({1.0, t});
  ensure_parent(c.out);
  write_csv(c.out, table);
  log << "stats durations: <t_q> = " << (d.quiescent.empty() ? std::string("n/a") : format_double(mean(d.quiescent)))
      << ", <t_b> = " << (d.bursting.empty() ? std::string("n/a") : format_double(mean(d.bursting))) << " -> "
      << c.out << '\n';
  StageIo io{{c.labels}, {c.out}, c.out};
  if (!c.pred.empty()) {
    require_key(c.kl_out, "stats-durations", "kl-out");
    require(c.bins > 0, ErrorKind::InvalidArgument, "bins must be positive");
    const auto p = durations(load_labels_csv(c.pred).labels, c.tau);
    const auto bins = static_cast<std::size_t>(c.bins);
    CsvTable kl{{"label", "kl", "split_half_baseline"}, {}};
    const std::vector<double>* truth_sets[] = {&d.quiescent, &d.bursting};
    const std::vector<double>* pred_sets[] = {&p.quiescent, &p.bursting};
    for (int k = 0; k < 2; ++k) {
      const auto& t = *truth_sets[k];
      const std::span<const double> ts(t);
      const auto half = t.size() / 2;
      const double baseline = half > 0 ? sample_kl(ts.subspan(half), ts.first(half), bins)
                                       : std::numeric_limits<double>::quiet_NaN();
      kl.rows.push_back({static_cast<double>(k), sample_kl(*pred_sets[k], t, bins), baseline});
    }
    ensure_parent(c.kl_out);
    write_csv(c.kl_out, kl);
    io.inputs.push_back(c.pred);
    io.outputs.push_back(c.kl_out);
  }
  return io;
}

StageIo do_stats_msd(const StatsMsdConfig& c, std::ostream& log) {
  require_key(c.in, "stats-msd", "in");
  require_key(c.out, "stats-msd", "out");
  require(c.max_lag > 0, ErrorKind::InvalidArgument, "max-lag must be positive");
  const auto table = read_csv(c.in);
  const auto t = table.column_values("t");
  const auto phi = unwrap_phase(table.column_values("phi_x"));
  const double dt = t.size() >= 2 ? t[1] - t[0] : 1.0;
  const auto curve = msd(phi, static_cast<std::size_t>(c.max_lag), dt);
  CsvTable out{{"lag", "msd"}, {}};
  for (std::size_t k = 0; k < curve.lags.size(); ++k) out.rows.push_back({curve.lags[k], curve.msd[k]});
  ensure_parent(c.out);
  write_csv(c.out, out);
  log << "stats msd: " << curve.lags.size() << " lags -> " << c.out << '\n';
  return {{c.in}, {c.out}, c.out};
}

StageIo do_stats_ensemble(const StatsEnsembleConfig& c, std::uint64_t seed, std::ostream& log) {
  require_key(c.model_dir, "stats-ensemble", "model-dir");
  require_key(c.in, "stats-ensemble", "in");
  require_key(c.labels, "stats-ensemble", "labels");
  require_key(c.out, "stats-ensemble", "out");
  require(c.n_ics > 0 && c.horizon >= 0, ErrorKind::InvalidArgument, "n-ics must be positive, horizon non-negative");
  const auto ae = load_autoencoder(c.model_dir);
  const auto f = load_time_map(c.model_dir);
  const auto series = load_snapshots(c.in);
  const auto labels = load_labels_csv(c.labels);
  const Eigen::MatrixXd truth = series_matrix(series);
  const auto horizon = static_cast<std::size_t>(c.horizon);
  const std::size_t last = std::min(labels.last_labeled, series.count() > horizon ? series.count() - horizon : 0);
  require(last > labels.first_labeled, ErrorKind::TooShort, "no labeled initial condition leaves a full horizon");
  const auto ics = sample_indices(labels.first_labeled, last,
                                  std::min<std::size_t>(static_cast<std::size_t>(c.n_ics), last - labels.first_labeled),
                                  c.seed + seed);
  std::vector<std::uint8_t> ic_labels;
  for (auto ic : ics) ic_labels.push_back(labels.labels[ic - labels.first_labeled]);
  const double tau = series.save_every;
  const auto err = ensemble_error(truth, ics, ic_labels, c.horizon, tau, [&](std::size_t ic, int h) {
    const Eigen::VectorXd h0 = encode(ae, Eigen::VectorXd(truth.col(static_cast<Eigen::Index>(ic))));
    return decode(ae, rollout(f, nullptr, h0, 0.0, h, tau).h);
  });
  CsvTable table{{"lead_time", "quiescent", "bursting", "pooled"}, {}};
  for (std::size_t k = 0; k < err.lead_time.size(); ++k)
    table.rows.push_back({err.lead_time[k], err.quiescent[k], err.bursting[k], err.pooled[k]});
  ensure_parent(c.out);
  write_csv(c.out, table);
  log << "stats ensemble: " << ics.size() << " initial conditions (" << err.n_quiescent << " quiescent, "
      << err.n_bursting << " bursting) -> " << c.out << '\n';
  return {{c.model_dir, c.in, c.labels}, {c.out}, c.out};
}

StageIo do_predict_burst(const PredictBurstConfig& c, std::uint64_t seed, std::ostream& log) {
  require_key(c.in, "predict-burst", "in");
  require_key(c.labels, "predict-burst", "labels");
  require_key(c.out, "predict-burst", "out");
  const auto series = load_snapshots(c.in);
  const auto labels = load_labels_csv(c.labels);
  const auto phi = phase_or_zero(c.phase, series.count());
  StageIo io{{c.in, c.labels, c.phase}, {c.out}, c.out};

  std::optional<Autoencoder> ae;
  std::optional<PcaBasis> pca;
  std::vector<NamedFeatures> features;
  std::string list = c.indicator;
  for (std::size_t pos = 0; pos <= list.size();) {
    auto end = list.find(',', pos);
    if (end == std::string::npos) end = list.size();
    std::string name = list.substr(pos, end - pos);
    name.erase(0, name.find_first_not_of(" \t"));
    name.erase(name.find_last_not_of(" \t") + 1);
    pos = end + 1;
    if (name.empty()) continue;
    IndicatorSet set{parse_indicator(name), c.dh};
    if (set.kind == IndicatorKind::Latent && !ae) {
      require_key(c.model, "predict-burst", "model");
      ae = load_autoencoder(c.model);
      io.inputs.push_back(c.model);
    }
    if (set.kind == IndicatorKind::PcaProj && !pca) {
      const auto n_train = series.count() / 2;
      require(n_train > 0, ErrorKind::TooShort, "too few snapshots for a PCA basis");
      pca = fit_pca(series_matrix(series).leftCols(static_cast<Eigen::Index>(n_train)));
    }
    features.push_back({name, indicator_features(set, series, phi, ae ? &*ae : nullptr, pca ? &*pca : nullptr)});
  }
  require(!features.empty(), ErrorKind::InvalidArgument, "no indicator given");

  const double tau = series.save_every;
  std::vector<double> tau_bs;
  for (int k = 1; k * tau <= c.tau_b_max + 1e-9; ++k) tau_bs.push_back(k * tau);
  require(!tau_bs.empty(), ErrorKind::HorizonOutOfRange, "tau-b-max is below one sampling interval");

  SvmParams p;
  p.c = c.c;
  if (c.gamma > 0.0) p.gamma = c.gamma;
  p.max_train = static_cast<std::size_t>(c.max_train);
  p.seed = c.seed + seed;
  const auto rows = evaluate_horizon_sweep(features, labels, tau, tau_bs, p);
  ensure_parent(c.out);
  save_sweep_csv(c.out, rows);
  log << "predict-burst: " << rows.size() << " rows -> " << c.out << '\n';
  return io;
}

StageIo dispatch(RunConfig& cfg, const std::string& stage, std::ostream& log) {
  const auto s = cfg.seed;
  if (stage == "simulate") return do_simulate(cfg.simulate, s, log);
  if (stage == "reduce") return do_reduce(cfg.reduce, log);
  if (stage == "pca") return do_pca(cfg.pca, log);
  if (stage == "train-ae") return do_train_ae(cfg.train_ae, s, log);
  if (stage == "encode") return do_encode(cfg.encode, log);
  if (stage == "train-map") return do_train_map(cfg.train_map, s, false, log);
  if (stage == "train-phase") return do_train_map(cfg.train_phase, s, true, log);
  if (stage == "rollout") return do_rollout(cfg.rollout, log);
  if (stage == "label") return do_label(cfg.label, log);
  if (stage == "stats-pdf") return do_stats_pdf(cfg.stats_pdf, log);
  if (stage == "stats-kl") return do_stats_kl(cfg.stats_kl, log);
  if (stage == "stats-durations") return do_stats_durations(cfg.stats_durations, log);
  if (stage == "stats-msd") return do_stats_msd(cfg.stats_msd, log);
  if (stage == "stats-ensemble") return do_stats_ensemble(cfg.stats_ensemble, s, log);
  if (stage == "predict-burst") return do_predict_burst(cfg.predict_burst, s, log);
  throw ConfigError("unknown stage '" + stage + "'");
}

}  // namespace

void run_stage(RunConfig& cfg, const std::string& stage, std::ostream& log) {
  try {
    const auto io = dispatch(cfg, stage, log);
    Manifest m;
    m.stage = stage;
    m.version = kToolVersion;
    m.seed = cfg.seed;
    m.config = section_text(cfg, stage);
    m.inputs = hash_artifacts(io.inputs);
    m.outputs = hash_artifacts(io.outputs);
    write_manifest(manifest_path_for(io.primary, stage), m);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

void run_pipeline(RunConfig& cfg, std::ostream& log) {
  if (cfg.stages.empty()) throw ConfigError("[run] stages is empty");
  for (const auto& stage : cfg.stages) run_stage(cfg, stage, log);
}

bool replay(const std::string& manifest_path, bool verify, std::ostream& log) {
  Manifest m;
  try {
    m = read_manifest(manifest_path);
  } catch (const std::exception& e) {
    throw StageError("replay", e.what());
  }
  auto cfg = parse_config("[run]\nseed = " + std::to_string(m.seed) + "\n" + m.config, manifest_path);
  bool ok = true;
  if (verify) {
    for (const auto& in : m.inputs) {
      if (!fs::exists(in.path) || sha256_file(in.path) != in.sha256) {
        log << "replay: input changed: " << in.path << '\n';
        ok = false;
      }
    }
    if (!ok) return false;
  }
  run_stage(cfg, m.stage, log);
  if (verify) {
    for (const auto& out : m.outputs) {
      if (!fs::exists(out.path) || sha256_file(out.path) != out.sha256) {
        log << "replay: output differs: " << out.path << '\n';
        ok = false;
      }
    }
    if (ok) log << "replay: " << m.outputs.size() << " outputs reproduced byte-identically\n";
  }
  return ok;
}

}  // namespace kolmo::cli
