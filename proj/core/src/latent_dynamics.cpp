#include "kolmo/latent_dynamics.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "kolmo/binary_io.hpp"
#include "kolmo/csv.hpp"
#include "kolmo/error.hpp"
#include "kolmo/parallel.hpp"
#include "kolmo/symmetry.hpp"

namespace kolmo {

void LatentSeries::validate() const {
  require(h.cols() == static_cast<Eigen::Index>(phi_x.size()), ErrorKind::ShapeMismatch,
          "latent and phase traces differ in length");
  require(tau > 0.0, ErrorKind::InvalidArgument, "tau must be positive");
}

LatentSeries LatentSeries::slice(std::size_t first, std::size_t n) const {
  require(first + n <= count(), ErrorKind::InvalidArgument, "slice out of range");
  LatentSeries out;
  out.h = h.middleCols(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(n));
  out.phi_x.assign(phi_x.begin() + static_cast<std::ptrdiff_t>(first),
                   phi_x.begin() + static_cast<std::ptrdiff_t>(first + n));
  out.tau = tau;
  return out;
}

LatentSeries encode_series(const Autoencoder& ae, const SnapshotSeries& aligned, const std::vector<double>& phi_x) {
  require(phi_x.size() == aligned.count(), ErrorKind::ShapeMismatch, "phase trace length does not match snapshots");
  LatentSeries out;
  out.h = encode(ae, series_matrix(aligned));
  out.phi_x = phi_x;
  out.tau = aligned.save_every;
  return out;
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& samples) {
  require(samples.cols() > 0, ErrorKind::EmptyData, "cannot standardize an empty sample set");
  Standardizer s;
  s.mean = samples.rowwise().mean();
  const Eigen::MatrixXd centered = samples.colwise() - s.mean;
  s.stddev = (centered.rowwise().squaredNorm() / static_cast<double>(samples.cols())).cwiseSqrt();
  for (Eigen::Index i = 0; i < s.stddev.size(); ++i) {
    if (!(s.stddev(i) > 1e-12 * std::max(1.0, std::abs(s.mean(i))))) s.stddev(i) = 1.0;
  }
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& x) const {
  require(x.rows() == mean.size(), ErrorKind::ShapeMismatch, "standardizer dimension mismatch");
  return (x.colwise() - mean).array().colwise() / stddev.array();
}

Eigen::MatrixXd Standardizer::invert(const Eigen::MatrixXd& z) const {
  require(z.rows() == mean.size(), ErrorKind::ShapeMismatch, "standardizer dimension mismatch");
  return (z.array().colwise() * stddev.array()).matrix().colwise() + mean;
}

Eigen::MatrixXd TimeMap::operator()(const Eigen::MatrixXd& h) const {
  return scaler.invert(f.forward_batch(scaler.apply(h)));
}

Eigen::VectorXd PhaseMap::operator()(const Eigen::MatrixXd& h) const {
  const Eigen::MatrixXd z = g.forward_batch(scaler.apply(h));
  return (z.row(0).transpose().array() * out_std + out_mean).matrix();
}

namespace {

void require_pairs(const LatentSeries& s, const char* what) {
  s.validate();
  require(s.count() >= 2, ErrorKind::TooShort, std::string(what) + " series needs at least two samples");
}

Eigen::MatrixXd phase_increments(const LatentSeries& s) {
  Eigen::MatrixXd d(1, static_cast<Eigen::Index>(s.count() - 1));
  for (std::size_t i = 0; i + 1 < s.count(); ++i) d(0, static_cast<Eigen::Index>(i)) = wrap_angle(s.phi_x[i + 1] - s.phi_x[i]);
  return d;
}

Eigen::MatrixXd heads(const LatentSeries& s) { return s.h.leftCols(s.h.cols() - 1); }
Eigen::MatrixXd tails(const LatentSeries& s) { return s.h.rightCols(s.h.cols() - 1); }

std::vector<nn::Activation> hidden_sigmoid(std::size_t hidden_count) {
  std::vector<nn::Activation> acts(hidden_count + 1, nn::Activation::Sigmoid);
  acts.back() = nn::Activation::Linear;
  return acts;
}

// Trains n_models seeds on standardized data and returns the nets with their
// unstandardized test MSE (scale_out maps standardized residuals back).
template <class Unscaled>
std::pair<nn::DenseNet, MapTrainResult> fit_ensemble(const nn::Dataset& data, std::vector<int> dims,
                                                     const MapConfig& cfg, Unscaled unscaled_mse) {
  require(cfg.n_models >= 1, ErrorKind::InvalidArgument, "need at least one model");
  const auto count = static_cast<std::size_t>(cfg.n_models);
  const auto acts = hidden_sigmoid(dims.size() - 2);
  std::vector<nn::DenseNet> nets(count);
  MapTrainResult info;
  info.seeds.resize(count);
  info.test_mse.resize(count);
  info.histories.resize(count);
  parallel_for(count, [&](std::size_t m) {
    info.seeds[m] = cfg.seed_base + m;
    auto tc = cfg.train;
    tc.seed = info.seeds[m];
    auto [net, history] = nn::train(nn::DenseNet(dims, acts, info.seeds[m]), data, tc);
    info.test_mse[m] = unscaled_mse(net);
    nets[m] = std::move(net);
    info.histories[m] = std::move(history);
  });
  info.best_index = nn::select_best(info.test_mse);
  return {std::move(nets[info.best_index]), std::move(info)};
}

}  // namespace

nn::Dataset map_pairs(const LatentSeries& train, const LatentSeries& test) {
  require_pairs(train, "training");
  nn::Dataset d{heads(train), tails(train), Eigen::MatrixXd(train.d_h(), 0), Eigen::MatrixXd(train.d_h(), 0)};
  if (test.count() >= 2) {
    require(test.d_h() == train.d_h(), ErrorKind::ShapeMismatch, "train and test latent dimensions differ");
    d.x_test = heads(test);
    d.y_test = tails(test);
  }
  return d;
}

nn::Dataset phase_pairs(const LatentSeries& train, const LatentSeries& test) {
  require_pairs(train, "training");
  nn::Dataset d{heads(train), phase_increments(train), Eigen::MatrixXd(train.d_h(), 0), Eigen::MatrixXd(1, 0)};
  if (test.count() >= 2) {
    require(test.d_h() == train.d_h(), ErrorKind::ShapeMismatch, "train and test latent dimensions differ");
    d.x_test = heads(test);
    d.y_test = phase_increments(test);
  }
  return d;
}

std::pair<TimeMap, MapTrainResult> train_map(const LatentSeries& train, const LatentSeries& test,
                                             const MapConfig& cfg) {
  const nn::Dataset raw = map_pairs(train, test);
  TimeMap map;
  map.scaler = Standardizer::fit(train.h);
  nn::Dataset data{map.scaler.apply(raw.x_train), map.scaler.apply(raw.y_train), map.scaler.apply(raw.x_test),
                   map.scaler.apply(raw.y_test)};
  std::vector<int> dims{train.d_h()};
  dims.insert(dims.end(), cfg.hidden.begin(), cfg.hidden.end());
  dims.push_back(train.d_h());
  auto [net, info] = fit_ensemble(data, dims, cfg, [&](const nn::DenseNet& candidate) {
    if (raw.x_test.cols() == 0) return nn::evaluate_mse(candidate, data.x_train, data.y_train);
    const Eigen::MatrixXd pred = map.scaler.invert(candidate.forward_batch(data.x_test));
    return nn::mse_loss(pred, raw.y_test).loss;
  });
  map.f = std::move(net);
  return {std::move(map), std::move(info)};
}

std::pair<PhaseMap, MapTrainResult> train_phase_map(const LatentSeries& train, const LatentSeries& test,
                                                    const MapConfig& cfg) {
  const nn::Dataset raw = phase_pairs(train, test);
  PhaseMap map;
  map.scaler = Standardizer::fit(train.h);
  const Standardizer out = Standardizer::fit(raw.y_train);
  map.out_mean = out.mean(0);
  map.out_std = out.stddev(0);
  nn::Dataset data{map.scaler.apply(raw.x_train), out.apply(raw.y_train), map.scaler.apply(raw.x_test),
                   out.apply(raw.y_test)};
  std::vector<int> dims{train.d_h()};
  dims.insert(dims.end(), cfg.hidden.begin(), cfg.hidden.end());
  dims.push_back(1);
  auto [net, info] = fit_ensemble(data, dims, cfg, [&](const nn::DenseNet& candidate) {
    const auto& x = raw.x_test.cols() > 0 ? data.x_test : data.x_train;
    const auto& y = raw.x_test.cols() > 0 ? raw.y_test : raw.y_train;
    const Eigen::MatrixXd pred = out.invert(candidate.forward_batch(x));
    return nn::mse_loss(pred, y).loss;
  });
  map.g = std::move(net);
  return {std::move(map), std::move(info)};
}

LatentSeries rollout(const TimeMap& f, const PhaseMap* g, const Eigen::VectorXd& h0, double phi0, int steps,
                     double tau) {
  require(steps >= 0, ErrorKind::InvalidArgument, "steps must be non-negative");
  require(h0.size() == f.d_h(), ErrorKind::ShapeMismatch, "initial latent length does not match the map");
  LatentSeries out;
  out.tau = tau;
  out.h.resize(h0.size(), steps + 1);
  out.phi_x.resize(static_cast<std::size_t>(steps) + 1);
  out.h.col(0) = h0;
  out.phi_x[0] = phi0;
  Eigen::MatrixXd h = h0;
  double phi = phi0;
  for (int k = 1; k <= steps; ++k) {
    if (g) phi += (*g)(h)(0);
    h = f(h);
    require(h.allFinite() && std::isfinite(phi), ErrorKind::NonFinite,
            "latent rollout diverged at step " + std::to_string(k));
    out.h.col(k) = h;
    out.phi_x[static_cast<std::size_t>(k)] = phi;
  }
  return out;
}

SnapshotSeries decode_rollout(const Autoencoder& ae, const LatentSeries& series, const SnapshotSeries& like,
                              bool apply_phase) {
  series.validate();
  require(series.d_h() == ae.d_h, ErrorKind::ShapeMismatch, "latent dimension does not match the autoencoder");
  SnapshotSeries out = matrix_series(like, decode(ae, series.h));
  out.save_every = series.tau;
  if (apply_phase) {
    parallel_for(out.count(), [&](std::size_t i) {
      auto snap = out.snapshot(i);
      const auto shifted = apply(Translate{-series.phi_x[i] / out.grid.alpha}, out.grid, out.n, snap);
      std::copy(shifted.begin(), shifted.end(), snap.begin());
    });
  }
  return out;
}

void save_latent_csv(const std::filesystem::path& path, const LatentSeries& series) {
  series.validate();
  CsvTable t;
  t.header.push_back("t");
  for (int j = 0; j < series.d_h(); ++j) t.header.push_back("h_" + std::to_string(j + 1));
  t.header.push_back("phi_x");
  for (std::size_t i = 0; i < series.count(); ++i) {
    std::vector<double> row{static_cast<double>(i) * series.tau};
    for (int j = 0; j < series.d_h(); ++j) row.push_back(series.h(j, static_cast<Eigen::Index>(i)));
    row.push_back(series.phi_x[i]);
    t.rows.push_back(std::move(row));
  }
  write_csv(path, t);
}

LatentSeries load_latent_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  require(t.header.size() >= 3 && t.header.front() == "t" && t.header.back() == "phi_x", ErrorKind::Format,
          path.string() + ": expected columns t, h_1..h_k, phi_x");
  const auto d = static_cast<Eigen::Index>(t.header.size() - 2);
  LatentSeries s;
  s.h.resize(d, static_cast<Eigen::Index>(t.rows.size()));
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j) s.h(j, static_cast<Eigen::Index>(i)) = t.rows[i][static_cast<std::size_t>(j) + 1];
    s.phi_x.push_back(t.rows[i].back());
  }
  if (t.rows.size() >= 2) s.tau = t.rows[1][0] - t.rows[0][0];
  require(s.tau > 0.0, ErrorKind::Format, path.string() + ": time column is not increasing");
  return s;
}

namespace {

nlohmann::json scaler_json(const Standardizer& s) {
  return {{"mean", std::vector<double>(s.mean.data(), s.mean.data() + s.mean.size())},
          {"stddev", std::vector<double>(s.stddev.data(), s.stddev.data() + s.stddev.size())}};
}

Standardizer scaler_from_json(const nlohmann::json& j) {
  const auto m = j.at("mean").get<std::vector<double>>();
  const auto s = j.at("stddev").get<std::vector<double>>();
  require(m.size() == s.size(), ErrorKind::Format, "standardizer mean/stddev lengths differ");
  Standardizer out;
  out.mean = Eigen::Map<const Eigen::VectorXd>(m.data(), static_cast<Eigen::Index>(m.size()));
  out.stddev = Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()));
  return out;
}

nlohmann::json info_json(const MapTrainResult& info) {
  return {{"seeds", info.seeds}, {"test_mse", info.test_mse}, {"best_index", info.best_index}};
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  write_file_atomic(path, [&](std::ostream& os) { os << j.dump(2) << '\n'; }, false);
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, path.string() + ": " + e.what());
  }
}

}  // namespace

void save_time_map(const std::filesystem::path& dir, const TimeMap& map, const MapTrainResult& info) {
  std::filesystem::create_directories(dir);
  nn::save_net(dir / "map.knet1", map.f);
  auto j = info_json(info);
  j["d_h"] = map.d_h();
  j["scaler"] = scaler_json(map.scaler);
  write_json(dir / "map.json", j);
}

TimeMap load_time_map(const std::filesystem::path& dir) {
  const auto j = read_json(dir / "map.json");
  TimeMap map;
  try {
    map.scaler = scaler_from_json(j.at("scaler"));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, (dir / "map.json").string() + ": " + e.what());
  }
  map.f = nn::load_net(dir / "map.knet1");
  require(map.f.input_dim() == map.f.output_dim() && map.scaler.mean.size() == map.f.input_dim(),
          ErrorKind::Format, (dir / "map.json").string() + ": map shape is inconsistent");
  return map;
}

void save_phase_map(const std::filesystem::path& dir, const PhaseMap& map, const MapTrainResult& info) {
  std::filesystem::create_directories(dir);
  nn::save_net(dir / "phase.knet1", map.g);
  auto j = info_json(info);
  j["d_h"] = map.g.input_dim();
  j["scaler"] = scaler_json(map.scaler);
  j["out_mean"] = map.out_mean;
  j["out_std"] = map.out_std;
  write_json(dir / "phase.json", j);
}

PhaseMap load_phase_map(const std::filesystem::path& dir) {
  const auto j = read_json(dir / "phase.json");
  PhaseMap map;
  try {
    map.scaler = scaler_from_json(j.at("scaler"));
    map.out_mean = j.at("out_mean").get<double>();
    map.out_std = j.at("out_std").get<double>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, (dir / "phase.json").string() + ": " + e.what());
  }
  map.g = nn::load_net(dir / "phase.knet1");
  require(map.g.output_dim() == 1 && map.scaler.mean.size() == map.g.input_dim(), ErrorKind::Format,
          (dir / "phase.json").string() + ": phase map shape is inconsistent");
  return map;
}

}  // namespace kolmo
