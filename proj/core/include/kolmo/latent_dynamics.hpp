#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <vector>

#include "kolmo/nnet.hpp"
#include "kolmo/reduction.hpp"
#include "kolmo/snapshot.hpp"

namespace kolmo {

/// Latent trajectory sampled every tau time units; h has one column per time.
struct LatentSeries {
  Eigen::MatrixXd h;
  std::vector<double> phi_x;
  double tau = 5.0;

  int d_h() const { return static_cast<int>(h.rows()); }
  std::size_t count() const { return static_cast<std::size_t>(h.cols()); }
  void validate() const;
  LatentSeries slice(std::size_t first, std::size_t count) const;
};

/// Encodes aligned snapshots and attaches the fixed-frame phase trace.
LatentSeries encode_series(const Autoencoder& ae, const SnapshotSeries& aligned, const std::vector<double>& phi_x);

/// Per-component affine standardization. Components with (near) zero spread
/// keep unit scale so constant data maps to zero.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;

  static Standardizer fit(const Eigen::MatrixXd& samples);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd invert(const Eigen::MatrixXd& z) const;
};

/// h(t + tau) = F(h(t)) on standardized coordinates.
struct TimeMap {
  nn::DenseNet f;
  Standardizer scaler;

  int d_h() const { return f.input_dim(); }
  Eigen::MatrixXd operator()(const Eigen::MatrixXd& h) const;
};

/// Predicted phase increment over the next tau from the current latent state.
struct PhaseMap {
  nn::DenseNet g;
  Standardizer scaler;
  double out_mean = 0.0;
  double out_std = 1.0;

  Eigen::VectorXd operator()(const Eigen::MatrixXd& h) const;
};

struct MapConfig {
  std::vector<int> hidden{500, 500};
  int n_models = 5;
  std::uint64_t seed_base = 0;
  nn::TrainConfig train{600, 64, 1e-3, 300, 0.1, 0};
};

struct MapTrainResult {
  std::vector<std::uint64_t> seeds;
  std::vector<double> test_mse;  // unstandardized, per sample squared norm
  std::vector<nn::LossHistory> histories;
  std::size_t best_index = 0;
};

/// Consecutive pairs (h(t), h(t + tau)).
nn::Dataset map_pairs(const LatentSeries& train, const LatentSeries& test);
/// Pairs (h(t), wrap(phi(t + tau) - phi(t))).
nn::Dataset phase_pairs(const LatentSeries& train, const LatentSeries& test);

std::pair<TimeMap, MapTrainResult> train_map(const LatentSeries& train, const LatentSeries& test,
                                             const MapConfig& cfg);
/// Default hidden layers for the phase map are {500, 500, 500}.
std::pair<PhaseMap, MapTrainResult> train_phase_map(const LatentSeries& train, const LatentSeries& test,
                                                    const MapConfig& cfg);

/// Iterates F from (h0, phi0); phi accumulates G's increments without
/// wrapping. A null phase map keeps phi constant. Throws NonFinite on blow-up.
LatentSeries rollout(const TimeMap& f, const PhaseMap* g, const Eigen::VectorXd& h0, double phi0, int steps,
                     double tau = 5.0);

/// Decodes every latent state. Snapshots stay in the aligned frame unless
/// apply_phase is set, in which case each is translated back by its phi_x.
/// Metadata (grid, re, n, dt) is taken from `like`; save_every becomes tau.
SnapshotSeries decode_rollout(const Autoencoder& ae, const LatentSeries& series, const SnapshotSeries& like,
                              bool apply_phase = false);

/// Latent CSV: t, h_1..h_dh, phi_x.
void save_latent_csv(const std::filesystem::path& path, const LatentSeries& series);
LatentSeries load_latent_csv(const std::filesystem::path& path);

/// map.knet1 + map.json / phase.knet1 + phase.json in dir.
void save_time_map(const std::filesystem::path& dir, const TimeMap& map, const MapTrainResult& info);
TimeMap load_time_map(const std::filesystem::path& dir);
void save_phase_map(const std::filesystem::path& dir, const PhaseMap& map, const MapTrainResult& info);
PhaseMap load_phase_map(const std::filesystem::path& dir);

}  // namespace kolmo
