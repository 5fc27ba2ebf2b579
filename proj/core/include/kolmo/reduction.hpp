#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <vector>

#include "kolmo/nnet.hpp"
#include "kolmo/snapshot.hpp"

namespace kolmo {

/// Snapshots as columns of an N x count matrix.
Eigen::MatrixXd series_matrix(const SnapshotSeries& series);
/// Inverse of series_matrix; metadata copied from `like`.
SnapshotSeries matrix_series(const SnapshotSeries& like, const Eigen::MatrixXd& columns);

/// Full orthogonal basis of the (optionally centered) snapshot matrix, plus
/// the global scale applied to network inputs.
struct PcaBasis {
  Eigen::MatrixXd u;  // N x N, columns ordered by singular value
  Eigen::VectorXd singular_values;
  Eigen::VectorXd mean;  // zero when not centered
  bool centered = true;
  double scale = 1.0;

  int dim() const { return static_cast<int>(u.rows()); }
  /// U^T (w - mean), one column per sample.
  Eigen::MatrixXd coefficients(const Eigen::MatrixXd& w) const;
  /// U c + mean.
  Eigen::MatrixXd reconstruct(const Eigen::MatrixXd& c) const;
  /// Reconstruction from the first d coefficients only.
  Eigen::MatrixXd truncate(const Eigen::MatrixXd& w, int d) const;
};

/// Exact SVD of the data matrix (columns are snapshots). Throws DegenerateData
/// for rank-0 input. scale is max |w| over the data.
PcaBasis fit_pca(const Eigen::MatrixXd& data, bool center = true);

/// Mean squared entry of (a - b).
double reconstruction_mse(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// h = P c + s E(c / s) and c~ = [h; 0] + s D(h / s), with c the PCA
/// coefficients and s the basis scale.
struct Autoencoder {
  int d_h = 0;
  PcaBasis pca;
  nn::DenseNet enc;
  nn::DenseNet dec;
  double alpha_l = 1.0;
  /// When false the encoder is bypassed and h is the plain PCA projection.
  bool use_encoder = true;

  void validate() const;
};

/// Builds an untrained autoencoder with the given hidden widths: encoder
/// N:enc_hidden:d_h (all sigmoid), decoder d_h:dec_hidden:N (sigmoid, linear
/// output).
Autoencoder make_autoencoder(const PcaBasis& pca, int d_h, const std::vector<int>& enc_hidden,
                             const std::vector<int>& dec_hidden, std::uint64_t seed, double alpha_l = 1.0);

Eigen::MatrixXd encode(const Autoencoder& ae, const Eigen::MatrixXd& w);
Eigen::VectorXd encode(const Autoencoder& ae, const Eigen::VectorXd& w);
Eigen::MatrixXd decode(const Autoencoder& ae, const Eigen::MatrixXd& h);
Eigen::VectorXd decode(const Autoencoder& ae, const Eigen::VectorXd& h);

/// Per-sample loss ||w - w~||^2 + alpha_l ||s E + s D_{1:d_h}||^2, averaged
/// over the columns of w.
double ae_loss(const Autoencoder& ae, const Eigen::MatrixXd& w);

struct AeGradients {
  nn::Gradients enc;
  nn::Gradients dec;
};

/// Batch-mean loss and exact gradients with respect to both nets.
std::pair<double, AeGradients> ae_grad(const Autoencoder& ae, const Eigen::MatrixXd& w);

struct AeConfig {
  int d_h = 2;
  std::vector<int> enc_hidden{5000, 1000};
  std::vector<int> dec_hidden{1000, 5000};
  double alpha_l = 1.0;
  int n_models = 4;
  std::uint64_t seed_base = 0;
  nn::TrainConfig train;
};

struct AeTrainResult {
  Autoencoder best;
  std::size_t best_index = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<double> test_mse;  // per model, mean squared entry
  std::vector<nn::LossHistory> histories;
  double pca_test_mse = 0.0;     // PCA truncated to d_h on the same test data
};

/// Trains one autoencoder; history records the per-sample loss (reconstruction
/// plus alpha_l penalty) on train batches and on the test set after every epoch.
std::pair<Autoencoder, nn::LossHistory> train_autoencoder_once(Autoencoder ae, const Eigen::MatrixXd& train,
                                                               const Eigen::MatrixXd& test,
                                                               const nn::TrainConfig& cfg);

/// Fits PCA on the training columns, trains n_models seeds and keeps the one
/// with the smallest test reconstruction MSE.
AeTrainResult train_autoencoder(const Eigen::MatrixXd& train, const Eigen::MatrixXd& test, const AeConfig& cfg,
                                bool center = true);

// pca.bin: "KPCA1", u32 version, u32 N, u8 centered, f64 scale, N f64 singular
// values, N f64 mean, N*N f64 U row-major.
inline constexpr std::uint32_t kPcaVersion = 1;
void save_pca(const std::filesystem::path& path, const PcaBasis& pca);
PcaBasis load_pca(const std::filesystem::path& path);

struct AeBundleMeta {
  std::vector<std::uint64_t> seeds;
  std::vector<double> test_mse;
  std::size_t best_index = 0;
  Grid grid;
};

/// Writes pca.bin, enc.knet1, dec.knet1 and meta.json into dir.
void save_autoencoder(const std::filesystem::path& dir, const Autoencoder& ae, const AeBundleMeta& meta);
Autoencoder load_autoencoder(const std::filesystem::path& dir, AeBundleMeta* meta = nullptr);

}  // namespace kolmo
