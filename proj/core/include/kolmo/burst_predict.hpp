#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kolmo/labeling.hpp"
#include "kolmo/reduction.hpp"
#include "kolmo/snapshot.hpp"

namespace kolmo {

enum class IndicatorKind { Latent, PcaProj, Mode10Amp, Mode02Amp, DeltaPhi };

struct IndicatorSet {
  IndicatorKind kind = IndicatorKind::Latent;
  int d_h = 5;  // Latent and PcaProj only
};

std::string to_string(IndicatorKind kind);
/// Accepts latent, pca, mode10, mode02, dphi. Throws InvalidArgument.
IndicatorKind parse_indicator(const std::string& name);
int feature_dim(const IndicatorSet& set);

/// Per-snapshot feature columns. Latent needs ae, PcaProj needs pca (the
/// first d_h coefficients), DeltaPhi uses the phase increment into each
/// snapshot, so column 0 is NaN (unavailable).
Eigen::MatrixXd indicator_features(const IndicatorSet& set, const SnapshotSeries& aligned,
                                   const std::vector<double>& phi_x, const Autoencoder* ae = nullptr,
                                   const PcaBasis* pca = nullptr);

struct BurstDataset {
  Eigen::MatrixXd x_train, x_test;
  std::vector<std::uint8_t> y_train, y_test;
  std::vector<std::size_t> t_train, t_test;  // snapshot index of each feature
};

/// Pairs the feature at snapshot t with the label at t + tau_b and splits the
/// valid pairs chronologically into halves. Throws HorizonOutOfRange unless
/// tau_b is a non-negative multiple of tau that leaves at least one pair.
BurstDataset build_dataset(const Eigen::MatrixXd& features, const LabelSeries& labels, double tau, double tau_b);

struct SvmParams {
  double c = 1.0;
  std::optional<double> gamma;  // default 1 / (dim * feature variance)
  double tol = 1e-3;
  std::size_t max_train = 5000;
  std::uint64_t seed = 0;
  long max_iter = 10'000'000;
};

struct SvmModel {
  Eigen::MatrixXd support_vectors;  // dim x n_sv
  Eigen::VectorXd dual_coeffs;      // alpha_i in [0, c]
  Eigen::VectorXd sv_labels;        // +-1
  double bias = 0.0;
  double gamma = 1.0;
  double c = 1.0;
  double kkt_violation = 0.0;  // max violating pair gap at exit
  long iterations = 0;

  double decision(const Eigen::VectorXd& x) const;
  std::vector<std::uint8_t> predict(const Eigen::MatrixXd& x) const;
};

/// Stratified seeded subsample of at most max points; returns column indices.
std::vector<std::size_t> stratified_subsample(const std::vector<std::uint8_t>& y, std::size_t max,
                                              std::uint64_t seed);

/// RBF-kernel C-SVM trained by SMO with second-order working-set selection.
/// Labels are 0/1. Throws SingleClass if only one class is present.
SvmModel train_svm(const Eigen::MatrixXd& x, const std::vector<std::uint8_t>& y, const SvmParams& params = {});

double accuracy(const std::vector<std::uint8_t>& truth, const std::vector<std::uint8_t>& pred);
/// Fraction of true bursting samples predicted as bursting (NaN if none).
double burst_recall(const std::vector<std::uint8_t>& truth, const std::vector<std::uint8_t>& pred);

struct SweepRow {
  std::string indicator;  // "majority" for the baseline row
  double tau_b = 0.0;
  double accuracy = 0.0;      // percent
  double burst_recall = 0.0;  // percent
  std::size_t n_train = 0;
  std::size_t n_test = 0;
};

struct NamedFeatures {
  std::string name;
  Eigen::MatrixXd features;
};

/// Trains one SVM per (indicator, tau_b) and reports test accuracy; every
/// tau_b also gets a majority-class baseline row.
std::vector<SweepRow> evaluate_horizon_sweep(const std::vector<NamedFeatures>& indicators, const LabelSeries& labels,
                                             double tau, const std::vector<double>& tau_bs, const SvmParams& params);

/// CSV: indicator, tau_b, accuracy, burst_recall, n_train, n_test.
void save_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows);

}  // namespace kolmo
