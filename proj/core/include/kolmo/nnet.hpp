#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace kolmo::nn {

enum class Activation : std::uint8_t { Sigmoid = 0, Linear = 1 };

struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;
  Activation activation = Activation::Linear;
};

/// Fully connected feedforward net. Batches are column-major: one sample per
/// column.
class DenseNet {
 public:
  DenseNet() = default;
  /// dims has layer_count + 1 entries; weights and biases drawn uniformly from
  /// [-1/sqrt(fan_in), 1/sqrt(fan_in)].
  DenseNet(const std::vector<int>& dims, const std::vector<Activation>& activations, std::uint64_t seed);
  explicit DenseNet(std::vector<DenseLayer> layers);

  static DenseNet zeros(const std::vector<int>& dims, const std::vector<Activation>& activations);

  std::vector<int> layer_dims() const;
  std::vector<Activation> activations() const;
  int input_dim() const;
  int output_dim() const;
  std::size_t layer_count() const { return layers_.size(); }
  std::size_t parameter_count() const;

  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }

  /// Throws ShapeMismatch if x has the wrong length.
  Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& x) const;

 private:
  std::vector<DenseLayer> layers_;
};

/// Activations of every layer (entry 0 is the input) for a backward pass.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> activations;
};

Eigen::MatrixXd forward(const DenseNet& net, const Eigen::MatrixXd& x, ForwardCache& cache);

struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  static Gradients zeros_like(const DenseNet& net);
  double max_abs() const;
};

/// Accumulates parameter gradients into grads and returns dL/dx.
Eigen::MatrixXd backward(const DenseNet& net, const ForwardCache& cache, const Eigen::MatrixXd& grad_out,
                         Gradients& grads);

/// Loss value with its gradient with respect to the net output.
struct LossValue {
  double loss = 0.0;
  Eigen::MatrixXd grad;
};

/// Batch mean of squared l2 residual norms: (1/B) sum_b ||pred_b - target_b||^2.
LossValue mse_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target);

/// Optional extra term on the output, added as weight * term(pred).
struct PenaltyHook {
  double weight = 0.0;
  std::function<LossValue(const Eigen::MatrixXd& pred)> term;
};

/// Exact gradient of the MSE loss (plus penalty) over one batch.
std::pair<double, Gradients> grad(const DenseNet& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                                  const PenaltyHook* penalty = nullptr);

struct AdamParams {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  Adam(const DenseNet& net, AdamParams params = {});

  void set_lr(double lr) { params_.lr = lr; }
  double lr() const { return params_.lr; }
  void step(DenseNet& net, const Gradients& grads);

 private:
  AdamParams params_;
  long t_ = 0;
  Gradients m_, v_;
};

struct TrainConfig {
  int epochs = 300;
  int batch_size = 64;
  double lr = 1e-3;
  std::optional<int> lr_drop_epoch;
  double lr_drop_factor = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
  /// Learning rate in effect during the given 0-based epoch.
  double lr_at(int epoch) const;
};

struct LossHistory {
  std::vector<double> train;
  std::vector<double> test;
};

struct Dataset {
  Eigen::MatrixXd x_train, y_train;
  Eigen::MatrixXd x_test, y_test;
};

/// Seeded per-epoch shuffle split into batches.
std::vector<std::vector<Eigen::Index>> epoch_batches(Eigen::Index n, int batch_size, std::mt19937_64& rng);

/// Mean of batch losses seen during the epoch is recorded as the train loss;
/// test loss is the MSE over the test set after the epoch (NaN if empty).
/// Throws NonFinite if the loss diverges.
std::pair<DenseNet, LossHistory> train(DenseNet net, const Dataset& data, const TrainConfig& cfg);

double evaluate_mse(const DenseNet& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

/// Index of the smallest finite entry (first on ties).
std::size_t select_best(std::span<const double> test_losses);

// KNET1: "KNET1", u32 version, u32 layer count, per layer (u32 in, u32 out,
// u8 activation), then per layer f64 weights row-major and f64 biases.
inline constexpr std::uint32_t kNetVersion = 1;

void save_net(const std::filesystem::path& path, const DenseNet& net);
DenseNet load_net(const std::filesystem::path& path);

/// CSV columns: epoch, train_loss, test_loss.
void save_history_csv(const std::filesystem::path& path, const LossHistory& history);

}  // namespace kolmo::nn
