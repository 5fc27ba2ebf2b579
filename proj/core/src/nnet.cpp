#include "kolmo/nnet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>

#include "kolmo/binary_io.hpp"
#include "kolmo/csv.hpp"
#include "kolmo/error.hpp"

namespace kolmo::nn {

namespace {

void activate(Eigen::MatrixXd& z, Activation act) {
  if (act == Activation::Sigmoid) z = (1.0 + (-z.array()).exp()).inverse().matrix();
}

void check_dims(const std::vector<int>& dims, const std::vector<Activation>& acts) {
  require(dims.size() >= 2, ErrorKind::InvalidArgument, "a net needs at least one layer");
  require(acts.size() + 1 == dims.size(), ErrorKind::InvalidArgument,
          "activation count must equal layer count");
  for (int d : dims) require(d > 0, ErrorKind::InvalidArgument, "layer dimensions must be positive");
}

}  // namespace

DenseNet::DenseNet(const std::vector<int>& dims, const std::vector<Activation>& activations, std::uint64_t seed) {
  check_dims(dims, activations);
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(dims[l]));
    std::uniform_real_distribution<double> dist(-bound, bound);
    DenseLayer layer;
    layer.weights.resize(dims[l + 1], dims[l]);
    layer.bias.resize(dims[l + 1]);
    for (Eigen::Index j = 0; j < layer.weights.cols(); ++j)
      for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) layer.weights(i, j) = dist(rng);
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias(i) = dist(rng);
    layer.activation = activations[l];
    layers_.push_back(std::move(layer));
  }
}

DenseNet::DenseNet(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  require(!layers_.empty(), ErrorKind::InvalidArgument, "a net needs at least one layer");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    require(layer.bias.size() == layer.weights.rows(), ErrorKind::ShapeMismatch, "bias length mismatch");
    if (l > 0)
      require(layer.weights.cols() == layers_[l - 1].weights.rows(), ErrorKind::ShapeMismatch,
              "weight shapes do not chain");
  }
}

DenseNet DenseNet::zeros(const std::vector<int>& dims, const std::vector<Activation>& activations) {
  check_dims(dims, activations);
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    layers.push_back({Eigen::MatrixXd::Zero(dims[l + 1], dims[l]), Eigen::VectorXd::Zero(dims[l + 1]),
                      activations[l]});
  }
  return DenseNet(std::move(layers));
}

std::vector<int> DenseNet::layer_dims() const {
  std::vector<int> dims;
  if (layers_.empty()) return dims;
  dims.push_back(static_cast<int>(layers_.front().weights.cols()));
  for (const auto& l : layers_) dims.push_back(static_cast<int>(l.weights.rows()));
  return dims;
}

std::vector<Activation> DenseNet::activations() const {
  std::vector<Activation> acts;
  for (const auto& l : layers_) acts.push_back(l.activation);
  return acts;
}

int DenseNet::input_dim() const { return layers_.empty() ? 0 : static_cast<int>(layers_.front().weights.cols()); }
int DenseNet::output_dim() const { return layers_.empty() ? 0 : static_cast<int>(layers_.back().weights.rows()); }

std::size_t DenseNet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
  return n;
}

Eigen::VectorXd DenseNet::forward(const Eigen::VectorXd& x) const {
  require(x.size() == input_dim(), ErrorKind::ShapeMismatch,
          "input length " + std::to_string(x.size()) + " != " + std::to_string(input_dim()));
  Eigen::VectorXd a = x;
  for (const auto& l : layers_) {
    Eigen::VectorXd z = l.weights * a + l.bias;
    if (l.activation == Activation::Sigmoid) z = (1.0 + (-z.array()).exp()).inverse().matrix();
    a = std::move(z);
  }
  return a;
}

Eigen::MatrixXd DenseNet::forward_batch(const Eigen::MatrixXd& x) const {
  require(x.rows() == input_dim(), ErrorKind::ShapeMismatch,
          "input rows " + std::to_string(x.rows()) + " != " + std::to_string(input_dim()));
  Eigen::MatrixXd a = x;
  for (const auto& l : layers_) {
    Eigen::MatrixXd z = l.weights * a;
    z.colwise() += l.bias;
    activate(z, l.activation);
    a = std::move(z);
  }
  return a;
}

Eigen::MatrixXd forward(const DenseNet& net, const Eigen::MatrixXd& x, ForwardCache& cache) {
  require(x.rows() == net.input_dim(), ErrorKind::ShapeMismatch, "input rows do not match net");
  cache.activations.clear();
  cache.activations.reserve(net.layer_count() + 1);
  cache.activations.push_back(x);
  for (const auto& l : net.layers()) {
    Eigen::MatrixXd z = l.weights * cache.activations.back();
    z.colwise() += l.bias;
    activate(z, l.activation);
    cache.activations.push_back(std::move(z));
  }
  return cache.activations.back();
}

Gradients Gradients::zeros_like(const DenseNet& net) {
  Gradients g;
  for (const auto& l : net.layers()) {
    g.weights.push_back(Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()));
    g.biases.push_back(Eigen::VectorXd::Zero(l.bias.size()));
  }
  return g;
}

double Gradients::max_abs() const {
  double m = 0.0;
  for (const auto& w : weights) m = std::max(m, w.cwiseAbs().maxCoeff());
  for (const auto& b : biases) m = std::max(m, b.cwiseAbs().maxCoeff());
  return m;
}

Eigen::MatrixXd backward(const DenseNet& net, const ForwardCache& cache, const Eigen::MatrixXd& grad_out,
                         Gradients& grads) {
  const auto& layers = net.layers();
  require(cache.activations.size() == layers.size() + 1, ErrorKind::InvalidArgument, "stale forward cache");
  require(grad_out.rows() == net.output_dim() && grad_out.cols() == cache.activations.back().cols(),
          ErrorKind::ShapeMismatch, "output gradient shape mismatch");
  Eigen::MatrixXd delta = grad_out;
  for (std::size_t li = layers.size(); li-- > 0;) {
    const auto& out = cache.activations[li + 1];
    if (layers[li].activation == Activation::Sigmoid) {
      delta.array() *= out.array() * (1.0 - out.array());
    }
    grads.weights[li].noalias() += delta * cache.activations[li].transpose();
    grads.biases[li] += delta.rowwise().sum();
    Eigen::MatrixXd next = layers[li].weights.transpose() * delta;
    delta = std::move(next);
  }
  return delta;
}

LossValue mse_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target) {
  require(pred.rows() == target.rows() && pred.cols() == target.cols(), ErrorKind::ShapeMismatch,
          "prediction and target shapes differ");
  const double batch = static_cast<double>(std::max<Eigen::Index>(1, pred.cols()));
  Eigen::MatrixXd residual = pred - target;
  LossValue v;
  v.loss = residual.squaredNorm() / batch;
  v.grad = (2.0 / batch) * residual;
  return v;
}

std::pair<double, Gradients> grad(const DenseNet& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                                  const PenaltyHook* penalty) {
  ForwardCache cache;
  const Eigen::MatrixXd pred = forward(net, x, cache);
  auto loss = mse_loss(pred, y);
  if (penalty && penalty->term) {
    auto extra = penalty->term(pred);
    loss.loss += penalty->weight * extra.loss;
    loss.grad += penalty->weight * extra.grad;
  }
  auto grads = Gradients::zeros_like(net);
  backward(net, cache, loss.grad, grads);
  return {loss.loss, std::move(grads)};
}

Adam::Adam(const DenseNet& net, AdamParams params)
    : params_(params), m_(Gradients::zeros_like(net)), v_(Gradients::zeros_like(net)) {}

void Adam::step(DenseNet& net, const Gradients& g) {
  ++t_;
  const double b1 = params_.beta1, b2 = params_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  const double step = params_.lr / c1;
  const double eps = params_.eps;
  auto update = [&](auto& param, auto& m, auto& v, const auto& gr) {
    m = b1 * m + (1.0 - b1) * gr;
    v = b2 * v + (1.0 - b2) * gr.cwiseProduct(gr);
    param.array() -= step * m.array() / ((v.array() / c2).sqrt() + eps);
  };
  auto& layers = net.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    update(layers[l].weights, m_.weights[l], v_.weights[l], g.weights[l]);
    update(layers[l].bias, m_.biases[l], v_.biases[l], g.biases[l]);
  }
}

void TrainConfig::validate() const {
  require(epochs > 0, ErrorKind::InvalidArgument, "epochs must be positive");
  require(batch_size > 0, ErrorKind::InvalidArgument, "batch size must be positive");
  require(lr >= 0.0, ErrorKind::InvalidArgument, "learning rate must be non-negative");
  require(lr_drop_factor > 0.0 && lr_drop_factor <= 1.0, ErrorKind::InvalidArgument,
          "lr drop factor must lie in (0, 1]");
}

double TrainConfig::lr_at(int epoch) const {
  return (lr_drop_epoch && epoch >= *lr_drop_epoch) ? lr * lr_drop_factor : lr;
}

std::vector<std::vector<Eigen::Index>> epoch_batches(Eigen::Index n, int batch_size, std::mt19937_64& rng) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<Eigen::Index>> batches;
  for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(batch_size)) {
    const auto end = std::min(order.size(), start + static_cast<std::size_t>(batch_size));
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

double evaluate_mse(const DenseNet& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  if (x.cols() == 0) return std::numeric_limits<double>::quiet_NaN();
  return mse_loss(net.forward_batch(x), y).loss;
}

std::pair<DenseNet, LossHistory> train(DenseNet net, const Dataset& data, const TrainConfig& cfg) {
  cfg.validate();
  require(data.x_train.cols() > 0, ErrorKind::EmptyData, "training set is empty");
  require(data.x_train.cols() == data.y_train.cols() && data.x_test.cols() == data.y_test.cols(),
          ErrorKind::ShapeMismatch, "feature/target sample counts differ");
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  Adam adam(net, AdamParams{cfg.lr});
  LossHistory history;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    adam.set_lr(cfg.lr_at(epoch));
    double total = 0.0;
    for (const auto& batch : epoch_batches(data.x_train.cols(), cfg.batch_size, rng)) {
      const Eigen::MatrixXd xb = data.x_train(Eigen::all, batch);
      const Eigen::MatrixXd yb = data.y_train(Eigen::all, batch);
      auto [loss, grads] = grad(net, xb, yb);
      require(std::isfinite(loss), ErrorKind::NonFinite, "training loss diverged at epoch " + std::to_string(epoch));
      total += loss * static_cast<double>(batch.size());
      adam.step(net, grads);
    }
    history.train.push_back(total / static_cast<double>(data.x_train.cols()));
    history.test.push_back(evaluate_mse(net, data.x_test, data.y_test));
  }
  return {std::move(net), std::move(history)};
}

std::size_t select_best(std::span<const double> test_losses) {
  require(!test_losses.empty(), ErrorKind::EmptyData, "no candidates to select from");
  std::size_t best = test_losses.size();
  for (std::size_t i = 0; i < test_losses.size(); ++i) {
    if (!std::isfinite(test_losses[i])) continue;
    if (best == test_losses.size() || test_losses[i] < test_losses[best]) best = i;
  }
  require(best < test_losses.size(), ErrorKind::NonFinite, "every candidate has a non-finite test loss");
  return best;
}

void save_net(const std::filesystem::path& path, const DenseNet& net) {
  write_file_atomic(path, [&](std::ostream& os) {
    BinaryWriter w(os);
    w.bytes("KNET1");
    w.u32(kNetVersion);
    w.u32(static_cast<std::uint32_t>(net.layer_count()));
    for (const auto& l : net.layers()) {
      w.u32(static_cast<std::uint32_t>(l.weights.cols()));
      w.u32(static_cast<std::uint32_t>(l.weights.rows()));
      w.u8(static_cast<std::uint8_t>(l.activation));
    }
    for (const auto& l : net.layers()) {
      for (Eigen::Index i = 0; i < l.weights.rows(); ++i)
        for (Eigen::Index j = 0; j < l.weights.cols(); ++j) w.f64(l.weights(i, j));
      for (Eigen::Index i = 0; i < l.bias.size(); ++i) w.f64(l.bias(i));
    }
  });
}

DenseNet load_net(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  BinaryReader r(in, path.string());
  r.expect_magic("KNET1");
  r.expect_version(kNetVersion);
  const auto count = r.u32();
  require(count > 0 && count < 1024, ErrorKind::Format, path.string() + ": implausible layer count");
  std::vector<DenseLayer> layers(count);
  for (auto& l : layers) {
    const auto in_dim = r.u32();
    const auto out_dim = r.u32();
    const auto act = r.u8();
    require(act <= 1, ErrorKind::Format, path.string() + ": unknown activation code");
    l.weights.resize(out_dim, in_dim);
    l.bias.resize(out_dim);
    l.activation = static_cast<Activation>(act);
  }
  for (auto& l : layers) {
    for (Eigen::Index i = 0; i < l.weights.rows(); ++i)
      for (Eigen::Index j = 0; j < l.weights.cols(); ++j) l.weights(i, j) = r.f64();
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias(i) = r.f64();
  }
  require(r.at_end(), ErrorKind::Format, path.string() + ": trailing bytes");
  return DenseNet(std::move(layers));
}

void save_history_csv(const std::filesystem::path& path, const LossHistory& history) {
  CsvTable t;
  t.header = {"epoch", "train_loss", "test_loss"};
  for (std::size_t e = 0; e < history.train.size(); ++e) {
    t.rows.push_back({static_cast<double>(e + 1), history.train[e],
                      e < history.test.size() ? history.test[e] : std::numeric_limits<double>::quiet_NaN()});
  }
  write_csv(path, t);
}

}  // namespace kolmo::nn
