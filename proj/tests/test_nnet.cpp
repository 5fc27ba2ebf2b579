#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "kolmo/error.hpp"
#include "kolmo/nnet.hpp"

using namespace kolmo;
using namespace kolmo::nn;

namespace {

using Eigen::MatrixXd;

MatrixXd random_matrix(int r, int c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, 1.0);
  MatrixXd m(r, c);
  for (int j = 0; j < c; ++j)
    for (int i = 0; i < r; ++i) m(i, j) = d(rng);
  return m;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1e-8, std::abs(a) + std::abs(b)); }

// Central differences over every parameter of the net.
template <class LossFn>
double worst_param_error(DenseNet net, const Gradients& g, LossFn loss, double h = 1e-5) {
  double worst = 0.0;
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    auto& layer = net.layers()[l];
    for (Eigen::Index k = 0; k < layer.weights.size(); ++k) {
      const double keep = layer.weights.data()[k];
      layer.weights.data()[k] = keep + h;
      const double up = loss(net);
      layer.weights.data()[k] = keep - h;
      const double dn = loss(net);
      layer.weights.data()[k] = keep;
      worst = std::max(worst, rel_err((up - dn) / (2 * h), g.weights[l].data()[k]));
    }
    for (Eigen::Index k = 0; k < layer.bias.size(); ++k) {
      const double keep = layer.bias(k);
      layer.bias(k) = keep + h;
      const double up = loss(net);
      layer.bias(k) = keep - h;
      const double dn = loss(net);
      layer.bias(k) = keep;
      worst = std::max(worst, rel_err((up - dn) / (2 * h), g.biases[l](k)));
    }
  }
  return worst;
}

}  // namespace

TEST(DenseNet, ShapesAndInitRange) {
  DenseNet net({4, 7, 3}, {Activation::Sigmoid, Activation::Linear}, 1);
  EXPECT_EQ(net.input_dim(), 4);
  EXPECT_EQ(net.output_dim(), 3);
  EXPECT_EQ(net.parameter_count(), 4u * 7 + 7 + 7 * 3 + 3);
  EXPECT_LE(net.layers()[0].weights.cwiseAbs().maxCoeff(), 1.0 / std::sqrt(4.0));
  EXPECT_LE(net.layers()[1].weights.cwiseAbs().maxCoeff(), 1.0 / std::sqrt(7.0));
  EXPECT_THROW(net.forward(Eigen::VectorXd::Zero(5)), Error);
}

TEST(DenseNet, ForwardMatchesHandComputation) {
  DenseLayer l1{MatrixXd{{1.0, -2.0}}, Eigen::VectorXd::Constant(1, 0.5), Activation::Sigmoid};
  DenseLayer l2{MatrixXd{{3.0}}, Eigen::VectorXd::Constant(1, -1.0), Activation::Linear};
  DenseNet net({l1, l2});
  const double z = 1.0 * 0.3 - 2.0 * 0.7 + 0.5;
  const double want = 3.0 / (1.0 + std::exp(-z)) - 1.0;
  EXPECT_NEAR(net.forward(Eigen::Vector2d(0.3, 0.7))(0), want, 1e-15);
}

TEST(Grad, MseMatchesFiniteDifferences) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    DenseNet net({3, 6, 5, 2}, {Activation::Sigmoid, Activation::Sigmoid, Activation::Linear}, seed);
    const MatrixXd x = random_matrix(3, 7, seed + 10), y = random_matrix(2, 7, seed + 20);
    const auto [loss, g] = grad(net, x, y);
    EXPECT_NEAR(loss, mse_loss(net.forward_batch(x), y).loss, 1e-14);
    EXPECT_LT(worst_param_error(net, g, [&](const DenseNet& n) { return mse_loss(n.forward_batch(x), y).loss; }),
              1e-6);
  }
}

TEST(Grad, PenaltyHookIncluded) {
  DenseNet net({2, 4, 3}, {Activation::Sigmoid, Activation::Linear}, 5);
  const MatrixXd x = random_matrix(2, 4, 1), y = random_matrix(3, 4, 2);
  PenaltyHook hook{0.7, [](const MatrixXd& p) {
                     // sum of cubes, averaged over the batch
                     LossValue v;
                     v.loss = p.array().cube().sum() / p.cols();
                     v.grad = 3.0 * p.array().square() / p.cols();
                     return v;
                   }};
  const auto [loss, g] = grad(net, x, y, &hook);
  auto total = [&](const DenseNet& n) {
    const MatrixXd p = n.forward_batch(x);
    return mse_loss(p, y).loss + 0.7 * p.array().cube().sum() / p.cols();
  };
  EXPECT_NEAR(loss, total(net), 1e-13);
  EXPECT_LT(worst_param_error(net, g, total), 1e-6);
}

TEST(Backward, InputGradientMatchesFiniteDifferences) {
  DenseNet net({3, 5, 2}, {Activation::Sigmoid, Activation::Linear}, 9);
  MatrixXd x = random_matrix(3, 2, 4);
  const MatrixXd y = random_matrix(2, 2, 5);
  ForwardCache cache;
  const MatrixXd pred = forward(net, x, cache);
  auto g = Gradients::zeros_like(net);
  const MatrixXd dx = backward(net, cache, mse_loss(pred, y).grad, g);
  const double h = 1e-6;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double keep = x.data()[k];
    x.data()[k] = keep + h;
    const double up = mse_loss(net.forward_batch(x), y).loss;
    x.data()[k] = keep - h;
    const double dn = mse_loss(net.forward_batch(x), y).loss;
    x.data()[k] = keep;
    EXPECT_LT(rel_err((up - dn) / (2 * h), dx.data()[k]), 1e-6);
  }
}

TEST(Loss, MseIsMeanSquaredNormPerSample) {
  const MatrixXd p{{1.0, 0.0}, {2.0, 0.0}};
  const MatrixXd t{{0.0, 0.0}, {0.0, 3.0}};
  // samples: ||(1,2)||^2 = 5, ||(0,-3)||^2 = 9
  EXPECT_DOUBLE_EQ(mse_loss(p, t).loss, 7.0);
}

TEST(Adam, FirstStepMovesEachParameterByLr) {
  DenseNet net({2, 2}, {Activation::Linear}, 3);
  const DenseNet before = net;
  auto g = Gradients::zeros_like(net);
  g.weights[0] << 0.5, -2.0, 1e-3, -7.0;
  g.biases[0] << 3.0, -0.25;
  Adam opt(net, {0.01, 0.9, 0.999, 1e-12});
  opt.step(net, g);
  const MatrixXd dw = net.layers()[0].weights - before.layers()[0].weights;
  for (Eigen::Index k = 0; k < dw.size(); ++k)
    EXPECT_NEAR(dw.data()[k], -0.01 * (g.weights[0].data()[k] > 0 ? 1 : -1), 1e-9);
  const Eigen::VectorXd db = net.layers()[0].bias - before.layers()[0].bias;
  EXPECT_NEAR(db(0), -0.01, 1e-9);
  EXPECT_NEAR(db(1), 0.01, 1e-9);
}

TEST(Train, FitsSmoothFunctionAndIsDeterministic) {
  const int n = 200;
  MatrixXd x(1, n), y(1, n);
  for (int i = 0; i < n; ++i) {
    x(0, i) = -2.0 + 4.0 * i / (n - 1);
    y(0, i) = std::sin(1.5 * x(0, i));
  }
  Dataset data{x, y, x, y};
  TrainConfig cfg;
  cfg.epochs = 300;
  cfg.batch_size = 16;
  cfg.lr = 1e-2;
  cfg.lr_drop_epoch = 200;
  cfg.seed = 4;
  DenseNet net({1, 16, 1}, {Activation::Sigmoid, Activation::Linear}, 2);
  const double start = evaluate_mse(net, x, y);
  const auto [a, ha] = train(net, data, cfg);
  const auto [b, hb] = train(net, data, cfg);
  EXPECT_LT(ha.test.back(), 0.02 * start);
  EXPECT_EQ(ha.train, hb.train);
  EXPECT_EQ(a.layers()[0].weights, b.layers()[0].weights);
  EXPECT_EQ(ha.train.size(), 300u);
}

TEST(TrainConfig, LearningRateSchedule) {
  TrainConfig cfg;
  cfg.lr = 1e-3;
  cfg.lr_drop_epoch = 300;
  cfg.lr_drop_factor = 0.1;
  EXPECT_DOUBLE_EQ(cfg.lr_at(0), 1e-3);
  EXPECT_DOUBLE_EQ(cfg.lr_at(299), 1e-3);
  EXPECT_DOUBLE_EQ(cfg.lr_at(300), 1e-4);
  cfg.epochs = 0;
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(Batches, CoverEverySampleOnce) {
  std::mt19937_64 rng(1);
  const auto batches = epoch_batches(103, 10, rng);
  EXPECT_EQ(batches.size(), 11u);
  std::vector<int> seen(103, 0);
  for (const auto& b : batches)
    for (auto i : b) ++seen[static_cast<std::size_t>(i)];
  for (int s : seen) EXPECT_EQ(s, 1);
}

TEST(SelectBest, SkipsNonFinite) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::vector<double> v{nan, 3.0, 1.0, 1.0, std::numeric_limits<double>::infinity()};
  EXPECT_EQ(select_best(v), 2u);
}

TEST(Knet, RoundTripIsBitExactAndStrict) {
  DenseNet net({5, 4, 3}, {Activation::Sigmoid, Activation::Linear}, 12);
  const auto path = std::filesystem::temp_directory_path() / "kolmo_test.knet1";
  save_net(path, net);
  const auto back = load_net(path);
  ASSERT_EQ(back.layer_count(), 2u);
  for (std::size_t l = 0; l < 2; ++l) {
    EXPECT_EQ(back.layers()[l].weights, net.layers()[l].weights);
    EXPECT_EQ(back.layers()[l].bias, net.layers()[l].bias);
    EXPECT_EQ(back.layers()[l].activation, net.layers()[l].activation);
  }
  {
    std::ofstream f(path, std::ios::binary | std::ios::app);
    f << 'x';
  }
  EXPECT_THROW(load_net(path), Error);
  {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f << "KNETX";
  }
  EXPECT_THROW(load_net(path), Error);
  std::filesystem::remove(path);
}
