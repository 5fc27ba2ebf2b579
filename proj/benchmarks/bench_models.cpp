#include <benchmark/benchmark.h>

#include <random>

#include "kolmo/burst_predict.hpp"
#include "kolmo/labeling.hpp"
#include "kolmo/nnet.hpp"
#include "kolmo/stats.hpp"

using namespace kolmo;
using Eigen::MatrixXd;

namespace {

MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  MatrixXd m(r, c);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = d(rng);
  return m;
}

}  // namespace

static void BM_NetForwardBackward(benchmark::State& state) {
  const auto width = static_cast<int>(state.range(0));
  nn::DenseNet net({1024, width, 64, 9}, {nn::Activation::Sigmoid, nn::Activation::Sigmoid, nn::Activation::Linear},
                   1);
  const MatrixXd x = random_matrix(1024, 64, 2), y = random_matrix(9, 64, 3);
  for (auto _ : state) benchmark::DoNotOptimize(nn::grad(net, x, y));
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_NetForwardBackward)->Arg(256)->Arg(1024);

static void BM_SvmTrain(benchmark::State& state) {
  const auto n = state.range(0);
  const MatrixXd x = random_matrix(5, n, 4);
  std::vector<std::uint8_t> y(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = x(0, i) * x(1, i) + 0.3 * x(2, i) > 0;
  for (auto _ : state) benchmark::DoNotOptimize(train_svm(x, y));
}
BENCHMARK(BM_SvmTrain)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

static void BM_LabelNorms(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> d(55.0, 8.0);
  std::vector<double> w(100000);
  for (auto& v : w) v = d(rng);
  for (auto _ : state) benchmark::DoNotOptimize(label_norms(w));
}
BENCHMARK(BM_LabelNorms);

static void BM_Msd(benchmark::State& state) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> d;
  std::vector<double> phi(20000);
  double x = 0.0;
  for (auto& v : phi) v = (x += d(rng));
  for (auto _ : state) benchmark::DoNotOptimize(msd(phi, 600, 5.0));
}
BENCHMARK(BM_Msd)->Unit(benchmark::kMillisecond);
