#include "kolmo/burst_predict.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "kolmo/binary_io.hpp"
#include "kolmo/csv.hpp"
#include "kolmo/error.hpp"
#include "kolmo/grid.hpp"
#include "kolmo/parallel.hpp"
#include "kolmo/symmetry.hpp"

namespace kolmo {

std::string to_string(IndicatorKind kind) {
  switch (kind) {
    case IndicatorKind::Latent: return "latent";
    case IndicatorKind::PcaProj: return "pca";
    case IndicatorKind::Mode10Amp: return "mode10";
    case IndicatorKind::Mode02Amp: return "mode02";
    case IndicatorKind::DeltaPhi: return "dphi";
  }
  return "unknown";
}

IndicatorKind parse_indicator(const std::string& name) {
  for (auto k : {IndicatorKind::Latent, IndicatorKind::PcaProj, IndicatorKind::Mode10Amp, IndicatorKind::Mode02Amp,
                 IndicatorKind::DeltaPhi})
    if (to_string(k) == name) return k;
  fail(ErrorKind::InvalidArgument, "unknown indicator '" + name + "' (expected latent, pca, mode10, mode02, dphi)");
}

int feature_dim(const IndicatorSet& set) {
  return set.kind == IndicatorKind::Latent || set.kind == IndicatorKind::PcaProj ? set.d_h : 1;
}

Eigen::MatrixXd indicator_features(const IndicatorSet& set, const SnapshotSeries& aligned,
                                   const std::vector<double>& phi_x, const Autoencoder* ae, const PcaBasis* pca) {
  const auto count = static_cast<Eigen::Index>(aligned.count());
  switch (set.kind) {
    case IndicatorKind::Latent: {
      require(ae != nullptr, ErrorKind::InvalidArgument, "latent indicator needs an autoencoder");
      require(ae->d_h == set.d_h, ErrorKind::ShapeMismatch, "autoencoder latent dimension differs from d_h");
      return encode(*ae, series_matrix(aligned));
    }
    case IndicatorKind::PcaProj: {
      require(pca != nullptr, ErrorKind::InvalidArgument, "pca indicator needs a PCA basis");
      require(set.d_h >= 1 && set.d_h <= pca->dim(), ErrorKind::InvalidArgument, "d_h out of range for the basis");
      return pca->coefficients(series_matrix(aligned)).topRows(set.d_h);
    }
    case IndicatorKind::Mode10Amp:
    case IndicatorKind::Mode02Amp: {
      const int mx = set.kind == IndicatorKind::Mode10Amp ? 1 : 0;
      const int my = set.kind == IndicatorKind::Mode10Amp ? 0 : 2;
      const auto pos = aligned.grid.index(mx, my);
      Eigen::MatrixXd f(1, count);
      for (Eigen::Index i = 0; i < count; ++i)
        f(0, i) = std::abs(dft_forward_real(aligned.grid, aligned.snapshot(static_cast<std::size_t>(i)))[pos]);
      return f;
    }
    case IndicatorKind::DeltaPhi: {
      require(phi_x.size() == aligned.count(), ErrorKind::ShapeMismatch, "phase trace length differs from snapshots");
      Eigen::MatrixXd f(1, count);
      if (count > 0) f(0, 0) = std::numeric_limits<double>::quiet_NaN();
      for (Eigen::Index i = 1; i < count; ++i)
        f(0, i) = wrap_angle(phi_x[static_cast<std::size_t>(i)] - phi_x[static_cast<std::size_t>(i) - 1]);
      return f;
    }
  }
  fail(ErrorKind::InvalidArgument, "unknown indicator");
}

BurstDataset build_dataset(const Eigen::MatrixXd& features, const LabelSeries& labels, double tau, double tau_b) {
  require(tau > 0.0, ErrorKind::InvalidArgument, "tau must be positive");
  const double ratio = tau_b / tau;
  const double steps_d = std::round(ratio);
  require(tau_b >= 0.0 && std::abs(ratio - steps_d) < 1e-9 * std::max(1.0, ratio), ErrorKind::HorizonOutOfRange,
          "tau_b must be a non-negative multiple of tau");
  const auto shift = static_cast<std::size_t>(steps_d);

  std::vector<std::size_t> valid;
  for (std::size_t j = 0; j < labels.labels.size(); ++j) {
    const std::size_t target = labels.first_labeled + j;
    if (target < shift) continue;
    const std::size_t t = target - shift;
    if (t >= static_cast<std::size_t>(features.cols())) continue;
    if (!features.col(static_cast<Eigen::Index>(t)).allFinite()) continue;
    valid.push_back(t);
  }
  require(valid.size() >= 2, ErrorKind::HorizonOutOfRange,
          "horizon " + format_double(tau_b) + " leaves fewer than two labeled pairs");

  BurstDataset d;
  const std::size_t half = valid.size() / 2;
  auto fill = [&](std::size_t from, std::size_t to, Eigen::MatrixXd& x, std::vector<std::uint8_t>& y,
                  std::vector<std::size_t>& ts) {
    x.resize(features.rows(), static_cast<Eigen::Index>(to - from));
    for (std::size_t k = from; k < to; ++k) {
      const std::size_t t = valid[k];
      x.col(static_cast<Eigen::Index>(k - from)) = features.col(static_cast<Eigen::Index>(t));
      y.push_back(labels.labels[t + shift - labels.first_labeled]);
      ts.push_back(t);
    }
  };
  fill(0, half, d.x_train, d.y_train, d.t_train);
  fill(half, valid.size(), d.x_test, d.y_test, d.t_test);
  return d;
}

double SvmModel::decision(const Eigen::VectorXd& x) const {
  double f = bias;
  for (Eigen::Index k = 0; k < support_vectors.cols(); ++k)
    f += dual_coeffs(k) * sv_labels(k) * std::exp(-gamma * (support_vectors.col(k) - x).squaredNorm());
  return f;
}

std::vector<std::uint8_t> SvmModel::predict(const Eigen::MatrixXd& x) const {
  std::vector<std::uint8_t> out(static_cast<std::size_t>(x.cols()));
  parallel_for(out.size(), [&](std::size_t i) {
    out[i] = decision(x.col(static_cast<Eigen::Index>(i))) > 0.0 ? 1 : 0;
  });
  return out;
}

std::vector<std::size_t> stratified_subsample(const std::vector<std::uint8_t>& y, std::size_t max,
                                              std::uint64_t seed) {
  std::vector<std::size_t> all(y.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (y.size() <= max) return all;
  std::vector<std::size_t> cls[2];
  for (auto i : all) cls[y[i] ? 1 : 0].push_back(i);
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> out;
  const std::size_t take1 = static_cast<std::size_t>(
      std::llround(static_cast<double>(max) * static_cast<double>(cls[1].size()) / static_cast<double>(y.size())));
  const std::size_t takes[2] = {max - take1, take1};
  for (int c = 0; c < 2; ++c) {
    std::shuffle(cls[c].begin(), cls[c].end(), rng);
    out.insert(out.end(), cls[c].begin(), cls[c].begin() + static_cast<std::ptrdiff_t>(std::min(takes[c], cls[c].size())));
  }
  std::sort(out.begin(), out.end());
  return out;
}

SvmModel train_svm(const Eigen::MatrixXd& x_all, const std::vector<std::uint8_t>& y_all, const SvmParams& params) {
  require(static_cast<std::size_t>(x_all.cols()) == y_all.size(), ErrorKind::ShapeMismatch,
          "one label per feature column required");
  require(params.c > 0.0 && params.tol > 0.0, ErrorKind::InvalidArgument, "c and tol must be positive");
  require(x_all.allFinite(), ErrorKind::NonFinite, "features contain non-finite values");
  const auto keep = stratified_subsample(y_all, params.max_train, params.seed);
  const auto n = static_cast<Eigen::Index>(keep.size());
  const Eigen::MatrixXd x = x_all(Eigen::all, keep);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = y_all[keep[static_cast<std::size_t>(i)]] ? 1.0 : -1.0;
  require((y.array() > 0).any() && (y.array() < 0).any(), ErrorKind::SingleClass,
          "training labels contain a single class");

  SvmModel model;
  model.c = params.c;
  if (params.gamma) {
    model.gamma = *params.gamma;
  } else {
    const double m = x.mean();
    const double var = (x.array() - m).square().mean();
    model.gamma = var > 0.0 ? 1.0 / (static_cast<double>(x.rows()) * var) : 1.0;
  }
  require(model.gamma > 0.0, ErrorKind::InvalidArgument, "gamma must be positive");

  // Q_ij = y_i y_j K(x_i, x_j), held in full.
  const Eigen::VectorXd sq = x.colwise().squaredNorm().transpose();
  Eigen::MatrixXd q = x.transpose() * x;
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t jj) {
    const auto j = static_cast<Eigen::Index>(jj);
    for (Eigen::Index i = 0; i < n; ++i)
      q(i, j) = y(i) * y(j) * std::exp(-model.gamma * std::max(0.0, sq(i) + sq(j) - 2.0 * q(i, j)));
  });

  const double c = params.c;
  constexpr double kTau = 1e-12;
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd g = Eigen::VectorXd::Constant(n, -1.0);
  auto upper = [&](Eigen::Index t) { return alpha(t) >= c; };
  auto lower = [&](Eigen::Index t) { return alpha(t) <= 0.0; };

  long iter = 0;
  double gap = 0.0;
  for (; iter < params.max_iter; ++iter) {
    double gmax = -std::numeric_limits<double>::infinity();
    Eigen::Index i = -1;
    for (Eigen::Index t = 0; t < n; ++t) {
      if (y(t) > 0) {
        if (!upper(t) && -g(t) >= gmax) { gmax = -g(t); i = t; }
      } else {
        if (!lower(t) && g(t) >= gmax) { gmax = g(t); i = t; }
      }
    }
    double gmax2 = -std::numeric_limits<double>::infinity();
    Eigen::Index j = -1;
    double best_obj = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n && i >= 0; ++t) {
      if (y(t) > 0) {
        if (lower(t)) continue;
        const double diff = gmax + g(t);
        gmax2 = std::max(gmax2, g(t));
        if (diff > 0) {
          const double a = q(i, i) + q(t, t) - 2.0 * y(i) * q(i, t);
          const double obj = -diff * diff / (a > 0 ? a : kTau);
          if (obj <= best_obj) { best_obj = obj; j = t; }
        }
      } else {
        if (upper(t)) continue;
        const double diff = gmax - g(t);
        gmax2 = std::max(gmax2, -g(t));
        if (diff > 0) {
          const double a = q(i, i) + q(t, t) + 2.0 * y(i) * q(i, t);
          const double obj = -diff * diff / (a > 0 ? a : kTau);
          if (obj <= best_obj) { best_obj = obj; j = t; }
        }
      }
    }
    gap = gmax + gmax2;
    if (i < 0 || j < 0 || gap < params.tol) break;

    const double ai = alpha(i), aj = alpha(j);
    if (y(i) != y(j)) {
      double a = q(i, i) + q(j, j) + 2.0 * q(i, j);
      if (a <= 0) a = kTau;
      const double delta = (-g(i) - g(j)) / a;
      const double diff = ai - aj;
      alpha(i) += delta;
      alpha(j) += delta;
      if (diff > 0) {
        if (alpha(j) < 0) { alpha(j) = 0; alpha(i) = diff; }
      } else {
        if (alpha(i) < 0) { alpha(i) = 0; alpha(j) = -diff; }
      }
      if (diff > 0) {
        if (alpha(i) > c) { alpha(i) = c; alpha(j) = c - diff; }
      } else {
        if (alpha(j) > c) { alpha(j) = c; alpha(i) = c + diff; }
      }
    } else {
      double a = q(i, i) + q(j, j) - 2.0 * q(i, j);
      if (a <= 0) a = kTau;
      const double delta = (g(i) - g(j)) / a;
      const double sum = ai + aj;
      alpha(i) -= delta;
      alpha(j) += delta;
      if (sum > c) {
        if (alpha(i) > c) { alpha(i) = c; alpha(j) = sum - c; }
        if (alpha(j) > c) { alpha(j) = c; alpha(i) = sum - c; }
      } else {
        if (alpha(j) < 0) { alpha(j) = 0; alpha(i) = sum; }
        if (alpha(i) < 0) { alpha(i) = 0; alpha(j) = sum; }
      }
    }
    const double di = alpha(i) - ai, dj = alpha(j) - aj;
    g += q.col(i) * di + q.col(j) * dj;
  }
  model.kkt_violation = std::max(0.0, gap);
  model.iterations = iter;

  // Bias from free vectors, or the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity(), lb = -ub, sum_free = 0.0;
  long n_free = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double yg = y(t) * g(t);
    if (upper(t)) {
      if (y(t) < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (lower(t)) {
      if (y(t) > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);
  model.bias = -rho;

  std::vector<Eigen::Index> sv;
  for (Eigen::Index t = 0; t < n; ++t)
    if (alpha(t) > 0.0) sv.push_back(t);
  model.support_vectors = x(Eigen::all, sv);
  model.dual_coeffs = alpha(sv);
  model.sv_labels = y(sv);
  return model;
}

double accuracy(const std::vector<std::uint8_t>& truth, const std::vector<std::uint8_t>& pred) {
  require(truth.size() == pred.size(), ErrorKind::ShapeMismatch, "prediction count differs");
  if (truth.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::size_t ok = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) ok += truth[i] == pred[i];
  return static_cast<double>(ok) / static_cast<double>(truth.size());
}

double burst_recall(const std::vector<std::uint8_t>& truth, const std::vector<std::uint8_t>& pred) {
  require(truth.size() == pred.size(), ErrorKind::ShapeMismatch, "prediction count differs");
  std::size_t pos = 0, hit = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (!truth[i]) continue;
    ++pos;
    hit += pred[i] != 0;
  }
  return pos ? static_cast<double>(hit) / static_cast<double>(pos) : std::numeric_limits<double>::quiet_NaN();
}

std::vector<SweepRow> evaluate_horizon_sweep(const std::vector<NamedFeatures>& indicators, const LabelSeries& labels,
                                             double tau, const std::vector<double>& tau_bs, const SvmParams& params) {
  std::vector<SweepRow> rows;
  for (double tau_b : tau_bs) {
    std::optional<BurstDataset> reference;
    for (const auto& ind : indicators) {
      const auto data = build_dataset(ind.features, labels, tau, tau_b);
      const auto model = train_svm(data.x_train, data.y_train, params);
      const auto pred = model.predict(data.x_test);
      rows.push_back({ind.name, tau_b, 100.0 * accuracy(data.y_test, pred), 100.0 * burst_recall(data.y_test, pred),
                      std::min(data.y_train.size(), params.max_train), data.y_test.size()});
      if (!reference) reference = data;
    }
    if (!reference) {
      // No indicator given: the baseline still uses the label series alone.
      const Eigen::MatrixXd dummy = Eigen::MatrixXd::Zero(1, static_cast<Eigen::Index>(labels.last_labeled));
      reference = build_dataset(dummy, labels, tau, tau_b);
    }
    const auto ones = static_cast<std::size_t>(std::count(reference->y_train.begin(), reference->y_train.end(), 1));
    const std::uint8_t majority = 2 * ones > reference->y_train.size() ? 1 : 0;
    const std::vector<std::uint8_t> pred(reference->y_test.size(), majority);
    rows.push_back({"majority", tau_b, 100.0 * accuracy(reference->y_test, pred),
                    100.0 * burst_recall(reference->y_test, pred), reference->y_train.size(),
                    reference->y_test.size()});
  }
  return rows;
}

void save_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
  write_file_atomic(
      path,
      [&](std::ostream& os) {
        os << "indicator,tau_b,accuracy,burst_recall,n_train,n_test\n";
        for (const auto& r : rows) {
          os << r.indicator << ',' << format_double(r.tau_b) << ',' << format_double(r.accuracy) << ','
             << format_double(r.burst_recall) << ',' << r.n_train << ',' << r.n_test << '\n';
        }
      },
      false);
}

}  // namespace kolmo
