#include "kolmo/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "kolmo/binary_io.hpp"
#include "kolmo/csv.hpp"
#include "kolmo/error.hpp"
#include "kolmo/parallel.hpp"

namespace kolmo {

namespace {

std::vector<double> linspace_edges(double lo, double hi, std::size_t bins) {
  std::vector<double> e(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) e[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
  e.back() = hi;
  return e;
}

// Bin of v in uniform edges, or npos when outside [lo, hi].
std::size_t bin_of(double v, double lo, double hi, std::size_t bins) {
  if (!(v >= lo && v <= hi)) return std::numeric_limits<std::size_t>::max();
  const auto k = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(bins));
  return std::min(k, bins - 1);
}

void pad(double& lo, double& hi) {
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
}

}  // namespace

Range2D pooled_range(std::span<const std::span<const double>> xs, std::span<const std::span<const double>> ys) {
  Range2D r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (auto s : xs)
    for (double v : s) {
      r.x_min = std::min(r.x_min, v);
      r.x_max = std::max(r.x_max, v);
    }
  for (auto s : ys)
    for (double v : s) {
      r.y_min = std::min(r.y_min, v);
      r.y_max = std::max(r.y_max, v);
    }
  require(std::isfinite(r.x_min) && std::isfinite(r.y_min) && std::isfinite(r.x_max) && std::isfinite(r.y_max),
          ErrorKind::EmptyData, "no finite samples to take a range from");
  pad(r.x_min, r.x_max);
  pad(r.y_min, r.y_max);
  return r;
}

double Histogram2D::cell_area(std::size_t i, std::size_t j) const {
  return (x_edges[i + 1] - x_edges[i]) * (y_edges[j + 1] - y_edges[j]);
}

double Histogram2D::density(std::size_t i, std::size_t j) const { return mass[i * ny_bins() + j] / cell_area(i, j); }

Histogram2D joint_pdf(std::span<const double> a, std::span<const double> b, std::size_t x_bins,
                      std::size_t y_bins, const Range2D& range) {
  require(a.size() == b.size(), ErrorKind::ShapeMismatch, "joint PDF series differ in length");
  require(x_bins > 0 && y_bins > 0, ErrorKind::InvalidArgument, "bin counts must be positive");
  require(range.x_max > range.x_min && range.y_max > range.y_min, ErrorKind::InvalidArgument,
          "histogram range is empty");
  Histogram2D h;
  h.x_edges = linspace_edges(range.x_min, range.x_max, x_bins);
  h.y_edges = linspace_edges(range.y_min, range.y_max, y_bins);
  h.counts.assign(x_bins * y_bins, 0);
  std::size_t inside = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const auto i = bin_of(a[k], range.x_min, range.x_max, x_bins);
    const auto j = bin_of(b[k], range.y_min, range.y_max, y_bins);
    if (i >= x_bins || j >= y_bins) continue;
    ++h.counts[i * y_bins + j];
    ++inside;
  }
  require(inside > 0, ErrorKind::EmptyData, "no samples fall inside the histogram range");
  h.mass.resize(h.counts.size());
  for (std::size_t c = 0; c < h.counts.size(); ++c)
    h.mass[c] = static_cast<double>(h.counts[c]) / static_cast<double>(inside);
  return h;
}

double kl_divergence(const Histogram2D& pred, const Histogram2D& truth) {
  require(pred.x_edges == truth.x_edges && pred.y_edges == truth.y_edges, ErrorKind::BinMismatch,
          "histograms use different bin edges");
  double kl = 0.0;
  for (std::size_t c = 0; c < pred.mass.size(); ++c) {
    const double p = pred.mass[c];
    const double q = truth.mass[c];
    if (p > 0.0 && q > 0.0) kl += p * std::log(p / q);
  }
  return kl;
}

double split_half_kl(std::span<const double> a, std::span<const double> b, std::size_t bins, const Range2D& range) {
  require(a.size() == b.size(), ErrorKind::ShapeMismatch, "series differ in length");
  require(a.size() >= 2, ErrorKind::TooShort, "need at least two samples to split");
  const std::size_t half = a.size() / 2;
  const auto first = joint_pdf(a.first(half), b.first(half), bins, bins, range);
  const auto second = joint_pdf(a.subspan(half), b.subspan(half), bins, bins, range);
  return kl_divergence(second, first);
}

double sample_kl(std::span<const double> pred, std::span<const double> truth, std::size_t bins) {
  require(!pred.empty() && !truth.empty(), ErrorKind::EmptyData, "empty sample");
  const std::vector<double> zp(pred.size(), 0.0), zt(truth.size(), 0.0);
  const std::span<const double> xs[] = {pred, truth};
  const std::span<const double> ys[] = {zp, zt};
  const auto range = pooled_range(xs, ys);
  return kl_divergence(joint_pdf(pred, zp, bins, 1, range), joint_pdf(truth, zt, bins, 1, range));
}

void save_pdf_matrix(const std::filesystem::path& path, const Histogram2D& hist) {
  write_file_atomic(
      path,
      [&](std::ostream& os) {
        os << "# x y density\n";
        for (std::size_t i = 0; i < hist.nx_bins(); ++i) {
          const double x = 0.5 * (hist.x_edges[i] + hist.x_edges[i + 1]);
          for (std::size_t j = 0; j < hist.ny_bins(); ++j) {
            const double y = 0.5 * (hist.y_edges[j] + hist.y_edges[j + 1]);
            os << format_double(x) << ' ' << format_double(y) << ' ' << format_double(hist.density(i, j)) << '\n';
          }
          os << '\n';
        }
      },
      false);
}

MsdCurve msd(std::span<const std::span<const double>> runs, std::size_t max_lag, double dt) {
  require(dt > 0.0, ErrorKind::InvalidArgument, "sampling interval must be positive");
  std::size_t longest = 0;
  for (auto r : runs) longest = std::max(longest, r.size());
  require(longest > max_lag, ErrorKind::TooShort,
          "longest run has " + std::to_string(longest) + " samples, need more than " + std::to_string(max_lag));
  MsdCurve out;
  out.lags.resize(max_lag + 1);
  out.msd.resize(max_lag + 1);
  parallel_for(max_lag + 1, [&](std::size_t lag) {
    double sum = 0.0;
    std::size_t origins = 0;
    for (auto r : runs) {
      for (std::size_t t0 = 0; t0 + lag < r.size(); ++t0) {
        const double d = r[t0 + lag] - r[t0];
        sum += d * d;
        ++origins;
      }
    }
    out.lags[lag] = static_cast<double>(lag) * dt;
    out.msd[lag] = sum / static_cast<double>(origins);
  });
  return out;
}

MsdCurve msd(std::span<const double> phi, std::size_t max_lag, double dt) {
  const std::span<const double> one[] = {phi};
  return msd(one, max_lag, dt);
}

double loglog_slope(const MsdCurve& curve, double t_min, double t_max) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < curve.lags.size(); ++k) {
    const double t = curve.lags[k];
    if (t < t_min || t > t_max || !(t > 0.0) || !(curve.msd[k] > 0.0)) continue;
    const double x = std::log(t), y = std::log(curve.msd[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  require(n >= 2, ErrorKind::TooShort, "fewer than two positive points in the fit window");
  const double denom = static_cast<double>(n) * sxx - sx * sx;
  require(denom > 0.0, ErrorKind::DegenerateData, "fit window spans a single lag");
  return (static_cast<double>(n) * sxy - sx * sy) / denom;
}

EnsembleError ensemble_error(const Eigen::MatrixXd& truth, std::span<const std::size_t> ics,
                             std::span<const std::uint8_t> ic_labels, int horizon, double tau,
                             const Forecaster& forecast) {
  require(horizon >= 0, ErrorKind::InvalidArgument, "horizon must be non-negative");
  require(ics.size() == ic_labels.size(), ErrorKind::ShapeMismatch, "one label per initial condition required");
  require(!ics.empty(), ErrorKind::EmptyData, "no initial conditions");
  for (auto ic : ics)
    require(ic + static_cast<std::size_t>(horizon) < static_cast<std::size_t>(truth.cols()),
            ErrorKind::HorizonOutOfRange, "initial condition " + std::to_string(ic) + " leaves too little truth");

  EnsembleError out;
  out.norm_scale = truth.colwise().norm().mean();
  require(out.norm_scale > 0.0, ErrorKind::DegenerateData, "truth has zero norm");
  const auto steps = static_cast<std::size_t>(horizon) + 1;

  std::vector<std::vector<double>> per_ic(ics.size());
  parallel_for(ics.size(), [&](std::size_t m) {
    const Eigen::MatrixXd pred = forecast(ics[m], horizon);
    require(pred.rows() == truth.rows() && static_cast<std::size_t>(pred.cols()) == steps, ErrorKind::ShapeMismatch,
            "forecast has the wrong shape");
    per_ic[m].resize(steps);
    for (std::size_t k = 0; k < steps; ++k) {
      per_ic[m][k] = (truth.col(static_cast<Eigen::Index>(ics[m] + k)) - pred.col(static_cast<Eigen::Index>(k))).norm() /
                     out.norm_scale;
    }
  });

  out.lead_time.resize(steps);
  out.quiescent.assign(steps, 0.0);
  out.bursting.assign(steps, 0.0);
  out.pooled.assign(steps, 0.0);
  for (std::size_t m = 0; m < ics.size(); ++m) {
    auto& cls = ic_labels[m] ? out.bursting : out.quiescent;
    (ic_labels[m] ? out.n_bursting : out.n_quiescent) += 1;
    for (std::size_t k = 0; k < steps; ++k) {
      cls[k] += per_ic[m][k];
      out.pooled[k] += per_ic[m][k];
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < steps; ++k) {
    out.lead_time[k] = static_cast<double>(k) * tau;
    out.pooled[k] /= static_cast<double>(ics.size());
    out.quiescent[k] = out.n_quiescent ? out.quiescent[k] / static_cast<double>(out.n_quiescent) : nan;
    out.bursting[k] = out.n_bursting ? out.bursting[k] / static_cast<double>(out.n_bursting) : nan;
  }
  return out;
}

double error_at(const EnsembleError& err, double t) {
  require(!err.lead_time.empty(), ErrorKind::EmptyData, "empty error curve");
  std::size_t best = 0;
  for (std::size_t k = 1; k < err.lead_time.size(); ++k)
    if (std::abs(err.lead_time[k] - t) < std::abs(err.lead_time[best] - t)) best = k;
  return err.pooled[best];
}

std::vector<std::size_t> sample_indices(std::size_t first, std::size_t last, std::size_t count, std::uint64_t seed) {
  require(last > first, ErrorKind::EmptyData, "empty index range");
  std::vector<std::size_t> all(last - first);
  std::iota(all.begin(), all.end(), first);
  if (count >= all.size()) return all;
  std::mt19937_64 rng(seed);
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(count);
  std::sort(all.begin(), all.end());
  return all;
}

double mean(std::span<const double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace kolmo
