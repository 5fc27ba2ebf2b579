#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

namespace kolmo {

struct Range2D {
  double x_min = 0.0, x_max = 1.0;
  double y_min = 0.0, y_max = 1.0;
};

/// Smallest range holding every point of all given (x, y) series. Degenerate
/// extents are padded by 0.5 on each side.
Range2D pooled_range(std::span<const std::span<const double>> xs, std::span<const std::span<const double>> ys);

/// Normalized 2D histogram. mass(i, j) sums to 1; density = mass / cell area.
struct Histogram2D {
  std::vector<double> x_edges;
  std::vector<double> y_edges;
  std::vector<std::size_t> counts;  // x-major: i * ny_bins + j
  std::vector<double> mass;

  std::size_t nx_bins() const { return x_edges.empty() ? 0 : x_edges.size() - 1; }
  std::size_t ny_bins() const { return y_edges.empty() ? 0 : y_edges.size() - 1; }
  double cell_area(std::size_t i, std::size_t j) const;
  double density(std::size_t i, std::size_t j) const;
};

/// Points outside the range are ignored; points on the upper edge land in the
/// last bin. Throws EmptyData when no point falls inside.
Histogram2D joint_pdf(std::span<const double> a, std::span<const double> b, std::size_t x_bins,
                      std::size_t y_bins, const Range2D& range);

/// Restricted-support divergence sum p~ ln(p~ / p) over cells where both
/// masses are positive. Throws BinMismatch when the edges differ.
double kl_divergence(const Histogram2D& pred, const Histogram2D& truth);

/// KL between histograms of the second and first halves of one run.
double split_half_kl(std::span<const double> a, std::span<const double> b, std::size_t bins, const Range2D& range);

/// One-dimensional restricted-support KL of two samples (duration PDFs),
/// binned over their pooled range.
double sample_kl(std::span<const double> pred, std::span<const double> truth, std::size_t bins);

/// Rows x, y, density at cell centers (blank line between x columns).
void save_pdf_matrix(const std::filesystem::path& path, const Histogram2D& hist);

struct MsdCurve {
  std::vector<double> lags;  // time units
  std::vector<double> msd;
};

/// Sliding-origin mean squared displacement for lags 0..max_lag samples.
/// Origins never straddle two runs. Throws TooShort when no run is longer than
/// max_lag.
MsdCurve msd(std::span<const std::span<const double>> runs, std::size_t max_lag, double dt);
MsdCurve msd(std::span<const double> phi, std::size_t max_lag, double dt);

/// Least-squares slope of log msd against log lag for lags in [t_min, t_max].
double loglog_slope(const MsdCurve& curve, double t_min, double t_max);

/// Predicted trajectory (columns = lead steps 0..horizon) from a truth index.
using Forecaster = std::function<Eigen::MatrixXd(std::size_t ic, int horizon)>;

struct EnsembleError {
  std::vector<double> lead_time;
  std::vector<double> quiescent;
  std::vector<double> bursting;
  std::vector<double> pooled;
  std::size_t n_quiescent = 0;
  std::size_t n_bursting = 0;
  double norm_scale = 0.0;  // <||w||> over the truth
};

/// Relative error ||w_true(ic + k) - w_pred(k)|| / <||w_true||> averaged over
/// initial conditions, per class and pooled. ic_labels holds the class of each
/// initial condition (0 quiescent, 1 bursting).
EnsembleError ensemble_error(const Eigen::MatrixXd& truth, std::span<const std::size_t> ics,
                             std::span<const std::uint8_t> ic_labels, int horizon, double tau,
                             const Forecaster& forecast);

/// Pooled error at the lead time closest to t.
double error_at(const EnsembleError& err, double t);

/// Seeded uniform sample of distinct indices from [first, last).
std::vector<std::size_t> sample_indices(std::size_t first, std::size_t last, std::size_t count, std::uint64_t seed);

double mean(std::span<const double> v);

}  // namespace kolmo
