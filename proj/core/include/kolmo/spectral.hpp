#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "kolmo/grid.hpp"
#include "kolmo/snapshot.hpp"

namespace kolmo {

/// Fourier coefficients of a real periodic field, in dft_forward normalization.
class SpectralField {
 public:
  explicit SpectralField(const Grid& grid);
  SpectralField(const Grid& grid, std::vector<Complex> coeffs);

  static SpectralField from_physical(const Grid& grid, std::span<const double> values);
  std::vector<double> to_physical() const;

  const Grid& grid() const { return grid_; }
  std::span<const Complex> coeffs() const { return coeffs_; }
  std::span<Complex> coeffs() { return coeffs_; }

  Complex mode(int mx, int my) const { return coeffs_[grid_.index(mx, my)]; }
  Complex& mode(int mx, int my) { return coeffs_[grid_.index(mx, my)]; }

  /// max |a_k - conj(a_-k)|.
  double hermitian_defect() const;
  /// Replaces a_k by (a_k + conj(a_-k)) / 2; zeroes the Nyquist rows/columns.
  void enforce_hermitian();

 private:
  Grid grid_;
  std::vector<Complex> coeffs_;
};

struct FlowParams {
  double re = 14.4;
  int n = 2;
  double dt = 0.01;

  void validate() const;
};

struct Diagnostics {
  double ke = 0.0;
  double d = 0.0;
  double i = 0.0;
  double t = 0.0;
};

/// Streamfunction inversion: lap(psi) = -w, u = dpsi/dy, v = -dpsi/dx.
std::pair<SpectralField, SpectralField> velocity_from_vorticity(const SpectralField& w);

/// max |i kx u + i ky v| over all modes.
double max_divergence(const SpectralField& u, const SpectralField& v);

/// KE = <|u|^2>/2, D = <|grad u|^2>/Re, I = <u sin(ny)>, all from Parseval sums.
Diagnostics diagnostics(const SpectralField& w, const FlowParams& p, double t = 0.0);

/// Zero outside the 2/3-rule band (|mx| <= nx/3 and |my| <= ny/3 kept).
bool dealias_keeps(const Grid& grid, int mx, int my);

/// Pseudo-spectral integrator for dw/dt = -u.grad(w) + lap(w)/Re - n cos(ny).
/// Crank-Nicolson on the viscous term, Heun predictor-corrector on the
/// advection and forcing terms; advection in flux form with 2/3 dealiasing.
class FlowIntegrator {
 public:
  FlowIntegrator(const Grid& grid, const FlowParams& params);

  const Grid& grid() const { return grid_; }
  const FlowParams& params() const { return params_; }

  /// Throws NonFinite if any coefficient stops being finite.
  SpectralField step(const SpectralField& w) const;
  SpectralField advance(SpectralField w, long steps) const;

  /// Nonlinear plus forcing tendency, exposed for tests.
  std::vector<Complex> tendency(std::span<const Complex> w) const;

 private:
  Grid grid_;
  FlowParams params_;
  std::vector<double> kx_, ky_, inv_k2_, mask_;
  std::vector<double> cn_explicit_, cn_implicit_inv_;
  std::vector<Complex> forcing_;
  std::vector<std::size_t> mirror_;
};

SpectralField step(const SpectralField& w, const FlowParams& p);

/// w = -(Re/n) cos(n y), the laminar fixed point.
SpectralField laminar_state(const Grid& grid, const FlowParams& p);

/// Random solenoidal field, energy spectrum ~ exp(-k^2/4), dealiased, scaled
/// to the requested kinetic energy.
SpectralField random_initial_condition(const Grid& grid, std::uint64_t seed, double ke = 1.0);

/// Integrates for t units (rounded to whole steps). Used for transient removal.
SpectralField advance(const SpectralField& ic, const FlowParams& p, double t);

/// Snapshots at t = 0, save_every, 2 save_every, ... up to t_total.
/// save_every must be an integer multiple of dt.
SnapshotSeries simulate(const SpectralField& ic, const FlowParams& p, double t_total, double save_every);

/// Per-snapshot diagnostics of a stored series (real-space vorticity).
std::vector<Diagnostics> series_diagnostics(const SnapshotSeries& series);

}  // namespace kolmo
