#include "kolmo/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "kolmo/error.hpp"

namespace kolmo {

SpectralField::SpectralField(const Grid& grid) : grid_(grid), coeffs_(grid.size()) { grid_.validate(); }

SpectralField::SpectralField(const Grid& grid, std::vector<Complex> coeffs)
    : grid_(grid), coeffs_(std::move(coeffs)) {
  grid_.validate();
  require(coeffs_.size() == grid_.size(), ErrorKind::ShapeMismatch, "coefficient count does not match grid");
}

SpectralField SpectralField::from_physical(const Grid& grid, std::span<const double> values) {
  return SpectralField(grid, dft_forward_real(grid, values));
}

std::vector<double> SpectralField::to_physical() const { return dft_inverse_real(grid_, coeffs_); }

double SpectralField::hermitian_defect() const {
  double worst = 0.0;
  for (int iy = 0; iy < grid_.ny; ++iy) {
    for (int ix = 0; ix < grid_.nx; ++ix) {
      const int mx = grid_.mode_x(ix), my = grid_.mode_y(iy);
      worst = std::max(worst, std::abs(mode(mx, my) - std::conj(mode(-mx, -my))));
    }
  }
  return worst;
}

void SpectralField::enforce_hermitian() {
  std::vector<Complex> sym(coeffs_.size());
  for (int iy = 0; iy < grid_.ny; ++iy) {
    for (int ix = 0; ix < grid_.nx; ++ix) {
      const int mx = grid_.mode_x(ix), my = grid_.mode_y(iy);
      const auto pos = grid_.index(mx, my);
      if (ix == grid_.nx / 2 || iy == grid_.ny / 2) {
        sym[pos] = 0.0;
      } else {
        sym[pos] = 0.5 * (coeffs_[pos] + std::conj(coeffs_[grid_.index(-mx, -my)]));
      }
    }
  }
  coeffs_ = std::move(sym);
}

void FlowParams::validate() const {
  require(re > 0.0, ErrorKind::InvalidArgument, "Re must be positive");
  require(n >= 1, ErrorKind::InvalidArgument, "forcing wavenumber must be >= 1");
  require(dt > 0.0, ErrorKind::InvalidArgument, "dt must be positive");
}

namespace {

double k2_of(const Grid& g, int ix, int iy) {
  const double kx = g.kx(ix), ky = g.ky(iy);
  return kx * kx + ky * ky;
}

bool is_nyquist(const Grid& g, int ix, int iy) { return ix == g.nx / 2 || iy == g.ny / 2; }

}  // namespace

std::pair<SpectralField, SpectralField> velocity_from_vorticity(const SpectralField& w) {
  const Grid& g = w.grid();
  SpectralField u(g), v(g);
  const auto wc = w.coeffs();
  auto uc = u.coeffs();
  auto vc = v.coeffs();
  const Complex I(0.0, 1.0);
  for (int iy = 0; iy < g.ny; ++iy) {
    for (int ix = 0; ix < g.nx; ++ix) {
      const auto pos = static_cast<std::size_t>(iy) * g.nx + ix;
      const double k2 = k2_of(g, ix, iy);
      if (k2 == 0.0 || is_nyquist(g, ix, iy)) continue;
      const Complex psi = wc[pos] / k2;
      uc[pos] = I * g.ky(iy) * psi;
      vc[pos] = -I * g.kx(ix) * psi;
    }
  }
  return {std::move(u), std::move(v)};
}

double max_divergence(const SpectralField& u, const SpectralField& v) {
  const Grid& g = u.grid();
  require(g == v.grid(), ErrorKind::ShapeMismatch, "velocity components on different grids");
  const Complex I(0.0, 1.0);
  double worst = 0.0;
  for (int iy = 0; iy < g.ny; ++iy) {
    for (int ix = 0; ix < g.nx; ++ix) {
      const auto pos = static_cast<std::size_t>(iy) * g.nx + ix;
      if (is_nyquist(g, ix, iy)) continue;
      worst = std::max(worst, std::abs(I * g.kx(ix) * u.coeffs()[pos] + I * g.ky(iy) * v.coeffs()[pos]));
    }
  }
  return worst;
}

Diagnostics diagnostics(const SpectralField& w, const FlowParams& p, double t) {
  const Grid& g = w.grid();
  const auto wc = w.coeffs();
  double energy = 0.0, enstrophy = 0.0;
  for (int iy = 0; iy < g.ny; ++iy) {
    for (int ix = 0; ix < g.nx; ++ix) {
      const auto pos = static_cast<std::size_t>(iy) * g.nx + ix;
      const double k2 = k2_of(g, ix, iy);
      if (k2 == 0.0 || is_nyquist(g, ix, iy)) continue;
      const double a2 = std::norm(wc[pos]);
      energy += a2 / k2;
      enstrophy += a2;
    }
  }
  Diagnostics out;
  out.ke = 0.5 * energy;
  // <|grad u|^2> equals <w^2> for a periodic divergence-free field.
  out.d = enstrophy / p.re;
  // u_hat(0, n) = i w_hat(0, n) / n and sin(ny) has coefficient -i/2 at my = n.
  out.i = p.n <= g.ny / 2 - 1 ? -w.mode(0, p.n).real() / p.n : 0.0;
  out.t = t;
  return out;
}

bool dealias_keeps(const Grid& grid, int mx, int my) {
  return 3 * std::abs(mx) <= grid.nx && 3 * std::abs(my) <= grid.ny;
}

FlowIntegrator::FlowIntegrator(const Grid& grid, const FlowParams& params) : grid_(grid), params_(params) {
  grid_.validate();
  params_.validate();
  require(dealias_keeps(grid_, 0, params_.n), ErrorKind::InvalidArgument,
          "forcing wavenumber lies outside the dealiased band");
  const auto size = grid_.size();
  kx_.resize(size);
  ky_.resize(size);
  inv_k2_.resize(size);
  mask_.resize(size);
  cn_explicit_.resize(size);
  cn_implicit_inv_.resize(size);
  forcing_.assign(size, 0.0);
  mirror_.resize(size);
  const double half_nu_dt = 0.5 * params_.dt / params_.re;
  for (int iy = 0; iy < grid_.ny; ++iy) {
    for (int ix = 0; ix < grid_.nx; ++ix) {
      const auto pos = static_cast<std::size_t>(iy) * grid_.nx + ix;
      const bool keep = !is_nyquist(grid_, ix, iy) &&
                        dealias_keeps(grid_, grid_.mode_x(ix), grid_.mode_y(iy));
      const double k2 = k2_of(grid_, ix, iy);
      kx_[pos] = keep ? grid_.kx(ix) : 0.0;
      ky_[pos] = keep ? grid_.ky(iy) : 0.0;
      inv_k2_[pos] = (keep && k2 > 0.0) ? 1.0 / k2 : 0.0;
      mask_[pos] = (keep && k2 > 0.0) ? 1.0 : 0.0;
      cn_explicit_[pos] = 1.0 - half_nu_dt * k2;
      cn_implicit_inv_[pos] = 1.0 / (1.0 + half_nu_dt * k2);
      mirror_[pos] = grid_.index(-grid_.mode_x(ix), -grid_.mode_y(iy));
    }
  }
  // -n cos(n y) = -(n/2) (e^{iny} + e^{-iny})
  forcing_[grid_.index(0, params_.n)] = -0.5 * params_.n;
  forcing_[grid_.index(0, -params_.n)] = -0.5 * params_.n;
}

std::vector<Complex> FlowIntegrator::tendency(std::span<const Complex> w) const {
  const auto size = grid_.size();
  const Complex I(0.0, 1.0);
  // Two real fields per complex transform: (u + i v) and w.
  std::vector<Complex> uv_hat(size), uv(size), wp(size), flux(size), flux_hat(size);
  for (std::size_t k = 0; k < size; ++k) {
    const Complex psi = w[k] * inv_k2_[k];
    const Complex u_hat = I * ky_[k] * psi;
    const Complex v_hat = -I * kx_[k] * psi;
    uv_hat[k] = u_hat + I * v_hat;
  }
  dft_inverse(grid_, uv_hat, uv);
  dft_inverse(grid_, w, wp);
  for (std::size_t k = 0; k < size; ++k) {
    const double wv = wp[k].real();
    flux[k] = Complex(uv[k].real() * wv, uv[k].imag() * wv);
  }
  dft_forward(grid_, flux, flux_hat);
  std::vector<Complex> out(size);
  for (int iy = 0; iy < grid_.ny; ++iy) {
    for (int ix = 0; ix < grid_.nx; ++ix) {
      const auto pos = static_cast<std::size_t>(iy) * grid_.nx + ix;
      if (mask_[pos] == 0.0) {
        out[pos] = forcing_[pos];
        continue;
      }
      const Complex f = flux_hat[pos];
      const Complex fm = std::conj(flux_hat[mirror_[pos]]);
      const Complex uw_hat = 0.5 * (f + fm);
      const Complex vw_hat = (f - fm) / (2.0 * I);
      out[pos] = -(I * kx_[pos] * uw_hat + I * ky_[pos] * vw_hat) + forcing_[pos];
    }
  }
  return out;
}

SpectralField FlowIntegrator::step(const SpectralField& w) const {
  require(w.grid() == grid_, ErrorKind::ShapeMismatch, "field grid does not match integrator");
  const auto size = grid_.size();
  const double dt = params_.dt;
  const auto w0 = w.coeffs();
  const auto n0 = tendency(w0);
  std::vector<Complex> base(size), pred(size);
  for (std::size_t k = 0; k < size; ++k) {
    base[k] = cn_explicit_[k] * w0[k];
    pred[k] = (base[k] + dt * n0[k]) * cn_implicit_inv_[k] * mask_[k];
  }
  const auto n1 = tendency(pred);
  std::vector<Complex> next(size);
  bool finite = true;
  for (std::size_t k = 0; k < size; ++k) {
    next[k] = (base[k] + 0.5 * dt * (n0[k] + n1[k])) * cn_implicit_inv_[k] * mask_[k];
    finite = finite && std::isfinite(next[k].real()) && std::isfinite(next[k].imag());
  }
  require(finite, ErrorKind::NonFinite, "vorticity became non-finite; reduce dt");
  // Every operation above maps conjugate pairs to conjugate pairs; averaging
  // with the mirror only removes rounding from the transforms.
  std::vector<Complex> sym(size);
  for (std::size_t k = 0; k < size; ++k) sym[k] = 0.5 * (next[k] + std::conj(next[mirror_[k]]));
  return SpectralField(grid_, std::move(sym));
}

SpectralField FlowIntegrator::advance(SpectralField w, long steps) const {
  for (long s = 0; s < steps; ++s) w = step(w);
  return w;
}

SpectralField step(const SpectralField& w, const FlowParams& p) { return FlowIntegrator(w.grid(), p).step(w); }

SpectralField laminar_state(const Grid& grid, const FlowParams& p) {
  p.validate();
  SpectralField w(grid);
  w.mode(0, p.n) = -p.re / (2.0 * p.n);
  w.mode(0, -p.n) = -p.re / (2.0 * p.n);
  return w;
}

SpectralField random_initial_condition(const Grid& grid, std::uint64_t seed, double ke) {
  SpectralField w(grid);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int iy = 0; iy < grid.ny; ++iy) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      const int mx = grid.mode_x(ix), my = grid.mode_y(iy);
      const double re_part = normal(rng), im_part = normal(rng);
      const double k2 = k2_of(grid, ix, iy);
      if (k2 == 0.0 || is_nyquist(grid, ix, iy) || !dealias_keeps(grid, mx, my)) continue;
      // |psi_k|^2 k^2 ~ exp(-k^2/4) per mode.
      const double psi_amp = std::exp(-k2 / 8.0) / std::sqrt(k2);
      w.mode(mx, my) = k2 * psi_amp * Complex(re_part, im_part);
    }
  }
  w.enforce_hermitian();
  const double current = diagnostics(w, FlowParams{}).ke;
  require(current > 0.0, ErrorKind::DegenerateData, "random initial condition has zero energy");
  const double scale = std::sqrt(ke / current);
  for (auto& c : w.coeffs()) c *= scale;
  return w;
}

namespace {

long whole_steps(double span, double dt, const char* what) {
  const double ratio = span / dt;
  const long steps = std::lround(ratio);
  require(std::abs(ratio - static_cast<double>(steps)) <= 1e-9 * std::max(1.0, ratio),
          ErrorKind::InvalidArgument, std::string(what) + " must be an integer multiple of dt");
  return steps;
}

}  // namespace

SpectralField advance(const SpectralField& ic, const FlowParams& p, double t) {
  require(t >= 0.0, ErrorKind::InvalidArgument, "advance time must be non-negative");
  return FlowIntegrator(ic.grid(), p).advance(ic, std::lround(t / p.dt));
}

SnapshotSeries simulate(const SpectralField& ic, const FlowParams& p, double t_total, double save_every) {
  require(t_total >= 0.0, ErrorKind::InvalidArgument, "t_total must be non-negative");
  require(save_every > 0.0, ErrorKind::InvalidArgument, "save_every must be positive");
  const FlowIntegrator integrator(ic.grid(), p);
  const long per_save = whole_steps(save_every, p.dt, "save_every");
  require(per_save >= 1, ErrorKind::InvalidArgument, "save_every must be at least one step");
  const auto saves = static_cast<std::size_t>(std::floor(t_total / save_every + 1e-9));

  SnapshotSeries series;
  series.grid = ic.grid();
  series.re = p.re;
  series.n = p.n;
  series.dt = p.dt;
  series.save_every = save_every;
  series.values.reserve((saves + 1) * ic.grid().size());
  SpectralField w = ic;
  series.push_back(w.to_physical());
  for (std::size_t s = 0; s < saves; ++s) {
    w = integrator.advance(std::move(w), per_save);
    series.push_back(w.to_physical());
  }
  return series;
}

std::vector<Diagnostics> series_diagnostics(const SnapshotSeries& series) {
  const FlowParams p{series.re, series.n, series.dt > 0 ? series.dt : 0.01};
  std::vector<Diagnostics> out;
  out.reserve(series.count());
  for (std::size_t i = 0; i < series.count(); ++i) {
    out.push_back(diagnostics(SpectralField::from_physical(series.grid, series.snapshot(i)), p,
                              static_cast<double>(i) * series.save_every));
  }
  return out;
}

}  // namespace kolmo
