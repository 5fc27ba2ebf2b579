#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "kolmo/grid.hpp"
#include "kolmo/spectral.hpp"

namespace kt {

using Complex = std::complex<double>;

inline std::vector<double> uniform(std::size_t n, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

inline std::vector<double> gaussian(std::size_t n, std::uint64_t seed, double sigma = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, sigma);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

// O(N^2) transform straight from the definition, same normalization as the
// library: a_k = (1/N) sum_x v(x) e^{-i k.x}.
inline std::vector<Complex> naive_dft(const kolmo::Grid& g, const std::vector<double>& v) {
  std::vector<Complex> a(g.size());
  const double two_pi = 2.0 * std::numbers::pi;
  for (int ky = 0; ky < g.ny; ++ky) {
    for (int kx = 0; kx < g.nx; ++kx) {
      Complex s = 0.0;
      for (int iy = 0; iy < g.ny; ++iy) {
        for (int ix = 0; ix < g.nx; ++ix) {
          const double ang = -two_pi * (static_cast<double>(kx * ix) / g.nx + static_cast<double>(ky * iy) / g.ny);
          s += v[static_cast<std::size_t>(iy) * g.nx + ix] * Complex(std::cos(ang), std::sin(ang));
        }
      }
      a[static_cast<std::size_t>(ky) * g.nx + kx] = s / static_cast<double>(g.size());
    }
  }
  return a;
}

// Random real field whose Fourier content avoids the Nyquist row and column
// (and, with band > 0, every mode with |m| > band).
inline std::vector<double> smooth_field(const kolmo::Grid& g, std::uint64_t seed, int band = 0, double amp = 1.0) {
  auto f = kolmo::SpectralField::from_physical(g, gaussian(g.size(), seed, amp));
  for (int iy = 0; iy < g.ny; ++iy) {
    for (int ix = 0; ix < g.nx; ++ix) {
      const int mx = g.mode_x(ix), my = g.mode_y(iy);
      const bool cut = ix == g.nx / 2 || iy == g.ny / 2 || (band > 0 && (std::abs(mx) > band || std::abs(my) > band));
      if (cut) f.mode(mx, my) = 0.0;
    }
  }
  return f.to_physical();
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs(const std::vector<double>& a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace kt
