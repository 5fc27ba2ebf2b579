#pragma once

#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace kolmo {

using Complex = std::complex<double>;

/// Doubly periodic grid on [0, 2pi/alpha) x [0, 2pi). Real-space samples are
/// stored row-major with y as the row index: value(iy, ix) = v[iy * nx + ix].
struct Grid {
  int nx = 32;
  int ny = 32;
  double alpha = 1.0;

  double lx() const { return 2.0 * std::numbers::pi / alpha; }
  double ly() const { return 2.0 * std::numbers::pi; }
  double dx() const { return lx() / nx; }
  double dy() const { return ly() / ny; }
  std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }

  /// Throws InvalidArgument unless nx, ny are even and >= 8 and alpha > 0.
  void validate() const;

  /// Signed mode index stored at FFT position `i` (Nyquist reported positive).
  int mode_x(int ix) const { return ix <= nx / 2 ? ix : ix - nx; }
  int mode_y(int iy) const { return iy <= ny / 2 ? iy : iy - ny; }
  /// Physical wavenumbers.
  double kx(int ix) const { return alpha * mode_x(ix); }
  double ky(int iy) const { return static_cast<double>(mode_y(iy)); }

  /// Storage position of the signed mode (mx, my).
  std::size_t index(int mx, int my) const {
    const int ix = ((mx % nx) + nx) % nx;
    const int iy = ((my % ny) + ny) % ny;
    return static_cast<std::size_t>(iy) * nx + ix;
  }

  bool operator==(const Grid&) const = default;
};

/// Normalized 2D DFT: a_k = (1/(nx ny)) sum_x v(x) e^{-i k.x}, so that
/// v(x) = sum_k a_k e^{i k.x}. Safe to call concurrently.
void dft_forward(const Grid& grid, std::span<const Complex> physical, std::span<Complex> spectral);
void dft_inverse(const Grid& grid, std::span<const Complex> spectral, std::span<Complex> physical);

std::vector<Complex> dft_forward_real(const Grid& grid, std::span<const double> physical);
/// Real part of the inverse transform.
std::vector<double> dft_inverse_real(const Grid& grid, std::span<const Complex> spectral);

}  // namespace kolmo
