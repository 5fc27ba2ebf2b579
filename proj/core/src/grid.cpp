#include "kolmo/grid.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>

#include "kolmo/error.hpp"

namespace kolmo {

void Grid::validate() const {
  require(nx >= 8 && ny >= 8 && nx % 2 == 0 && ny % 2 == 0, ErrorKind::InvalidArgument,
          "grid sizes must be even and >= 8, got " + std::to_string(nx) + "x" + std::to_string(ny));
  require(alpha > 0.0, ErrorKind::InvalidArgument, "alpha must be positive");
}

namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
// FFTW_ESTIMATE keeps the chosen algorithm (and so the rounding) reproducible.
struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  ~PlanPair() {
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
};

const PlanPair& plans_for(const Grid& grid) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::unique_ptr<PlanPair>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{grid.nx, grid.ny}];
  if (!slot) {
    slot = std::make_unique<PlanPair>();
    std::vector<Complex> a(grid.size()), b(grid.size());
    auto* in = reinterpret_cast<fftw_complex*>(a.data());
    auto* out = reinterpret_cast<fftw_complex*>(b.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    slot->forward = fftw_plan_dft_2d(grid.ny, grid.nx, in, out, FFTW_FORWARD, flags);
    slot->backward = fftw_plan_dft_2d(grid.ny, grid.nx, in, out, FFTW_BACKWARD, flags);
  }
  return *slot;
}

void check_sizes(const Grid& grid, std::size_t a, std::size_t b) {
  require(a == grid.size() && b == grid.size(), ErrorKind::ShapeMismatch,
          "buffer size does not match grid " + std::to_string(grid.nx) + "x" + std::to_string(grid.ny));
}

}  // namespace

void dft_forward(const Grid& grid, std::span<const Complex> physical, std::span<Complex> spectral) {
  check_sizes(grid, physical.size(), spectral.size());
  const auto& p = plans_for(grid);
  // FFTW never writes the input of an out-of-place complex transform.
  fftw_execute_dft(p.forward, reinterpret_cast<fftw_complex*>(const_cast<Complex*>(physical.data())),
                   reinterpret_cast<fftw_complex*>(spectral.data()));
  const double scale = 1.0 / static_cast<double>(grid.size());
  for (auto& c : spectral) c *= scale;
}

void dft_inverse(const Grid& grid, std::span<const Complex> spectral, std::span<Complex> physical) {
  check_sizes(grid, physical.size(), spectral.size());
  const auto& p = plans_for(grid);
  fftw_execute_dft(p.backward, reinterpret_cast<fftw_complex*>(const_cast<Complex*>(spectral.data())),
                   reinterpret_cast<fftw_complex*>(physical.data()));
}

std::vector<Complex> dft_forward_real(const Grid& grid, std::span<const double> physical) {
  require(physical.size() == grid.size(), ErrorKind::ShapeMismatch, "snapshot size does not match grid");
  std::vector<Complex> in(physical.begin(), physical.end());
  std::vector<Complex> out(grid.size());
  dft_forward(grid, in, out);
  return out;
}

std::vector<double> dft_inverse_real(const Grid& grid, std::span<const Complex> spectral) {
  std::vector<Complex> out(grid.size());
  dft_inverse(grid, spectral, out);
  std::vector<double> real(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) real[i] = out[i].real();
  return real;
}

}  // namespace kolmo
