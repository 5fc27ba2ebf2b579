#include "kolmo/symmetry.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "kolmo/csv.hpp"
#include "kolmo/error.hpp"
#include "kolmo/spectral.hpp"

namespace kolmo {

namespace {

constexpr double kDegenerate = 1e-12;

std::vector<double> translate(const Grid& grid, std::span<const double> w, double l) {
  auto coeffs = dft_forward_real(grid, w);
  for (int iy = 0; iy < grid.ny; ++iy) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      coeffs[static_cast<std::size_t>(iy) * grid.nx + ix] *= std::polar(1.0, -grid.kx(ix) * l);
    }
  }
  return dft_inverse_real(grid, coeffs);
}

std::vector<double> shift_reflect(const Grid& grid, int n, std::span<const double> w, int power) {
  require(n >= 1, ErrorKind::InvalidArgument, "forcing wavenumber must be >= 1");
  require(grid.ny % (2 * n) == 0, ErrorKind::GridIncompatible,
          "shift of pi/n is not a whole number of rows for ny=" + std::to_string(grid.ny) +
              ", n=" + std::to_string(n));
  require(power >= 0 && power < 2 * n, ErrorKind::InvalidArgument, "shift-reflect power must lie in [0, 2n)");
  const int shift = grid.ny / (2 * n) * power;
  const bool odd = power % 2 == 1;
  std::vector<double> out(grid.size());
  for (int iy = 0; iy < grid.ny; ++iy) {
    const int src_y = (iy + shift) % grid.ny;
    for (int ix = 0; ix < grid.nx; ++ix) {
      const int src_x = odd ? (grid.nx - ix) % grid.nx : ix;
      const double v = w[static_cast<std::size_t>(src_y) * grid.nx + src_x];
      out[static_cast<std::size_t>(iy) * grid.nx + ix] = odd ? -v : v;
    }
  }
  return out;
}

std::vector<double> rotate(const Grid& grid, std::span<const double> w) {
  std::vector<double> out(grid.size());
  for (int iy = 0; iy < grid.ny; ++iy) {
    const int src_y = (grid.ny - iy) % grid.ny;
    for (int ix = 0; ix < grid.nx; ++ix) {
      const int src_x = (grid.nx - ix) % grid.nx;
      out[static_cast<std::size_t>(iy) * grid.nx + ix] = w[static_cast<std::size_t>(src_y) * grid.nx + src_x];
    }
  }
  return out;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

std::vector<double> apply(const SymmetryOp& op, const Grid& grid, int n, std::span<const double> w) {
  require(w.size() == grid.size(), ErrorKind::ShapeMismatch, "snapshot size does not match grid");
  return std::visit(Overloaded{
                        [&](const Translate& t) { return translate(grid, w, t.l); },
                        [&](const ShiftReflect& s) { return shift_reflect(grid, n, w, s.power); },
                        [&](const Rotate&) { return rotate(grid, w); },
                    },
                    op);
}

double phase_x(const Grid& grid, std::span<const double> w) {
  const auto a = dft_forward_real(grid, w)[grid.index(1, 0)];
  return std::atan2(a.imag(), a.real());
}

double phase_y(const Grid& grid, std::span<const double> w) {
  const auto a = dft_forward_real(grid, w)[grid.index(0, 1)];
  return std::atan2(a.imag(), a.real());
}

AlignedSnapshot align_snapshot(const Grid& grid, std::span<const double> w) {
  auto coeffs = dft_forward_real(grid, w);
  const Complex a10 = coeffs[grid.index(1, 0)];
  require(std::abs(a10) >= kDegenerate, ErrorKind::DegeneratePhase, "(1,0) mode vanishes; phase undefined");
  const double phi = std::atan2(a10.imag(), a10.real());
  for (int iy = 0; iy < grid.ny; ++iy) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      coeffs[static_cast<std::size_t>(iy) * grid.nx + ix] *= std::polar(1.0, -grid.mode_x(ix) * phi);
    }
  }
  // The rotated (1,0) mode is real up to rounding; pin it exactly.
  coeffs[grid.index(1, 0)] = std::abs(a10);
  coeffs[grid.index(-1, 0)] = std::abs(a10);
  return {dft_inverse_real(grid, coeffs), phi};
}

AlignedSeries phase_align(const SnapshotSeries& series) {
  AlignedSeries out;
  out.snapshots = series.empty_like();
  out.snapshots.values.reserve(series.values.size());
  const auto count = series.count();
  out.phase.phi_x.reserve(count);
  out.phase.phi_y.reserve(count);
  out.ops_applied.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto snap = series.snapshot(i);
    auto aligned = align_snapshot(series.grid, snap);
    out.snapshots.push_back(aligned.values);
    out.phase.phi_x.push_back(aligned.phi_x);
    out.phase.phi_y.push_back(phase_y(series.grid, snap));
    double l = std::fmod(aligned.phi_x / series.grid.alpha, series.grid.lx());
    if (l < 0) l += series.grid.lx();
    out.ops_applied.push_back({Translate{l}});
  }
  return out;
}

SrChoice collapse_snapshot_shift_reflect(const Grid& grid, int n, std::span<const double> aligned) {
  SrChoice choice;
  int matches = 0;
  for (int p = 0; p < 2 * n; ++p) {
    auto candidate = align_snapshot(grid, shift_reflect(grid, n, aligned, p));
    const auto coeffs = dft_forward_real(grid, candidate.values);
    const Complex a01 = coeffs[grid.index(0, 1)];
    const double phi_y = std::atan2(a01.imag(), a01.real());
    const double re20 = coeffs[grid.index(2, 0)].real();
    require(std::abs(phi_y) >= kDegenerate && std::abs(re20) >= kDegenerate, ErrorKind::IndicatorDegenerate,
            "shift-reflect indicator is zero; sign ambiguous");
    if (phi_y > 0.0 && re20 > 0.0) {
      ++matches;
      choice.values = std::move(candidate.values);
      choice.power = p;
      choice.shift = candidate.phi_x;
    }
  }
  require(matches == 1, ErrorKind::IndicatorDegenerate,
          std::to_string(matches) + " shift-reflect powers satisfy both indicators; expected exactly one");
  return choice;
}

namespace {

Translate translate_op(const Grid& grid, double phi) {
  double l = std::fmod(phi / grid.alpha, grid.lx());
  if (l < 0) l += grid.lx();
  return Translate{l};
}

}  // namespace

AlignedSeries collapse_shift_reflect(const AlignedSeries& aligned) {
  const auto& s = aligned.snapshots;
  AlignedSeries out;
  out.snapshots = s.empty_like();
  out.snapshots.values.reserve(s.values.size());
  out.phase = aligned.phase;
  out.ops_applied = aligned.ops_applied;
  out.ops_applied.resize(s.count());
  for (std::size_t i = 0; i < s.count(); ++i) {
    auto choice = collapse_snapshot_shift_reflect(s.grid, s.n, s.snapshot(i));
    out.snapshots.push_back(choice.values);
    out.ops_applied[i].push_back(ShiftReflect{choice.power});
    out.ops_applied[i].push_back(translate_op(s.grid, choice.shift));
  }
  return out;
}

AlignedSeries collapse_rotation(const AlignedSeries& aligned, std::span<const double> templ) {
  const auto& s = aligned.snapshots;
  require(templ.size() == s.grid.size(), ErrorKind::ShapeMismatch, "template size does not match grid");
  AlignedSeries out;
  out.snapshots = s.empty_like();
  out.snapshots.values.reserve(s.values.size());
  out.phase = aligned.phase;
  out.ops_applied = aligned.ops_applied;
  out.ops_applied.resize(s.count());
  for (std::size_t i = 0; i < s.count(); ++i) {
    const auto snap = s.snapshot(i);
    const auto rotated = align_snapshot(s.grid, rotate(s.grid, snap));
    auto candidate = collapse_snapshot_shift_reflect(s.grid, s.n, rotated.values);
    if (squared_distance(candidate.values, templ) < squared_distance(snap, templ)) {
      out.snapshots.push_back(candidate.values);
      auto& ops = out.ops_applied[i];
      ops.push_back(Rotate{});
      ops.push_back(translate_op(s.grid, rotated.phi_x));
      ops.push_back(ShiftReflect{candidate.power});
      ops.push_back(translate_op(s.grid, candidate.shift));
    } else {
      out.snapshots.push_back(snap);
    }
  }
  return out;
}

OpsSummary summarize(const std::vector<SymmetryOp>& ops) {
  OpsSummary s;
  for (const auto& op : ops) {
    if (const auto* sr = std::get_if<ShiftReflect>(&op)) s.sr_power = sr->power;
    if (std::holds_alternative<Rotate>(op)) s.rotated = true;
  }
  return s;
}

void save_phase_csv(const std::filesystem::path& path, const AlignedSeries& aligned) {
  CsvTable t;
  t.header = {"t", "phi_x", "phi_y", "sr_power", "rotated"};
  const auto count = aligned.snapshots.count();
  for (std::size_t i = 0; i < count; ++i) {
    const auto summary =
        i < aligned.ops_applied.size() ? summarize(aligned.ops_applied[i]) : OpsSummary{};
    t.rows.push_back({static_cast<double>(i) * aligned.snapshots.save_every, aligned.phase.phi_x.at(i),
                      aligned.phase.phi_y.at(i), static_cast<double>(summary.sr_power),
                      summary.rotated ? 1.0 : 0.0});
  }
  write_csv(path, t);
}

PhaseTrace load_phase_csv(const std::filesystem::path& path) {
  const auto t = read_csv(path);
  return {t.column_values("phi_x"), t.column_values("phi_y")};
}

double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(a, two_pi);
  if (r <= -std::numbers::pi) r += two_pi;
  if (r > std::numbers::pi) r -= two_pi;
  return r;
}

std::vector<double> unwrap_phase(std::span<const double> wrapped) {
  std::vector<double> out;
  out.reserve(wrapped.size());
  for (std::size_t i = 0; i < wrapped.size(); ++i) {
    out.push_back(i == 0 ? wrapped[0] : out.back() + wrap_angle(wrapped[i] - wrapped[i - 1]));
  }
  return out;
}

}  // namespace kolmo
