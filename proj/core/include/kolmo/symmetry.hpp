#pragma once

#include <filesystem>
#include <span>
#include <variant>
#include <vector>

#include "kolmo/snapshot.hpp"

namespace kolmo {

/// w(x, y) -> w(x - l, y): Fourier modes multiplied by e^{-i kx l}.
struct Translate {
  double l = 0.0;
};
/// S^power with S: w(x, y) -> -w(-x, y + pi/n).
struct ShiftReflect {
  int power = 0;
};
/// R: w(x, y) -> w(-x, -y).
struct Rotate {};

using SymmetryOp = std::variant<Translate, ShiftReflect, Rotate>;

/// Applies one group element to a real-space snapshot. Shift-reflect is an
/// exact grid permutation and needs ny divisible by 2n (GridIncompatible).
std::vector<double> apply(const SymmetryOp& op, const Grid& grid, int n, std::span<const double> w);

/// atan2 of the (1,0) and (0,1) Fourier coefficients, in (-pi, pi].
double phase_x(const Grid& grid, std::span<const double> w);
double phase_y(const Grid& grid, std::span<const double> w);

struct PhaseTrace {
  std::vector<double> phi_x;
  std::vector<double> phi_y;
};

/// Slice-frame snapshots. phase holds the phases measured on the input
/// series, so phi_x is the fixed-frame spatial phase used by the phase map.
struct AlignedSeries {
  SnapshotSeries snapshots;
  PhaseTrace phase;
  std::vector<std::vector<SymmetryOp>> ops_applied;
};

struct AlignedSnapshot {
  std::vector<double> values;
  double phi_x = 0.0;
};

/// Rotates the (1,0) mode onto the positive real axis. Throws DegeneratePhase
/// if |a_{1,0}| < 1e-12.
AlignedSnapshot align_snapshot(const Grid& grid, std::span<const double> w);

AlignedSeries phase_align(const SnapshotSeries& series);

/// Picks the unique S^p (followed by re-alignment) giving sgn(phi_y) > 0 and
/// Re a_{2,0} > 0. Throws IndicatorDegenerate when an indicator is within
/// 1e-12 of zero or when zero or several powers qualify.
struct SrChoice {
  std::vector<double> values;
  int power = 0;
  double shift = 0.0;
};
SrChoice collapse_snapshot_shift_reflect(const Grid& grid, int n, std::span<const double> aligned);

AlignedSeries collapse_shift_reflect(const AlignedSeries& aligned);

/// Chooses between the snapshot and the SR-collapsed rotation of it by l2
/// distance to the template; ties keep the snapshot.
AlignedSeries collapse_rotation(const AlignedSeries& aligned, std::span<const double> templ);

struct OpsSummary {
  int sr_power = 0;
  bool rotated = false;
};
OpsSummary summarize(const std::vector<SymmetryOp>& ops);

/// Sidecar CSV: t, phi_x, phi_y, sr_power, rotated.
void save_phase_csv(const std::filesystem::path& path, const AlignedSeries& aligned);
PhaseTrace load_phase_csv(const std::filesystem::path& path);

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);
/// Cumulative phase with each increment wrapped into (-pi, pi].
std::vector<double> unwrap_phase(std::span<const double> wrapped);

}  // namespace kolmo
