#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "kolmo/grid.hpp"

namespace kolmo {

/// Time-ordered real-space vorticity snapshots plus run metadata. Snapshot i
/// sits at t = i * save_every relative to the first one.
struct SnapshotSeries {
  Grid grid;
  double re = 0.0;
  int n = 0;
  double dt = 0.0;
  double save_every = 0.0;
  std::vector<double> values;  // count x ny x nx

  std::size_t count() const { return grid.size() == 0 ? 0 : values.size() / grid.size(); }
  std::span<const double> snapshot(std::size_t i) const {
    return {values.data() + i * grid.size(), grid.size()};
  }
  std::span<double> snapshot(std::size_t i) { return {values.data() + i * grid.size(), grid.size()}; }
  void push_back(std::span<const double> snap);

  /// Copy of the metadata with snapshots [first, first + count).
  SnapshotSeries slice(std::size_t first, std::size_t count) const;
  SnapshotSeries empty_like() const;
};

// KFLOW1 container: "KFLOW1", u32 version=1, u32 nx, u32 ny, f64 re, u32 n,
// f64 dt, f64 save_every, u64 count, then count*nx*ny f64 (little-endian).
inline constexpr std::uint32_t kSnapshotVersion = 1;

void save_snapshots(const std::filesystem::path& path, const SnapshotSeries& series);
SnapshotSeries load_snapshots(const std::filesystem::path& path);

}  // namespace kolmo
