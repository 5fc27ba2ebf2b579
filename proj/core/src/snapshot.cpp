#include "kolmo/snapshot.hpp"

#include <fstream>

#include "kolmo/binary_io.hpp"
#include "kolmo/error.hpp"

namespace kolmo {

void SnapshotSeries::push_back(std::span<const double> snap) {
  require(snap.size() == grid.size(), ErrorKind::ShapeMismatch, "snapshot size does not match grid");
  values.insert(values.end(), snap.begin(), snap.end());
}

SnapshotSeries SnapshotSeries::slice(std::size_t first, std::size_t n_snaps) const {
  require(first + n_snaps <= count(), ErrorKind::InvalidArgument, "slice out of range");
  SnapshotSeries out = empty_like();
  const auto begin = values.begin() + static_cast<std::ptrdiff_t>(first * grid.size());
  out.values.assign(begin, begin + static_cast<std::ptrdiff_t>(n_snaps * grid.size()));
  return out;
}

SnapshotSeries SnapshotSeries::empty_like() const {
  SnapshotSeries out;
  out.grid = grid;
  out.re = re;
  out.n = n;
  out.dt = dt;
  out.save_every = save_every;
  return out;
}

void save_snapshots(const std::filesystem::path& path, const SnapshotSeries& series) {
  write_file_atomic(path, [&](std::ostream& os) {
    BinaryWriter w(os);
    w.bytes("KFLOW1");
    w.u32(kSnapshotVersion);
    w.u32(static_cast<std::uint32_t>(series.grid.nx));
    w.u32(static_cast<std::uint32_t>(series.grid.ny));
    w.f64(series.re);
    w.u32(static_cast<std::uint32_t>(series.n));
    w.f64(series.dt);
    w.f64(series.save_every);
    w.u64(series.count());
    w.f64s(series.values);
  });
}

SnapshotSeries load_snapshots(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  BinaryReader r(in, path.string());
  r.expect_magic("KFLOW1");
  r.expect_version(kSnapshotVersion);
  SnapshotSeries s;
  s.grid.nx = static_cast<int>(r.u32());
  s.grid.ny = static_cast<int>(r.u32());
  s.grid.validate();
  s.re = r.f64();
  s.n = static_cast<int>(r.u32());
  s.dt = r.f64();
  s.save_every = r.f64();
  const auto count = r.u64();
  s.values.resize(count * s.grid.size());
  r.f64s(s.values);
  if (!r.at_end()) fail(ErrorKind::Format, path.string() + ": trailing bytes after snapshot data");
  return s;
}

}  // namespace kolmo
