#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "kolmo/error.hpp"
#include "kolmo/snapshot.hpp"
#include "kolmo/spectral.hpp"
#include "support.hpp"

using namespace kolmo;

namespace {

Grid grid32() { return Grid{}; }

struct Mode {
  int p, q;
  double amp, phase;
};

// Vorticity built from a handful of explicit cosines; its derivatives and
// velocity follow in closed form.
struct ModeSum {
  std::vector<Mode> modes;

  double eval(double x, double y, int what) const {
    double s = 0.0;
    for (const auto& m : modes) {
      const double k2 = m.p * m.p + m.q * m.q;
      const double arg = m.p * x + m.q * y + m.phase;
      switch (what) {
        case 0: s += m.amp * std::cos(arg); break;                 // w
        case 1: s += -m.amp * m.p * std::sin(arg); break;          // dw/dx
        case 2: s += -m.amp * m.q * std::sin(arg); break;          // dw/dy
        case 3: s += -m.amp * m.q / k2 * std::sin(arg); break;     // u = dpsi/dy
        case 4: s += m.amp * m.p / k2 * std::sin(arg); break;      // v = -dpsi/dx
      }
    }
    return s;
  }

  std::vector<double> sample(const Grid& g, int what) const {
    std::vector<double> v(g.size());
    for (int iy = 0; iy < g.ny; ++iy)
      for (int ix = 0; ix < g.nx; ++ix) v[iy * g.nx + ix] = eval(ix * g.dx(), iy * g.dy(), what);
    return v;
  }
};

ModeSum random_modes(std::uint64_t seed, int count, int band) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> m(-band, band);
  std::uniform_real_distribution<double> a(0.2, 2.0), ph(0.0, 2.0 * std::numbers::pi);
  ModeSum s;
  while (static_cast<int>(s.modes.size()) < count) {
    Mode md{m(rng), m(rng), a(rng), ph(rng)};
    if (md.p == 0 && md.q == 0) continue;
    s.modes.push_back(md);
  }
  return s;
}

}  // namespace

TEST(Dft, MatchesNaiveTransform) {
  Grid g;
  g.nx = 16;
  g.ny = 12;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto v = kt::gaussian(g.size(), seed);
    const auto fast = dft_forward_real(g, v);
    const auto slow = kt::naive_dft(g, v);
    for (std::size_t k = 0; k < fast.size(); ++k) EXPECT_LT(std::abs(fast[k] - slow[k]), 1e-12);
  }
}

TEST(Dft, RoundTripAndParseval) {
  const Grid g = grid32();
  const auto v = kt::gaussian(g.size(), 11);
  const auto a = dft_forward_real(g, v);
  EXPECT_LT(kt::max_abs_diff(dft_inverse_real(g, a), v), 1e-12);
  double phys = 0.0, spec = 0.0;
  for (double x : v) phys += x * x;
  for (const auto& c : a) spec += std::norm(c);
  EXPECT_NEAR(phys / static_cast<double>(g.size()), spec, 1e-12 * phys);
}

TEST(Grid, RejectsOddOrTinyGrids) {
  Grid g;
  g.nx = 31;
  EXPECT_THROW(g.validate(), Error);
  g.nx = 4;
  EXPECT_THROW(g.validate(), Error);
}

TEST(SpectralField, HermitianDefectOfRealFieldIsZero) {
  const Grid g = grid32();
  const auto f = SpectralField::from_physical(g, kt::gaussian(g.size(), 3));
  EXPECT_LT(f.hermitian_defect(), 1e-14);
}

TEST(Velocity, IsDivergenceFreeAndMatchesClosedForm) {
  const Grid g = grid32();
  const auto ms = random_modes(5, 6, 6);
  const auto w = SpectralField::from_physical(g, ms.sample(g, 0));
  const auto [u, v] = velocity_from_vorticity(w);
  EXPECT_LT(max_divergence(u, v), 1e-12);
  EXPECT_LT(kt::max_abs_diff(u.to_physical(), ms.sample(g, 3)), 1e-11);
  EXPECT_LT(kt::max_abs_diff(v.to_physical(), ms.sample(g, 4)), 1e-11);
}

TEST(Diagnostics, SingleModeClosedForm) {
  // w = A cos(p x + q y): KE = A^2 / (4 k^2), D = A^2 / (2 Re); I = 0 unless
  // the mode is (0, n).
  const Grid g = grid32();
  const FlowParams p{7.0, 2, 0.01};
  for (const auto& [pp, qq] : std::vector<std::pair<int, int>>{{1, 0}, {2, 3}, {-3, 1}}) {
    ModeSum ms{{{pp, qq, 1.7, 0.4}}};
    const auto d = diagnostics(SpectralField::from_physical(g, ms.sample(g, 0)), p);
    const double k2 = pp * pp + qq * qq;
    EXPECT_NEAR(d.ke, 1.7 * 1.7 / (4.0 * k2), 1e-12);
    EXPECT_NEAR(d.d, 1.7 * 1.7 / (2.0 * p.re), 1e-12);
    EXPECT_NEAR(d.i, 0.0, 1e-12);
  }
  // w = A cos(n y): u = -(A/n) sin(n y), I = <u sin(n y)> = -A / (2n).
  ModeSum shear{{{0, 2, 1.3, 0.0}}};
  EXPECT_NEAR(diagnostics(SpectralField::from_physical(g, shear.sample(g, 0)), p).i, -1.3 / 4.0, 1e-12);
}

TEST(Laminar, FixedPointBelowCriticalRe) {
  const Grid g = grid32();
  const FlowParams p{3.0, 2, 0.01};
  const auto w0 = laminar_state(g, p);
  const auto w1 = step(w0, p);
  EXPECT_LT(kt::max_abs_diff(w0.to_physical(), w1.to_physical()), 1e-10);
  const auto d = diagnostics(w0, p);
  const double n2 = 4.0;
  EXPECT_NEAR(d.d, p.re / (2.0 * n2), 1e-8);
  EXPECT_NEAR(d.i, p.re / (2.0 * n2), 1e-8);
  EXPECT_NEAR(d.ke, p.re * p.re / (4.0 * n2 * n2), 1e-8);
}

TEST(Tendency, MatchesPointwiseAdvectionAndForcing) {
  // Modes up to |m| = 4 so the quadratic product stays inside the kept band
  // and dealiasing is exact.
  const Grid g = grid32();
  const FlowParams p{14.4, 2, 0.01};
  FlowIntegrator integ(g, p);
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto ms = random_modes(seed, 5, 4);
    const auto w = SpectralField::from_physical(g, ms.sample(g, 0));
    const auto tend = integ.tendency(w.coeffs());
    const auto got = dft_inverse_real(g, tend);
    const auto wx = ms.sample(g, 1), wy = ms.sample(g, 2), u = ms.sample(g, 3), v = ms.sample(g, 4);
    std::vector<double> want(g.size());
    for (int iy = 0; iy < g.ny; ++iy) {
      for (int ix = 0; ix < g.nx; ++ix) {
        const auto k = static_cast<std::size_t>(iy * g.nx + ix);
        want[k] = -(u[k] * wx[k] + v[k] * wy[k]) - p.n * std::cos(p.n * iy * g.dy());
      }
    }
    EXPECT_LT(kt::max_abs_diff(got, want), 1e-10) << "seed " << seed;
  }
}

TEST(Dealias, TwoThirdsBand) {
  const Grid g = grid32();
  EXPECT_TRUE(dealias_keeps(g, 10, -10));
  EXPECT_FALSE(dealias_keeps(g, 11, 0));
  EXPECT_FALSE(dealias_keeps(g, 0, -11));
}

TEST(Integrator, StepKeepsHermitianSymmetryAndBand) {
  const Grid g = grid32();
  const FlowParams p{14.4, 2, 0.01};
  auto w = random_initial_condition(g, 4);
  FlowIntegrator integ(g, p);
  w = integ.advance(w, 50);
  EXPECT_LT(w.hermitian_defect(), 1e-12);
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix)
      if (!dealias_keeps(g, g.mode_x(ix), g.mode_y(iy))) EXPECT_EQ(std::abs(w.mode(g.mode_x(ix), g.mode_y(iy))), 0.0);
}

TEST(Integrator, SecondOrderInTime) {
  const Grid g = grid32();
  const auto ic = advance(random_initial_condition(g, 9), {14.4, 2, 0.01}, 20.0);
  auto run = [&](double dt) { return advance(ic, {14.4, 2, dt}, 1.0).to_physical(); };
  const auto ref = run(0.00125);
  const double e1 = kt::max_abs_diff(run(0.02), ref);
  const double e2 = kt::max_abs_diff(run(0.01), ref);
  EXPECT_GT(e1 / e2, 3.5);
  EXPECT_LT(e1 / e2, 4.6);
}

TEST(Integrator, ViscousDecayOfUnforcedModeIsExactToSecondOrder) {
  // A single (1,0) mode is an exact nonlinear solution whose only forcing
  // response is the separate (0,n) shear; its amplitude decays by the
  // Crank-Nicolson factor per step.
  const Grid g = grid32();
  const FlowParams p{10.0, 2, 0.01};
  ModeSum ms{{{1, 0, 1.0, 0.0}}};
  const auto w0 = SpectralField::from_physical(g, ms.sample(g, 0));
  const auto w1 = step(w0, p);
  const double a = p.dt / (2.0 * p.re);
  EXPECT_NEAR(std::abs(w1.mode(1, 0)), std::abs(w0.mode(1, 0)) * (1.0 - a) / (1.0 + a), 1e-13);
}

TEST(Random, InitialConditionHasRequestedEnergyAndIsSeeded) {
  const Grid g = grid32();
  const auto a = random_initial_condition(g, 5, 2.5);
  const auto b = random_initial_condition(g, 5, 2.5);
  const auto c = random_initial_condition(g, 6, 2.5);
  EXPECT_NEAR(diagnostics(a, {}).ke, 2.5, 1e-12);
  EXPECT_EQ(a.to_physical(), b.to_physical());
  EXPECT_GT(kt::max_abs_diff(a.to_physical(), c.to_physical()), 1e-3);
}

TEST(Simulate, CountIncludesInitialCondition) {
  const Grid g = grid32();
  const auto s = simulate(random_initial_condition(g, 1), {13.5, 2, 0.01}, 100.0, 5.0);
  EXPECT_EQ(s.count(), 21u);
  EXPECT_DOUBLE_EQ(s.save_every, 5.0);
  EXPECT_THROW(simulate(random_initial_condition(g, 1), {13.5, 2, 0.01}, 10.0, 0.015), Error);
}

TEST(FlowParams, Validation) {
  EXPECT_THROW((FlowParams{-1.0, 2, 0.01}.validate()), Error);
  EXPECT_THROW((FlowParams{10.0, 0, 0.01}.validate()), Error);
  EXPECT_THROW((FlowParams{10.0, 2, 0.0}.validate()), Error);
}

TEST(Integrator, DivergenceRaisesNonFinite) {
  const Grid g = grid32();
  auto w = random_initial_condition(g, 2, 1e6);
  try {
    advance(w, {1e6, 2, 1.0}, 200.0);
    FAIL() << "expected NonFinite";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonFinite);
  }
}

TEST(Snapshots, BinaryRoundTripAndRejection) {
  const Grid g = grid32();
  auto s = simulate(random_initial_condition(g, 3), {14.4, 2, 0.01}, 10.0, 5.0);
  const auto dir = std::filesystem::temp_directory_path() / "kolmo_test_snap";
  std::filesystem::create_directories(dir);
  const auto path = dir / "s.kf";
  save_snapshots(path, s);
  const auto back = load_snapshots(path);
  EXPECT_EQ(back.values, s.values);
  EXPECT_EQ(back.grid, s.grid);
  EXPECT_EQ(back.re, s.re);
  EXPECT_EQ(back.save_every, s.save_every);

  // Corrupt the version field (bytes 6..9).
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(6);
    const char v = 9;
    f.write(&v, 1);
  }
  try {
    load_snapshots(path);
    FAIL() << "expected VersionMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::VersionMismatch);
  }
  save_snapshots(path, s);
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 8);
  EXPECT_THROW(load_snapshots(path), Error);
  std::filesystem::remove_all(dir);
}
