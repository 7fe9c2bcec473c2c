#include <cmath>
#include <random>

#include "doctest.h"
#include "qmarkov/recovery.hpp"

using namespace qmarkov;

TEST_CASE("discarding a region") {
  const GibbsState g = gibbs(hermitian_eig(build_tfim_chain(3, 1.0, 0.8, false).dense()), 1.0);
  CHECK(max_abs(discard_region(g, Region{}) - g.rho) < 1e-15);
  const Mat d = discard_region(g, Region{1});
  CHECK(std::abs(d.trace().real() - 1.0) < 1e-14);
  CHECK(max_abs(partial_trace(d, Region{1}, 3) - partial_trace(g.rho, Region{1}, 3)) < 1e-15);

  // product state: only the A factor changes
  std::mt19937_64 rng(3);
  const Mat a = random_density(rng, 2), b = random_density(rng, 2);
  GibbsState p;
  p.rho = kron(a, b);
  CHECK(max_abs(discard_region(p, Region{0}) - kron(Mat::Identity(2, 2) / 2.0, b)) < 1e-15);
  // bell-diagonal state with maximally mixed marginals
  Mat bd = Mat::Zero(4, 4);
  bd(0, 0) = bd(3, 3) = 0.5;
  bd(0, 3) = bd(3, 0) = 0.3;
  p.rho = bd;
  CHECK(max_abs(partial_trace(discard_region(p, Region{0}), Region{}, 2) - Mat::Identity(4, 4) / 4.0) < 1e-15);
}

TEST_CASE("time averaged map limits and backends") {
  const Hamiltonian H = build_random_local(2, 2, 2, 11);
  const Generator g = assemble(H, single_site_jumps(Region{0}), Weight::metropolis(1.0, 1.0));
  std::mt19937_64 rng(1);
  const Mat r = random_density(rng, 4);
  const SuperOp small = time_averaged_map(g, 1e-8, Backend::spectral);
  CHECK(max_abs(small.apply(r) - r) < 1e-6);
  const SuperOp a = time_averaged_map(g, 5.0, Backend::spectral);
  const SuperOp b = time_averaged_map(g, 5.0, Backend::ode);
  CHECK(trace_distance(a.apply(r), b.apply(r)) < 1e-6);
  CHECK_THROWS_AS(time_averaged_map(g, 0.0, Backend::spectral), InvalidParameter);

  Generator zero = g;
  zero.L = SuperOp::zero(4);
  zero.L.sym = RVec::Ones(16);
  CHECK(max_abs(time_averaged_map(zero, 3.0, Backend::spectral).apply(r) - r) < 1e-14);
}

TEST_CASE("local recovery lifts correctly") {
  // H on sites 1,2 of 4; jumps on site 1; the map acts trivially on 0 and 3
  const Hamiltonian full = build_tfim_chain(4, 1.0, 0.8, false);
  const Hamiltonian part = truncate_patch(full, Region{1}, 1);
  const Weight w = Weight::metropolis(1.0, 1.0);
  const LocalRecovery loc(part, Region{1}, w, Backend::spectral);
  const Generator ref = assemble(part, single_site_jumps(Region{1}), w);
  std::mt19937_64 rng(6);
  const Mat X = random_complex(rng, 16, 16);
  CHECK(max_abs(loc.heisenberg(X) - ref.heisenberg(X)) < 1e-10);
  const SuperOp R = time_averaged_map(ref, 3.0, Backend::spectral);
  CHECK(max_abs(loc.apply(X, 3.0) - R.apply(X)) < 1e-10);
  CHECK(max_abs(loc.apply_adjoint(X, 3.0) - R.apply_adjoint(X)) < 1e-10);
  const LocalRecovery ode(part, Region{1}, w, Backend::ode);
  CHECK(max_abs(ode.apply(X, 3.0) - loc.apply(X, 3.0)) < 1e-7);
}

TEST_CASE("one qubit recovery converges") {
  RecoveryScenario s;
  s.H = Hamiltonian(1, {{{0}, pauli('Z'), "Z"}});
  s.beta = 1.0;
  s.sigma = 1.0;
  s.A = Region{0};
  s.times = {1.0, 10.0, 100.0, 1000.0};
  const RecoveryCurve c = recovery_error_curve(s);
  CHECK(c.rows.back().err <= 1e-3);
  for (size_t i = 1; i < c.rows.size(); ++i) CHECK(c.rows[i].err <= c.rows[i - 1].err);

  s.A = Region{};
  for (const auto& r : recovery_error_curve(s).rows) CHECK(r.err == 0.0);
}

TEST_CASE("recovery invariants on a 3-qubit chain") {
  RecoveryScenario s;
  s.H = build_tfim_chain(3, 1.0, 1.05, false);
  s.beta = 1.0;
  s.sigma = 1.0;
  s.A = Region{1};
  s.times = {1.0, 10.0, 100.0, 1000.0};
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    s.seed = seed;
    for (const auto& r : recovery_error_curve(s).rows) {
      CHECK(r.fixed_point <= 1e-8);
      CHECK(r.dirichlet <= r.bound + 1e-9);
      CHECK(r.stationarity <= r.bound + 1e-9);
    }
  }
  RecoveryScenario b = s;
  b.times = {2.0, 1.0};
  CHECK_THROWS_AS(b.validate(), InvalidParameter);
}

TEST_CASE("recovery channel is completely positive") {
  const LocalRecovery r(build_tfim_chain(2, 1.0, 0.9, false), Region{0}, Weight::metropolis(1.0, 1.0),
                        Backend::spectral);
  for (double t : {0.5, 5.0, 50.0}) CHECK(choi_min_eigenvalue(r, t) >= -1e-8);
  const LocalRecovery g(build_random_local(3, 2, 3, 2), Region{2}, Weight::gaussian(1.0, 1.0, 1.0),
                        Backend::spectral);
  CHECK(choi_min_eigenvalue(g, 3.0) >= -1e-8);
}

TEST_CASE("truncation saturates and the gap shrinks with ell") {
  RecoveryScenario s;
  s.H = build_tfim_chain(4, 1.0, 0.9, false);
  s.beta = 1.0;
  s.sigma = 1.0;
  s.A = Region{0};
  s.times = {1.0, 10.0};
  const int sat = saturating_ell(s.H, s.A);
  const auto rows = truncated_recovery_error(s);
  for (const auto& r : rows)
    if (r.ell == sat) {
      CHECK(r.map_gap < 1e-10);
      CHECK(std::abs(r.err_trunc - r.err_full) < 1e-10);
    }
  for (double t : s.times) {
    double prev = 1e300;
    for (const auto& r : rows)
      if (r.t == t) {
        CHECK(r.map_gap <= prev + 1e-10);
        prev = r.map_gap;
      }
  }
}

TEST_CASE("patching degenerate cases") {
  const Hamiltonian H = build_tfim_chain(2, 1.0, 0.9, false);
  const double t = 50.0;
  const PatchResult single = patching_prepare(H, 1.0, 1.0, 2, saturating_ell(H, Region{0, 1}), t);
  const LocalRecovery r(H, Region{0, 1}, Weight::metropolis(1.0, 1.0), Backend::spectral);
  const GibbsState g = gibbs(hermitian_eig(H.dense()), 1.0);
  const double plain = trace_distance(r.apply(discard_region(g, Region{0, 1}), t), g.rho);
  CHECK(single.err <= plain + 1e-12);

  const PatchResult none = patching_prepare(H, 1.0, 1.0, 1, 2, 1e-9);
  CHECK(std::abs(none.err - none.initial_err) < 1e-6);
  CHECK_THROWS_AS(patching_prepare(H, 1.0, 1.0, 3, 2, 1.0), InvalidParameter);
}
