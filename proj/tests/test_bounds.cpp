#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "qmarkov/bounds.hpp"
#include "qmarkov/recovery.hpp"

using namespace qmarkov;

TEST_CASE("accumulator bookkeeping") {
  BoundAccumulator a("x");
  a.add(1.0, 2.0);
  a.add(0.5, 0.5);
  BoundAccumulator b("x");
  b.add(3.0, 4.0);
  a.merge(b);
  const BoundReport r = a.report();
  CHECK(r.instances == 3);
  CHECK(r.margin_min == 0.0);
  CHECK(r.margin_median == 1.0);
  CHECK(r.max_violation == 0.0);
  CHECK(r.pass());
  a.add(1.1, 1.0);
  CHECK(!a.report().pass());
  CHECK(a.report().max_violation == doctest::Approx(0.1));
  CHECK(!BoundAccumulator("empty").report().pass());
}

TEST_CASE("lieb robinson bound formula") {
  CHECK(lr_bound(1, 3, 2, 0.0) == 0.0);
  const double c = 1.0 - 2.0 / std::numbers::e;
  CHECK(lr_bound(2, 3, 2, 0.1) == doctest::Approx(2 * 0.36 / 2 / c));
  CHECK(lr_bound(1, 3, 4, -0.05) == doctest::Approx(std::pow(0.3, 4) / 24 / c));
  CHECK(lr_bound(1, 5, 1, 10.0) == 2.0);
}

TEST_CASE("lieb robinson check on a chain") {
  const Hamiltonian H = build_tfim_chain(5, 1.0, 0.9, false);
  const Region A{2};
  std::vector<Mat> ops{embed(pauli('X'), {2}, 5), embed(pauli('Z'), {2}, 5)};
  const std::vector<double> ts{0.0, 0.05, 0.2, 0.5};
  for (int ell = 1; ell <= 4; ++ell) CHECK(lr_truncation_check(H, A, ell, ts, ops).pass());
  // at saturation the patch is exact
  const BoundReport sat = lr_truncation_check(H, A, saturating_ell(H, A), ts, ops);
  CHECK(sat.pass());
}

TEST_CASE("double commutator identity by hand") {
  // one qubit: rho - I/2 = (1/8) sum_S [S,[S,rho]]
  std::mt19937_64 rng(3);
  const Mat r = random_density(rng, 2);
  Mat rhs = Mat::Zero(2, 2);
  for (char p : {'X', 'Y', 'Z'}) {
    const Mat S = pauli(p);
    rhs += 2.0 * (r - S * r * S);
  }
  CHECK(max_abs(r - Mat::Identity(2, 2) / 2.0 - rhs / 8.0) < 1e-15);
  CHECK(double_commutator_identity(r, Region{0}) < 1e-15);
  CHECK(double_commutator_identity(random_density(rng, 8), Region{0, 2}) < 1e-14);
  CHECK_THROWS_AS(double_commutator_identity(r, Region{}), InvalidRegion);
  CHECK_THROWS_AS(double_commutator_identity(random_density(rng, 16), Region{0, 1, 2, 3}), CapacityError);
}

TEST_CASE("holder and kms bounds at infinite temperature") {
  // H = 0 gives rho = I/d: both conjugations are A itself, so the bound is 2 ||A|| ||O||_rho
  const GibbsState g = gibbs(hermitian_eig(Mat::Zero(4, 4)), 1.0);
  std::mt19937_64 rng(9);
  const Mat A = random_contraction(rng, 4), O = random_complex(rng, 4, 4);
  const ValueBound vb = holder_loose(g, A, O);
  const double hs = std::sqrt((O.adjoint() * O).trace().real() / 4.0);
  CHECK(vb.bound == doctest::Approx(2.0 * op_norm(A) * hs).epsilon(1e-10));
  CHECK(vb.value <= vb.bound);
}

TEST_CASE("imaginary conjugation") {
  const Hamiltonian H = build_tfim_chain(4, 1.0, 0.9, false);
  const Spectrum s = hermitian_eig(H.dense());
  const Mat S = pauli_string("IXII");
  const ValueBound z = imaginary_conjugation(H, s, S, 1, 0.0);
  CHECK(z.value == doctest::Approx(1.0));
  CHECK(z.bound == 1.0);
  const double beta = 0.9 / (2.0 * H.degree());
  const ValueBound v = imaginary_conjugation(H, s, S, 1, beta);
  CHECK(v.value <= v.bound);
  CHECK(v.value > 1.0);
  CHECK_THROWS_AS(imaginary_conjugation(H, s, S, 1, 1.0 / (2.0 * H.degree())), InvalidParameter);
}

TEST_CASE("leibniz rule") {
  std::mt19937_64 rng(1);
  std::vector<Mat> f;
  for (int i = 0; i < 3; ++i) f.push_back(random_complex(rng, 4, 4));
  CHECK(leibniz_deviation(f, random_complex(rng, 4, 4)) < 1e-12);
  CHECK(leibniz_deviation({pauli('X')}, pauli('Z')) == 0.0);
  CHECK_THROWS_AS(leibniz_deviation({}, pauli('Z')), InvalidParameter);
}

TEST_CASE("sweeps are deterministic and pass") {
  const BoundReport a = holder_loose_sweep(5, 20), b = holder_loose_sweep(5, 20);
  CHECK(a.instances == 20);
  CHECK(a.margin_min == b.margin_min);
  CHECK(a.pass());
  CHECK(kms_norm_sweep(5, 20).pass());
  CHECK(imaginary_conjugation_sweep(5, 20).pass());
  CHECK(lr_sweep(5, 20).pass());
  CHECK(double_commutator_sweep(5, 10).pass());
  CHECK(leibniz_sweep(5, 10).pass());
}

TEST_CASE("gap against an independent eigensolver") {
  const Generator g = assemble(build_tfim_chain(2, 1.0, 0.7, false), single_site_jumps(Region{0, 1}),
                               Weight::metropolis(1.0, 1.0));
  REQUIRE(g.L.matrix);
  Eigen::ComplexEigenSolver<Mat> es(*g.L.matrix);
  double ref = 1e300;
  for (long i = 0; i < es.eigenvalues().size(); ++i) {
    const double a = std::abs(es.eigenvalues()(i));
    if (a > 1e-8) ref = std::min(ref, a);
  }
  const auto gap = local_gap(g);
  REQUIRE(gap);
  CHECK(*gap == doctest::Approx(ref).epsilon(1e-8));

  const GapDecayReport r = gap_decay_check(g, {0.1, 1.0, 5.0}, 4, 3);
  CHECK(r.rows.size() == 12);
  CHECK(r.pass());

  const Generator none = assemble(build_tfim_chain(2, 1.0, 0.7, false), {}, Weight::metropolis(1.0, 1.0));
  CHECK(!local_gap(none));
  CHECK_THROWS_AS(gap_decay_check(none, {1.0}, 1, 1), NumericDomain);
}

TEST_CASE("kernel of a single jump generator commutes with the jump") {
  const Generator g = assemble(build_tfim_chain(2, 1.0, 0.8, false), JumpSet{{"X0", 0, 'X'}},
                               Weight::metropolis(1.0, 1.0));
  const CommutatorDirichletReport r =
      commutator_dirichlet_relation(g, pauli_string("XI"), 5, {1.0, 10.0, 100.0}, 2);
  CHECK(r.kernel_pass());
  CHECK(r.kernel_dirichlet < 1e-10);
  CHECK(r.rows.size() == 20);
  for (const auto& row : r.rows) CHECK(row.dirichlet >= -1e-12);
}

TEST_CASE("quasilocal proxy vanishes at saturation") {
  const Hamiltonian H = build_tfim_chain(3, 1.0, 0.9, false);
  const Weight w = Weight::metropolis(1.0, 1.0);
  CHECK(quasilocal_proxy(H, Region{0}, w, saturating_ell(H, Region{0})) < 1e-10);
  CHECK(quasilocal_proxy(H, Region{0}, w, 1) > 1e-3);
}

TEST_CASE("json reports") {
  const auto j = to_json(leibniz_sweep(1, 3));
  CHECK(j["instances"] == 3);
  CHECK(j["pass"] == true);
}
