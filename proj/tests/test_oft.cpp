#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "qmarkov/oft.hpp"
#include "qmarkov/spinsys.hpp"

using namespace qmarkov;
using boost::math::quadrature::gauss_kronrod;

TEST_CASE("bohr components of X under H = Z") {
  const Spectrum s = hermitian_eig(pauli('Z'));
  const BohrDecomp bd = bohr_decompose(s, pauli('X'));
  // nu_list = {-2, 0, 2}; E ascending puts |1> first
  Mat up = Mat::Zero(2, 2), down = Mat::Zero(2, 2);
  up(0, 1) = 1.0;
  down(1, 0) = 1.0;
  CHECK(max_abs(bd.component(2) - up) < 1e-15);
  CHECK(max_abs(bd.component(0) - down) < 1e-15);
  CHECK(max_abs(bd.component(1)) == 0.0);
}

TEST_CASE("completeness and adjoint symmetry") {
  const Hamiltonian H = build_tfim_chain(2, 1.0, 0.6, false);
  const Spectrum s = hermitian_eig(H.dense());
  std::mt19937_64 rng(4);
  for (const Mat& A : {Mat(pauli_string("XI")), random_complex(rng, 4, 4)}) {
    const BohrDecomp bd = bohr_decompose(s, A);
    const BohrDecomp bda = bohr_decompose(s, A.adjoint());
    Mat sum = Mat::Zero(4, 4);
    const int m = static_cast<int>(s.bohr.size());
    for (int k = 0; k < m; ++k) {
      sum += bd.component(k);
      // bohr list is sign symmetric, so -nu sits at m-1-k
      CHECK(max_abs(bd.component(k).adjoint() - bda.component(m - 1 - k)) < 1e-10);
    }
    CHECK(max_abs(sum - A) < 1e-12);
  }
  // a function of H only has the zero component
  const BohrDecomp f = bohr_decompose(s, H.dense() * H.dense());
  REQUIRE(f.active(1e-12).size() == 1);
  CHECK(s.bohr[f.active(1e-12)[0]] == 0.0);
}

TEST_CASE("oft window and limits") {
  const Spectrum s = hermitian_eig(pauli('Z'));
  const OftParams p(0.05);
  const BohrDecomp bd = bohr_decompose(s, pauli('X'));
  // isolated peak at nu = 2
  const Mat at = oft(bd, 2.0, p);
  const double scale = std::pow(0.05 * std::sqrt(2 * std::numbers::pi), -0.5);
  CHECK(max_abs(at - scale * bd.component(2)) < 1e-6 * scale);
  const BohrDecomp id = bohr_decompose(s, Mat::Identity(2, 2));
  CHECK(max_abs(oft(id, 0.3, p) - fhat(0.3, 0.05) * Mat::Identity(2, 2)) < 1e-15);
}

TEST_CASE("reconstruction against numerical omega integral") {
  std::mt19937_64 rng(8);
  const Hamiltonian H = build_random_local(2, 2, 2, 5);
  const Spectrum s = hermitian_eig(H.dense());
  const Mat A = random_complex(rng, 4, 4);
  const BohrDecomp bd = bohr_decompose(s, A);
  for (double sigma : {0.3, 1.0}) {
    const OftParams p(sigma);
    const Mat analytic = oft_reconstruct(bd, p);
    CHECK(max_abs(analytic - A) < 1e-10 * max_abs(A));
    // independent oracle: integrate every entry of A^(w) in the eigenframe
    const double pref = std::pow(2.0 * sigma * std::sqrt(2.0 * std::numbers::pi), -0.5);
    Mat numeric(4, 4);
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) {
        auto fr = [&](double w) { return oft_frame(bd, w, p)(k, j).real(); };
        auto fi = [&](double w) { return oft_frame(bd, w, p)(k, j).imag(); };
        const double lo = -30.0 * sigma - 10.0, hi = 30.0 * sigma + 10.0;
        numeric(k, j) = cplx(gauss_kronrod<double, 61>::integrate(fr, lo, hi, 12, 1e-13),
                             gauss_kronrod<double, 61>::integrate(fi, lo, hi, 12, 1e-13));
      }
    CHECK(max_abs(pref * s.from_frame(numeric) - A) < 1e-9 * max_abs(A));
  }
}

TEST_CASE("heisenberg picture phases") {
  const Spectrum s = hermitian_eig(pauli('Z'));
  const BohrDecomp bd = bohr_decompose(s, pauli('X'));
  const OftParams p(1.0);
  CHECK(max_abs(oft_heisenberg(bd, 0.7, 0.0, p) - oft(bd, 0.7, p)) == 0.0);
  const double t = std::numbers::pi / 3;
  const Mat Af = oft_heisenberg_frame(bd, 2.0, t, p);
  // frame index 0 is E = -1, so (0,1) carries nu = -2
  CHECK(std::abs(Af(0, 1) - bd.A_frame(0, 1) * std::polar(1.0, -2.0 * t) * fhat(4.0, 1.0)) < 1e-15);
  CHECK(std::abs(Af(1, 0) - bd.A_frame(1, 0) * std::polar(1.0, 2.0 * t) * fhat(0.0, 1.0)) < 1e-15);
  const BohrDecomp f = bohr_decompose(s, pauli('Z'));
  CHECK(max_abs(oft_heisenberg(f, 0.1, 5.0, p) - oft(f, 0.1, p)) < 1e-15);
}

TEST_CASE("imaginary time shift identity") {
  const Spectrum s = hermitian_eig(pauli('Z'));
  const BohrDecomp bd = bohr_decompose(s, pauli('X'));
  const OftParams p(1.0);
  auto zero = conjugate_imaginary(s, bd, 0.0, 0.0, p);
  CHECK(max_abs(zero.lhs - oft(bd, 0.0, p)) < 1e-15);
  auto one = conjugate_imaginary(s, bd, 0.0, 1.0, p);
  CHECK(max_abs(one.lhs - one.rhs) < 1e-10);

  std::mt19937_64 rng(12);
  std::uniform_real_distribution<> u(-2.0, 2.0);
  for (int i = 0; i < 30; ++i) {
    const Hamiltonian H = build_random_local(2, 2, 2, 100 + i);
    const Spectrum sp = hermitian_eig(H.dense());
    const Mat A = random_contraction(rng, 4);
    const BohrDecomp b = bohr_decompose(sp, A);
    const double beta = std::abs(u(rng)), omega = u(rng), sigma = 0.5 + std::abs(u(rng)) / 2;
    const OftParams q(sigma);
    auto cp = conjugate_imaginary(sp, b, omega, beta, q);
    CHECK(max_abs(cp.lhs - cp.rhs) <= 1e-9 * max_abs(cp.rhs));
    // norm bound from the triangle inequality on the window
    const double bound = std::exp(beta * omega + sigma * sigma * beta * beta) *
                         std::pow(sigma * std::sqrt(2 * std::numbers::pi), -0.5) * op_norm(A);
    CHECK(op_norm(cp.lhs) <= bound * (1 + 1e-10));
    CHECK(op_norm(oft(b, omega, q)) <= norm_decay_bound(sp, A, omega, beta, q) * (1 + 1e-10));
  }
}

TEST_CASE("conjugation norm") {
  const Hamiltonian H = build_tfim_chain(4, 1.0, 0.9, false);
  const Spectrum s = hermitian_eig(H.dense());
  const Mat X1 = pauli_string("IXII");
  CHECK(conjugation_norm(s, X1, 0.0) == doctest::Approx(1.0));
  const int d = H.degree();
  const double beta = 0.8 / (2.0 * d);
  CHECK(conjugation_norm(s, X1, beta) <= 5.0);
  CHECK(conjugation_norm(s, pauli_string("XZII"), beta) <= 25.0);
}
