#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "qmarkov/lindblad.hpp"
#include "qmarkov/oft.hpp"

using namespace qmarkov;
using boost::math::quadrature::gauss_kronrod;

namespace {

// int gamma(w) fhat(w - nu1) fhat(w - nu2) dw by adaptive quadrature
double alpha_oracle(const Weight& w, double nu1, double nu2) {
  auto f = [&](double om) { return w.gamma(om) * fhat(om - nu1, w.sigma) * fhat(om - nu2, w.sigma); };
  const double c = 0.5 * (nu1 + nu2), s = w.sigma;
  // the Metropolis kink sits at -beta sigma^2 / 2; split there
  const double kink = -w.beta * s * s / 2.0;
  const double lo = c - 40.0 * s, hi = c + 40.0 * s;
  double total = 0.0;
  if (kink > lo && kink < hi) {
    total += gauss_kronrod<double, 61>::integrate(f, lo, kink, 15, 1e-14);
    total += gauss_kronrod<double, 61>::integrate(f, kink, hi, 15, 1e-14);
  } else {
    total = gauss_kronrod<double, 61>::integrate(f, lo, hi, 15, 1e-14);
  }
  return total;
}

std::vector<Generator> zoo() {
  std::vector<Generator> out;
  for (double beta : {0.2, 1.0, 4.0}) {
    out.push_back(assemble(build_tfim_chain(2, 1.0, 0.8, false), single_site_jumps(Region{0, 1}),
                           Weight::metropolis(beta, 1.0 / beta)));
    out.push_back(assemble(build_random_local(2, 2, 2, 3), single_site_jumps(Region{1}),
                           Weight::gaussian(beta, 1.0 / beta, 1.0 / beta)));
    out.push_back(assemble(build_random_local(3, 2, 3, 8), single_site_jumps(Region{0}),
                           Weight::metropolis(beta, 1.0 / beta)));
  }
  return out;
}

}  // namespace

TEST_CASE("weights") {
  const Weight g = Weight::gaussian(2.0, 0.5, 1.0);
  CHECK(std::abs(g.beta * (g.sigma_gamma * g.sigma_gamma + g.sigma * g.sigma) - 2 * g.omega_gamma) < 1e-12);
  const Weight m = Weight::metropolis(1.5, 0.7);
  for (double om : {-3.0, -0.2, 0.0, 0.4, 2.0})
    CHECK(m.gamma(om) == doctest::Approx(std::exp(-1.5 * std::max(om + 1.5 * 0.49 / 2, 0.0))).epsilon(1e-15));
  CHECK_THROWS_AS(Weight::gaussian(1.0, 1.0, 0.2), InvalidParameter);
  CHECK_THROWS_AS(Weight::metropolis(0.0, 1.0), InvalidParameter);
}

TEST_CASE("transition coefficients against quadrature") {
  for (const Weight& w : {Weight::metropolis(1.0, 1.0), Weight::metropolis(3.0, 0.4), Weight::gaussian(1.0, 1.0, 2.0),
                          Weight::gaussian(0.5, 0.8, 1.0)})
    for (auto [a, b] : {std::pair{0.0, 0.0}, std::pair{1.3, -0.4}, std::pair{-2.0, -2.5}, std::pair{0.7, 0.7}}) {
      const double ref = alpha_oracle(w, a, b);
      CHECK(std::abs(w.alpha(a, b) - ref) <= 1e-10 * std::max(ref, 1e-300));
      CHECK(w.alpha(a, b) == doctest::Approx(w.alpha(b, a)).epsilon(1e-14));
    }
  // deep in the downhill region the filter is one over the whole window
  const Weight m = Weight::metropolis(1.0, 1.0);
  CHECK(std::abs(m.alpha(-25.0, -25.0) - 1.0) < 1e-8);
  CHECK(m.alpha(0.0, 0.0) <= 1.0 + 1e-12);
  CHECK(m.alpha(0.0, 0.0) >= 0.0);
}

TEST_CASE("metropolis h coefficients in closed form") {
  // tilting the Gaussian window through the Metropolis kink gives
  // h = e^{b w/2} Phi(-(w + b s^2/2)/s) + e^{-b w/2} Phi((w - b s^2/2)/s), times e^{-dn^2/8s^2}
  auto Phi = [](double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); };
  for (double beta : {0.5, 1.0, 2.0})
    for (double sigma : {1.0 / beta, 0.3}) {
      const Weight m = Weight::metropolis(beta, sigma);
      for (auto [a, b] : {std::pair{0.0, 0.0}, std::pair{1.0, 0.2}, std::pair{-0.6, 1.5}, std::pair{-3.0, -2.0}}) {
        const double om = 0.5 * (a + b), dn = a - b, c = beta * sigma * sigma / 2.0;
        const double h = std::exp(beta * om / 2) * Phi(-(om + c) / sigma) + std::exp(-beta * om / 2) * Phi((om - c) / sigma);
        const double ref = h * std::exp(-dn * dn / (8.0 * sigma * sigma));
        CHECK(std::abs(m.h(a, b) - ref) <= 1e-12 * ref);
        CHECK(m.h(a, b) == doctest::Approx(m.h(-a, -b)).epsilon(1e-12));
      }
    }
}

TEST_CASE("one qubit Z with an X jump") {
  const Spectrum s = hermitian_eig(pauli('Z'));
  const Weight w = Weight::metropolis(1.0, 1.0);
  const Generator g = assemble(s, {pauli('X')}, w);
  REQUIRE(g.L.matrix);
  CHECK(g.L.matrix->rows() == 4);
  std::mt19937_64 rng(1);
  std::vector<Mat> probes;
  for (int i = 0; i < 5; ++i) probes.push_back(random_density(rng, 2));
  CHECK(trace_defect(g, probes) < 1e-12);
  CHECK(fixed_point_residual(g) < 1e-8);
  CHECK(detailed_balance_residual(g, g.gs) < 1e-8);
  CHECK(hermiticity_defect(g.B()) < 1e-8);
}

TEST_CASE("identity and commuting jumps") {
  const Spectrum s = hermitian_eig(pauli('Z'));
  const Weight w = Weight::metropolis(1.0, 1.0);
  const Generator id = assemble(s, {Mat::Identity(2, 2)}, w);
  CHECK(max_abs(*id.L.matrix) < 1e-14);
  const Generator z = assemble(s, {pauli('Z')}, w);
  CHECK(detailed_balance_residual(z, z.gs) < 1e-8);
  const Generator none = assemble(s, {}, w);
  CHECK(max_abs(*none.L.matrix) == 0.0);
  CHECK_THROWS_AS(assemble(s, {2.0 * pauli('X')}, w), InvalidParameter);
}

TEST_CASE("classical ising with Z jumps") {
  const Hamiltonian H = build_classical_ising(3, 1.0, false);
  JumpSet js{{"Z0", 0, 'Z'}, {"Z1", 1, 'Z'}};
  const Generator g = assemble(H, js, Weight::metropolis(1.0, 1.0));
  CHECK(fixed_point_residual(g) < 1e-10);
}

TEST_CASE("detailed balance and fixed point across a small zoo") {
  for (const Generator& g : zoo()) {
    CHECK(detailed_balance_residual(g, g.gs) < 1e-8);
    CHECK(fixed_point_residual(g) < 1e-8);
    CHECK(hermiticity_defect(g.B()) < 1e-8);
    // -G is positive semidefinite
    const SpectralForm sf(g.L);
    CHECK(sf.eigenvalues().maxCoeff() < 1e-8);
  }
}

TEST_CASE("dropping the coherent term breaks detailed balance") {
  AssembleOptions ab;
  ab.zero_coherent = true;
  const Generator g = assemble(build_tfim_chain(2, 1.0, 0.8, false), single_site_jumps(Region{0}),
                               Weight::metropolis(1.0, 1.0), ab);
  CHECK(detailed_balance_residual(g, g.gs) > 1e-4);
}

TEST_CASE("kernel route for the coherent term agrees with the Bohr route") {
  const Hamiltonian H = build_random_local(2, 2, 2, 6);
  const Spectrum s = hermitian_eig(H.dense());
  const Weight w = Weight::metropolis(1.0, 1.0);
  const Mat J = pauli_string("XI");
  CoherentOptions k;
  k.method = CoherentMethod::kernel;
  const Mat Bb = coherent_term(s, J, w);
  const Mat Bk = coherent_term(s, J, w, k);
  CHECK(max_abs(Bb - Bk) < 1e-6 * max_abs(Bb));

  AssembleOptions o;
  o.coherent.method = CoherentMethod::kernel;
  for (double beta : {0.5, 3.0}) {
    const Generator g = assemble(build_random_local(3, 2, 4, 9), single_site_jumps(Region{0, 2}),
                                 Weight::metropolis(beta, 1.0 / beta), o);
    CHECK(detailed_balance_residual(g, g.gs) < 1e-8);
  }
  CHECK_THROWS_AS(assemble(H, single_site_jumps(Region{0}), Weight::gaussian(1.0, 1.0, 1.0), o), InvalidParameter);
}
