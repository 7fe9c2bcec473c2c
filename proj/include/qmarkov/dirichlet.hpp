#pragma once

#include <string>
#include <vector>

#include "qmarkov/lindblad.hpp"

namespace qmarkov {

// -Re <X, L^dag X>_rho
double dirichlet_direct(const Generator& g, const GibbsState& gs, const Mat& X);

// sum_a sum_{nu1,nu2} abar(nu1,nu2) Tr[sqrt(rho) [A_nu1, X]^dag sqrt(rho) [A_nu2, Y]]
cplx dirichlet_bilinear(const Spectrum& spec, const GibbsState& gs, const std::vector<Mat>& jumps,
                        const TransitionCoeffs& tc, const Mat& X, const Mat& Y);

struct QuadSpec {
  double T_max = 0.0;      // 0 -> 3 beta
  double Omega_max = 0.0;  // 0 -> 2 ||H|| + 20 sigma
  int order = 20;          // GL nodes per panel
  double t_panel = 0.0;    // 0 -> chosen from beta and the Bohr spread
  double w_panel = 0.0;    // 0 -> 1.5 sigma
};

struct DirichletKernels {
  WeightKind kind = WeightKind::metropolis;
  double beta = 1.0;
  double sigma = 1.0;
  double omega_gamma = 0.0;
  double sigma_gamma = 0.0;
  QuadSpec quad;

  explicit DirichletKernels(const Weight& w, QuadSpec q = {});

  double g(double t) const;          // 1/(beta cosh(2 pi t / beta))
  double h_metropolis(double omega) const;
  double h_gaussian(double omega) const;
  double h(double omega) const;
};

struct CommutatorIntegral {
  double value = 0.0;
  double error_estimate = 0.0;  // |coarse - doubled| / max(|doubled|, tiny)
  double min_node = 0.0;        // smallest integrand value seen
  long nodes = 0;
  bool converged = true;
  std::string warning;
};

// sum_a int int g(t) h(w) ||[A^a(w,t), X]||_rho^2 dt dw on composite Gauss-Legendre panels
CommutatorIntegral dirichlet_commutator_integral(const Spectrum& spec, const GibbsState& gs,
                                                 const std::vector<Mat>& jumps, const DirichletKernels& k,
                                                 const Mat& X);

// every node value ||[A(w,t), X]||_rho on a coarse grid; used for the stationarity check
double max_commutator_node(const Spectrum& spec, const GibbsState& gs, const std::vector<Mat>& jumps,
                           const DirichletKernels& k, const Mat& X, int grid = 16);

// x-integral form of h for the Metropolis weight
double metropolis_h_integral(double omega, double beta, double sigma);
// int g(t) e^{-i delta t} dt, real by symmetry
double sech_transform(double delta, double beta);

struct KernelIdentityReport {
  int points = 0;
  double max_rel_h = 0.0;
  double max_abs_cosh = 0.0;
  double g_integral = 0.0;  // should be 1/2
  bool pass = false;
};
// 20 omega values x 5 beta values with sigma = 1/beta, plus the cosh identity
KernelIdentityReport metropolis_kernel_identity();

}  // namespace qmarkov
