#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "qmarkov/linalg.hpp"
#include "qmarkov/spinsys.hpp"

namespace qmarkov {

enum class WeightKind { metropolis, gaussian };

struct Weight {
  WeightKind kind = WeightKind::metropolis;
  double beta = 1.0;
  double sigma = 1.0;
  double omega_gamma = 0.0;  // gaussian only
  double sigma_gamma = 0.0;  // gaussian only, sigma_gamma^2 = 2 omega_gamma / beta - sigma^2

  static Weight metropolis(double beta, double sigma);
  static Weight gaussian(double beta, double sigma, double omega_gamma);

  double gamma(double omega) const;
  // log E[gamma(w)], w ~ N(nubar, sigma^2)
  double log_mean(double nubar) const;
  // int gamma(w) fhat(w - nu1) fhat(w - nu2) dw, closed form
  double alpha(double nu1, double nu2) const;
  double h(double nu1, double nu2) const;  // alpha e^{beta (nu1 + nu2) / 4}
  double alpha_bar(double nu1, double nu2) const;
  std::string name() const;
};

// log of the standard normal cdf, accurate in the far left tail
double log_norm_cdf(double z);

struct TransitionCoeffs {
  std::vector<double> nu;
  RMat alpha;  // indexed by positions in nu
};
TransitionCoeffs transition_coefficients(const Spectrum& spec, const Weight& w);

enum class CoherentMethod { bohr, kernel };

struct CoherentOptions {
  CoherentMethod method = CoherentMethod::bohr;
  // kernel route: B = kappa * int b1 (...)(int b2 A^dag(t') A(-t') + c A^dag A)
  double kappa;
  double c;
  int quad_order = 24;
  CoherentOptions();
};

// kernel transforms used by the kernel route
cplx b1_hat(double x);
cplx b2_hat(double y, int order = 24);

struct AssembleOptions {
  bool dense = true;
  bool zero_coherent = false;  // ablation only
  CoherentOptions coherent;
};

struct Generator {
  int dim = 0;
  Spectrum spec;
  GibbsState gs;
  Weight weight;
  std::vector<Mat> jumps_frame;  // U^dag A^a U
  Mat R_frame;                   // sum_a int gamma A^(w)^dag A^(w) dw
  Mat B_frame;
  SuperOp L;                     // schrodinger generator in the eigenframe

  Mat B() const { return spec.from_frame(B_frame); }
  Mat apply(const Mat& X) const { return L.apply(X); }
  Mat heisenberg(const Mat& X) const { return L.apply_adjoint(X); }
};

// jump matrices in the global basis; every jump needs operator norm <= 1
SuperOp dissipative_part(const Spectrum& spec, const std::vector<Mat>& jumps, const TransitionCoeffs& tc,
                         bool dense = true);
Mat decay_matrix_frame(const Spectrum& spec, const std::vector<Mat>& jumps_frame, const TransitionCoeffs& tc);
Mat coherent_term(const Spectrum& spec, const Mat& jump, const Weight& w, const CoherentOptions& opt = {});

Generator assemble(const Spectrum& spec, const std::vector<Mat>& jumps, const Weight& w,
                   const AssembleOptions& opt = {});
Generator assemble(const Hamiltonian& H, const JumpSet& jumps, const Weight& w, const AssembleOptions& opt = {});

enum class Convention { heisenberg, schrodinger };
// || G - G^dag ||_F / max(1, ||G||_F), G = rho^{1/4} (.) rho^{1/4} similarity of L^dag (or L)
double detailed_balance_residual(const Generator& g, const GibbsState& gs, Convention c = Convention::heisenberg);
// || L[rho] ||_1
double fixed_point_residual(const Generator& g);
// max |Tr L[X]| over the given inputs
double trace_defect(const Generator& g, const std::vector<Mat>& inputs);

nlohmann::json serialize_generator(const Generator& g);

}  // namespace qmarkov
