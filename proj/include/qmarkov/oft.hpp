#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "qmarkov/linalg.hpp"

namespace qmarkov {

struct OftParams {
  double sigma = 1.0;
  // drop Bohr terms with |omega - nu| > Omega when set
  std::optional<double> Omega;

  explicit OftParams(double s, std::optional<double> cut = std::nullopt);
};

// Gaussian window (sigma sqrt(2 pi))^{-1/2} exp(-w^2 / 4 sigma^2)
double fhat(double omega, double sigma);
double log_fhat(double omega, double sigma);

struct BohrDecomp {
  std::vector<double> nu_list;  // the spectrum's deduplicated Bohr list
  Mat A_frame;                  // U^dag A U
  Eigen::MatrixXi index;        // (k,j) -> index into nu_list
  RVec E;
  Mat U;

  int dim() const { return static_cast<int>(A_frame.rows()); }
  // A_nu for nu = nu_list[k], global basis
  Mat component(int k) const;
  Mat component_frame(int k) const;
  // indices of nu_list with a nonzero component
  std::vector<int> active(double tol = 0.0) const;
};

BohrDecomp bohr_decompose(const Spectrum& spec, const Mat& A);

Mat oft(const BohrDecomp& bd, double omega, const OftParams& p);
Mat oft_frame(const BohrDecomp& bd, double omega, const OftParams& p);
Mat oft_heisenberg(const BohrDecomp& bd, double omega, double t, const OftParams& p);
Mat oft_heisenberg_frame(const BohrDecomp& bd, double omega, double t, const OftParams& p);

// (2 sigma sqrt(2 pi))^{-1/2} int A^(w) dw with each Bohr term integrated in closed form
Mat oft_reconstruct(const BohrDecomp& bd, const OftParams& p);

struct ConjugationPair {
  Mat lhs;  // e^{bH} A^(w) e^{-bH}, by explicit conjugation
  Mat rhs;  // e^{bw + s^2 b^2} A^(w + 2 s^2 b)
  double log_scale = 0.0;  // both sides carry a factor e^{-log_scale}
};
ConjugationPair conjugate_imaginary(const Spectrum& spec, const BohrDecomp& bd, double omega, double beta,
                                    const OftParams& p);

// ||e^{bH} A e^{-bH}||, exact
double conjugation_norm(const Spectrum& spec, const Mat& A, double beta);

// right-hand side of the large-energy norm decay estimate
double norm_decay_bound(const Spectrum& spec, const Mat& A, double omega, double beta, const OftParams& p);

}  // namespace qmarkov
