#include "qmarkov/oft.hpp"

#include <cmath>
#include <numbers>

namespace qmarkov {

OftParams::OftParams(double s, std::optional<double> cut) : sigma(s), Omega(cut) {
  if (!(s > 0.0)) throw InvalidParameter("OftParams needs sigma > 0");
}

double log_fhat(double omega, double sigma) {
  return -0.5 * std::log(sigma * std::sqrt(2.0 * std::numbers::pi)) - omega * omega / (4.0 * sigma * sigma);
}

double fhat(double omega, double sigma) { return std::exp(log_fhat(omega, sigma)); }

Mat BohrDecomp::component_frame(int k) const {
  Mat out = Mat::Zero(dim(), dim());
  for (int j = 0; j < dim(); ++j)
    for (int i = 0; i < dim(); ++i)
      if (index(i, j) == k) out(i, j) = A_frame(i, j);
  return out;
}

Mat BohrDecomp::component(int k) const { return U * component_frame(k) * U.adjoint(); }

std::vector<int> BohrDecomp::active(double tol) const {
  std::vector<char> hit(nu_list.size(), 0);
  for (int j = 0; j < dim(); ++j)
    for (int i = 0; i < dim(); ++i)
      if (std::abs(A_frame(i, j)) > tol) hit[index(i, j)] = 1;
  std::vector<int> out;
  for (size_t k = 0; k < hit.size(); ++k)
    if (hit[k]) out.push_back(static_cast<int>(k));
  return out;
}

BohrDecomp bohr_decompose(const Spectrum& spec, const Mat& A) {
  if (A.rows() != spec.dim() || A.cols() != spec.dim()) throw InvalidSize("bohr_decompose: dimension mismatch");
  BohrDecomp bd;
  bd.nu_list = spec.bohr;
  bd.A_frame = spec.to_frame(A);
  bd.index = spec.bohr_index;
  bd.E = spec.E;
  bd.U = spec.U;
  return bd;
}

Mat oft_heisenberg_frame(const BohrDecomp& bd, double omega, double t, const OftParams& p) {
  const int d = bd.dim();
  Mat out(d, d);
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k) {
      const double nu = bd.nu_list[bd.index(k, j)];
      if (p.Omega && std::abs(omega - nu) > *p.Omega) {
        out(k, j) = 0.0;
        continue;
      }
      cplx ph = t == 0.0 ? cplx(1.0) : std::polar(1.0, nu * t);
      out(k, j) = bd.A_frame(k, j) * ph * fhat(omega - nu, p.sigma);
    }
  return out;
}

Mat oft_frame(const BohrDecomp& bd, double omega, const OftParams& p) {
  return oft_heisenberg_frame(bd, omega, 0.0, p);
}

Mat oft(const BohrDecomp& bd, double omega, const OftParams& p) { return bd.U * oft_frame(bd, omega, p) * bd.U.adjoint(); }

Mat oft_heisenberg(const BohrDecomp& bd, double omega, double t, const OftParams& p) {
  return bd.U * oft_heisenberg_frame(bd, omega, t, p) * bd.U.adjoint();
}

Mat oft_reconstruct(const BohrDecomp& bd, const OftParams& p) {
  // int fhat = (sigma sqrt(2pi))^{-1/2} * sqrt(4 pi sigma^2)
  const double s = p.sigma;
  const double int_f = std::pow(s * std::sqrt(2.0 * std::numbers::pi), -0.5) * 2.0 * s * std::sqrt(std::numbers::pi);
  const double pref = std::pow(2.0 * s * std::sqrt(2.0 * std::numbers::pi), -0.5);
  Mat acc = Mat::Zero(bd.dim(), bd.dim());
  for (int k : bd.active()) acc += pref * int_f * bd.component_frame(k);
  return bd.U * acc * bd.U.adjoint();
}

ConjugationPair conjugate_imaginary(const Spectrum& spec, const BohrDecomp& bd, double omega, double beta,
                                    const OftParams& p) {
  (void)spec;
  const double s = p.sigma;
  const double expo = beta * omega + s * s * beta * beta;
  ConjugationPair cp;
  cp.log_scale = expo > 700.0 ? expo : 0.0;
  const int d = bd.dim();
  Mat lhs(d, d), rhs(d, d);
  const double shifted = omega + 2.0 * s * s * beta;
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k) {
      const double nu = bd.nu_list[bd.index(k, j)];
      // explicit conjugation uses the eigenvalue gap directly
      const double gap = bd.E(k) - bd.E(j);
      lhs(k, j) = bd.A_frame(k, j) * std::exp(beta * gap + log_fhat(omega - nu, s) - cp.log_scale);
      rhs(k, j) = bd.A_frame(k, j) * std::exp(expo - cp.log_scale + log_fhat(shifted - nu, s));
    }
  cp.lhs = bd.U * lhs * bd.U.adjoint();
  cp.rhs = bd.U * rhs * bd.U.adjoint();
  return cp;
}

double conjugation_norm(const Spectrum& spec, const Mat& A, double beta) {
  Mat Af = spec.to_frame(A);
  const int d = spec.dim();
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k) Af(k, j) *= std::exp(beta * (spec.E(k) - spec.E(j)));
  return op_norm(Af);
}

double norm_decay_bound(const Spectrum& spec, const Mat& A, double omega, double beta, const OftParams& p) {
  const double s = p.sigma;
  return std::exp(-beta * omega + s * s * beta * beta) * std::pow(s * std::sqrt(2.0 * std::numbers::pi), -0.5) *
         conjugation_norm(spec, A, beta);
}

}  // namespace qmarkov
