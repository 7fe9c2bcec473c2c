#include "qmarkov/dirichlet.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qmarkov/oft.hpp"
#include "qmarkov/parallel.hpp"
#include "qmarkov/quadrature.hpp"

namespace qmarkov {

namespace {

constexpr double kPi = std::numbers::pi;

struct Nodes {
  std::vector<double> x, w;
};

// composite GL nodes over consecutive breakpoints, each piece cut into panels of width <= width
Nodes panel_nodes(const std::vector<double>& breaks, double width, int order) {
  const auto& gl = gauss_legendre(order);
  Nodes out;
  for (size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double a = breaks[k], b = breaks[k + 1];
    if (!(b > a)) continue;
    const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / width - 1e-12)));
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
      const double mid = a + (p + 0.5) * h;
      for (size_t i = 0; i < gl.x.size(); ++i) {
        out.x.push_back(mid + 0.5 * h * gl.x[i]);
        out.w.push_back(0.5 * h * gl.w[i]);
      }
    }
  }
  return out;
}

// ||C||_rho^2 in the eigenframe, sq(i) = p_i^{1/2}
double kms_sq_frame(const Mat& C, const RVec& sq) {
  double acc = 0.0;
  for (long j = 0; j < C.cols(); ++j)
    for (long i = 0; i < C.rows(); ++i) acc += sq(i) * sq(j) * std::norm(C(i, j));
  return acc;
}

struct Grid {
  Nodes t, w;
};

Grid make_grid(const Spectrum& spec, const DirichletKernels& k, double refine) {
  const double beta = k.beta;
  const double normH = std::max(std::abs(spec.E(0)), std::abs(spec.E(spec.dim() - 1)));
  const double spread = spec.E(spec.dim() - 1) - spec.E(0);
  const double T = k.quad.T_max > 0.0 ? k.quad.T_max : 3.0 * beta;
  const double W = k.quad.Omega_max > 0.0 ? k.quad.Omega_max : 2.0 * normH + 20.0 * k.sigma;
  double tp = k.quad.t_panel;
  if (tp <= 0.0) {
    tp = beta;
    if (spread > 0.0) tp = std::min(tp, 2.0 * kPi / (2.0 * spread));
  }
  double wp = k.quad.w_panel > 0.0 ? k.quad.w_panel : std::min(3.0 * k.sigma, 8.0 / beta);
  Grid g;
  g.t = panel_nodes({-T, 0.0, T}, tp / refine, k.quad.order);
  // h has a kink at 0 for the Metropolis weight
  g.w = panel_nodes({-W, 0.0, W}, wp / refine, k.quad.order);
  return g;
}

struct Integrand {
  std::vector<Mat> A;  // frame jumps
  const Spectrum* spec = nullptr;
  RVec sq;
  Mat Xf;
  double sigma = 1.0;

  Mat oft_at(int a, double omega) const {
    const int d = spec->dim();
    Mat out(d, d);
    for (int j = 0; j < d; ++j)
      for (int i = 0; i < d; ++i) {
        const cplx v = A[a](i, j);
        out(i, j) = v == 0.0 ? cplx(0.0) : v * fhat(omega - spec->nu(i, j), sigma);
      }
    return out;
  }
  // e^{-iHt} X e^{iHt}; the KMS norm is blind to the conjugation, so moving t onto X is free
  Mat x_at(double t) const {
    const int d = spec->dim();
    Mat out(d, d);
    for (int j = 0; j < d; ++j)
      for (int i = 0; i < d; ++i) out(i, j) = Xf(i, j) * std::polar(1.0, -spec->nu(i, j) * t);
    return out;
  }
};

struct RawIntegral {
  double value = 0.0;
  double min_node = 0.0;
  long nodes = 0;
};

RawIntegral integrate_grid(const Integrand& f, const DirichletKernels& k, const Grid& g) {
  const long nt = static_cast<long>(g.t.x.size()), nw = static_cast<long>(g.w.x.size());
  const int na = static_cast<int>(f.A.size());
  std::vector<Mat> ofts;
  ofts.reserve(static_cast<size_t>(na) * nw);
  std::vector<double> hv(nw), hw(nw);
  for (long i = 0; i < nw; ++i) {
    hv[i] = k.h(g.w.x[i]);
    hw[i] = hv[i] * g.w.w[i];
  }
  for (int a = 0; a < na; ++a)
    for (long i = 0; i < nw; ++i) ofts.push_back(f.oft_at(a, g.w.x[i]));
  std::vector<double> row(nt, 0.0), row_min(nt, 0.0);
  parallel_for(nt, [&](long it) {
    const double t = g.t.x[it];
    const double gt = k.g(t);
    Mat Xt = f.x_at(t);
    Mat C(Xt.rows(), Xt.cols());
    double acc = 0.0, mn = INFINITY;
    for (int a = 0; a < na; ++a)
      for (long i = 0; i < nw; ++i) {
        const Mat& Aw = ofts[static_cast<size_t>(a) * nw + i];
        C.noalias() = Aw * Xt;
        C.noalias() -= Xt * Aw;
        const double sq = kms_sq_frame(C, f.sq);
        mn = std::min(mn, gt * hv[i] * sq);
        acc += hw[i] * sq;
      }
    acc *= gt * g.t.w[it];
    row[it] = acc;
    row_min[it] = mn;
  });
  RawIntegral r;
  r.min_node = INFINITY;
  for (long it = 0; it < nt; ++it) {
    r.value += row[it];
    r.min_node = std::min(r.min_node, row_min[it]);
  }
  if (nt == 0 || nw == 0 || na == 0) r.min_node = 0.0;
  r.nodes = nt * nw * na;
  return r;
}

Integrand make_integrand(const Spectrum& spec, const GibbsState& gs, const std::vector<Mat>& jumps,
                         const DirichletKernels& k, const Mat& X) {
  Integrand f;
  f.spec = &spec;
  for (const auto& a : jumps) f.A.push_back(spec.to_frame(a));
  f.sq = gs.p.cwiseSqrt();
  f.Xf = spec.to_frame(X);
  f.sigma = k.sigma;
  return f;
}

}  // namespace

double dirichlet_direct(const Generator& g, const GibbsState& gs, const Mat& X) {
  if (X.rows() != g.dim || X.cols() != g.dim) throw InvalidSize("dirichlet_direct: dimension mismatch");
  return -kms_inner(gs, X, g.heisenberg(X)).real();
}

cplx dirichlet_bilinear(const Spectrum& spec, const GibbsState& gs, const std::vector<Mat>& jumps,
                        const TransitionCoeffs& tc, const Mat& X, const Mat& Y) {
  const int d = spec.dim();
  if (X.rows() != d || Y.rows() != d) throw InvalidSize("dirichlet_bilinear: dimension mismatch");
  const double beta = gs.beta;
  const Mat Xf = spec.to_frame(X), Yf = spec.to_frame(Y);
  // sqrt of the KMS weight (p_i p_j)^{1/4} on entry (i,j)
  RMat wt(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) wt(i, j) = std::pow(gs.p(i) * gs.p(j), 0.25);
  cplx total = 0.0;
  for (const auto& a : jumps) {
    BohrDecomp bd = bohr_decompose(spec, a);
    std::vector<int> act = bd.active();
    const long m = static_cast<long>(act.size());
    Mat VX(static_cast<long>(d) * d, m), VY(static_cast<long>(d) * d, m);
    for (long c = 0; c < m; ++c) {
      Mat An = bd.component_frame(act[c]);
      Mat CX = An * Xf - Xf * An, CY = An * Yf - Yf * An;
      for (int j = 0; j < d; ++j)
        for (int i = 0; i < d; ++i) {
          VX(i + static_cast<long>(d) * j, c) = CX(i, j) * wt(i, j);
          VY(i + static_cast<long>(d) * j, c) = CY(i, j) * wt(i, j);
        }
    }
    Mat G = VX.adjoint() * VY;
    for (long c2 = 0; c2 < m; ++c2)
      for (long c1 = 0; c1 < m; ++c1) {
        const double al = tc.alpha(act[c1], act[c2]);
        if (al == 0.0) continue;
        const double n1 = tc.nu[act[c1]], n2 = tc.nu[act[c2]];
        const double abar = std::exp(std::log(al) + beta * (n1 + n2) / 4.0) / (2.0 * std::cosh(beta * (n1 - n2) / 4.0));
        total += abar * G(c1, c2);
      }
  }
  return total;
}

DirichletKernels::DirichletKernels(const Weight& w, QuadSpec q)
    : kind(w.kind), beta(w.beta), sigma(w.sigma), omega_gamma(w.omega_gamma), sigma_gamma(w.sigma_gamma), quad(q) {}

double DirichletKernels::g(double t) const { return 1.0 / (beta * std::cosh(2.0 * kPi * t / beta)); }

double DirichletKernels::h_metropolis(double omega) const {
  return std::exp(-sigma * sigma * beta * beta / 8.0 - std::abs(omega) * beta / 2.0);
}

double DirichletKernels::h_gaussian(double omega) const {
  return std::exp(-beta * omega_gamma / 4.0 - omega * omega / (2.0 * sigma_gamma * sigma_gamma));
}

double DirichletKernels::h(double omega) const {
  return kind == WeightKind::metropolis ? h_metropolis(omega) : h_gaussian(omega);
}

CommutatorIntegral dirichlet_commutator_integral(const Spectrum& spec, const GibbsState& gs,
                                                 const std::vector<Mat>& jumps, const DirichletKernels& k,
                                                 const Mat& X) {
  if (X.rows() != spec.dim()) throw InvalidSize("dirichlet_commutator_integral: dimension mismatch");
  const Integrand f = make_integrand(spec, gs, jumps, k, X);
  RawIntegral coarse = integrate_grid(f, k, make_grid(spec, k, 1.0));
  RawIntegral fine = integrate_grid(f, k, make_grid(spec, k, 2.0));
  CommutatorIntegral out;
  out.value = fine.value;
  out.nodes = coarse.nodes + fine.nodes;
  out.min_node = std::min(coarse.min_node, fine.min_node);
  const double diff = std::abs(fine.value - coarse.value);
  out.error_estimate = fine.value != 0.0 ? diff / std::abs(fine.value) : diff;
  if (out.error_estimate > 1e-6) {
    out.converged = false;
    out.warning = "quadrature not converged: doubling changed the value by " + std::to_string(out.error_estimate);
  }
  return out;
}

double max_commutator_node(const Spectrum& spec, const GibbsState& gs, const std::vector<Mat>& jumps,
                           const DirichletKernels& k, const Mat& X, int grid) {
  const Integrand f = make_integrand(spec, gs, jumps, k, X);
  const double normH = std::max(std::abs(spec.E(0)), std::abs(spec.E(spec.dim() - 1)));
  const double T = k.quad.T_max > 0.0 ? k.quad.T_max : 3.0 * k.beta;
  const double W = k.quad.Omega_max > 0.0 ? k.quad.Omega_max : 2.0 * normH + 20.0 * k.sigma;
  double worst = 0.0;
  for (int it = 0; it < grid; ++it) {
    const double t = -T + 2.0 * T * it / (grid - 1);
    Mat Xt = f.x_at(t);
    for (int a = 0; a < static_cast<int>(f.A.size()); ++a)
      for (int iw = 0; iw < grid; ++iw) {
        Mat Aw = f.oft_at(a, -W + 2.0 * W * iw / (grid - 1));
        Mat C = Aw * Xt - Xt * Aw;
        worst = std::max(worst, std::sqrt(kms_sq_frame(C, f.sq)));
      }
  }
  return worst;
}

double metropolis_h_integral(double omega, double beta, double sigma) {
  // u = sigma_gamma(x) turns g_x dx into beta/sqrt(2 pi) du
  const double w2 = omega * omega;
  auto f = [&](double u) {
    if (u <= 0.0) return w2 == 0.0 ? 1.0 : 0.0;
    return std::exp(-beta * beta * u * u / 8.0 - w2 / (2.0 * u * u));
  };
  const double us = std::sqrt(2.0 * std::abs(omega) / beta);
  const double U = us + 20.0 / beta;
  std::vector<double> br = {0.0};
  if (us > 0.0) {
    br.push_back(us / 4.0);
    br.push_back(us / 2.0);
    br.push_back(us);
  }
  br.push_back(U);
  const double v = integrate_breaks(f, br, 12, 20);
  return beta / std::sqrt(2.0 * kPi) * std::exp(-beta * beta * sigma * sigma / 8.0) * v;
}

double sech_transform(double delta, double beta) {
  auto f = [&](double t) { return std::cos(delta * t) / (beta * std::cosh(2.0 * kPi * t / beta)); };
  const double T = 8.0 * beta;
  double width = beta / 4.0;
  if (delta != 0.0) width = std::min(width, kPi / std::abs(delta));
  const int panels = static_cast<int>(std::ceil(T / width));
  // even integrand
  return 2.0 * integrate_panels(f, 0.0, T, panels, 20);
}

KernelIdentityReport metropolis_kernel_identity() {
  KernelIdentityReport r;
  const double betas[] = {0.2, 0.5, 1.0, 2.0, 4.0};
  for (double beta : betas) {
    const double sigma = 1.0 / beta;
    for (int i = 0; i < 20; ++i) {
      const double omega = (-6.0 + 12.0 * i / 19.0) / beta;
      const double closed = std::exp(-sigma * sigma * beta * beta / 8.0 - std::abs(omega) * beta / 2.0);
      const double num = metropolis_h_integral(omega, beta, sigma);
      r.max_rel_h = std::max(r.max_rel_h, std::abs(num - closed) / closed);
      ++r.points;
    }
    for (int i = 0; i < 21; ++i) {
      const double delta = (-10.0 + i) / beta;
      const double closed = 1.0 / (2.0 * std::cosh(beta * delta / 4.0));
      r.max_abs_cosh = std::max(r.max_abs_cosh, std::abs(sech_transform(delta, beta) - closed));
    }
  }
  r.g_integral = sech_transform(0.0, 1.0);
  r.pass = r.max_rel_h <= 1e-8 && r.max_abs_cosh <= 1e-10 && std::abs(r.g_integral - 0.5) <= 1e-10;
  return r;
}

}  // namespace qmarkov
