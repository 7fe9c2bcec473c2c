#include "qmarkov/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numbers>

#include "qmarkov/oft.hpp"
#include "qmarkov/parallel.hpp"
#include "qmarkov/quadrature.hpp"

namespace qmarkov {

namespace {

constexpr double kPi = std::numbers::pi;

double log_add(double a, double b) {
  if (a == -INFINITY) return b;
  if (b == -INFINITY) return a;
  double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

// largest Bohr table kept in memory by the matrix-free action
constexpr long kMaxBohrTable = 8192;

struct Dissipator {
  int d = 0;
  std::vector<Mat> A;  // frame
  RMat alpha;          // on Bohr indices
  Eigen::MatrixXi idx;
  Mat K;  // R/2 + iB, frame

  // T[X]_{kl} = sum_a sum_{jm} alpha(nu_kj, nu_lm) A_kj X_jm conj(A_lm)
  Mat transition(const Mat& X) const {
    Mat out = Mat::Zero(d, d);
    for (const auto& a : A) {
      for (int l = 0; l < d; ++l)
        for (int k = 0; k < d; ++k) {
          cplx acc = 0.0;
          for (int j = 0; j < d; ++j) {
            const cplx akj = a(k, j);
            if (akj == 0.0) continue;
            const int r1 = idx(k, j);
            cplx inner = 0.0;
            for (int m = 0; m < d; ++m) inner += alpha(r1, idx(l, m)) * X(j, m) * std::conj(a(l, m));
            acc += akj * inner;
          }
          out(k, l) += acc;
        }
    }
    return out;
  }

  // T^dag[X]_{jm} = sum_a sum_{kl} alpha(nu_kj, nu_lm) conj(A_kj) X_kl A_lm
  Mat transition_adjoint(const Mat& X) const {
    Mat out = Mat::Zero(d, d);
    for (const auto& a : A)
      for (int m = 0; m < d; ++m)
        for (int j = 0; j < d; ++j) {
          cplx acc = 0.0;
          for (int k = 0; k < d; ++k) {
            const cplx akj = std::conj(a(k, j));
            if (akj == 0.0) continue;
            const int r1 = idx(k, j);
            cplx inner = 0.0;
            for (int l = 0; l < d; ++l) inner += alpha(r1, idx(l, m)) * X(k, l) * a(l, m);
            acc += akj * inner;
          }
          out(j, m) += acc;
        }
    return out;
  }
};

void check_jump_norms(const std::vector<Mat>& jumps, int d) {
  for (const auto& a : jumps) {
    if (a.rows() != d || a.cols() != d) throw InvalidSize("jump dimension does not match the spectrum");
    if (op_norm(a) > 1.0 + 1e-12) throw InvalidParameter("jump operator norm exceeds 1");
  }
}

Mat decay_from_alpha(const Spectrum& spec, const std::vector<Mat>& jf, const RMat& alpha) {
  const int d = spec.dim();
  Mat R = Mat::Zero(d, d);
  for (const auto& a : jf)
    for (int j = 0; j < d; ++j)
      for (int i = 0; i < d; ++i) {
        cplx acc = 0.0;
        for (int k = 0; k < d; ++k)
          acc += alpha(spec.bohr_index(k, i), spec.bohr_index(k, j)) * std::conj(a(k, i)) * a(k, j);
        R(i, j) += acc;
      }
  return 0.5 * (R + R.adjoint());
}

Mat coherent_bohr_frame(const Spectrum& spec, const Mat& R, double beta) {
  const int d = spec.dim();
  Mat B(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) B(i, j) = 0.5 * I1 * std::tanh(beta * (spec.E(i) - spec.E(j)) / 4.0) * R(i, j);
  return B;
}

Mat coherent_kernel_frame(const Spectrum& spec, const Mat& a, const Weight& w, const CoherentOptions& opt) {
  if (w.kind != WeightKind::metropolis || std::abs(w.sigma * w.beta - 1.0) > 1e-12)
    throw InvalidParameter("kernel route for B needs the Metropolis weight with sigma = 1/beta");
  const int d = spec.dim();
  const double beta = w.beta;
  std::map<double, cplx> cache;
  auto b2 = [&](double y) {
    auto it = cache.find(y);
    if (it != cache.end()) return it->second;
    cplx v = b2_hat(y, opt.quad_order);
    cache.emplace(y, v);
    return v;
  };
  const Mat AdA = a.adjoint() * a;
  Mat B(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) {
      const double x = beta * (spec.E(i) - spec.E(j));
      cplx acc = opt.c * AdA(i, j);
      for (int k = 0; k < d; ++k) {
        cplx prod = std::conj(a(k, i)) * a(k, j);
        if (prod == 0.0) continue;
        acc += b2(beta * (spec.E(i) - 2.0 * spec.E(k) + spec.E(j))) * prod;
      }
      B(i, j) = opt.kappa * b1_hat(x) * acc;
    }
  return 0.5 * (B + B.adjoint());
}

}  // namespace

double log_norm_cdf(double z) {
  if (z > -35.0) return std::log(0.5 * std::erfc(-z / std::numbers::sqrt2));
  const double z2 = z * z;
  const double series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2) + 105.0 / (z2 * z2 * z2 * z2);
  return -0.5 * z2 - std::log(-z) - 0.5 * std::log(2.0 * kPi) + std::log(series);
}

Weight Weight::metropolis(double beta, double sigma) {
  if (!(beta > 0.0) || !(sigma > 0.0)) throw InvalidParameter("Metropolis weight needs beta > 0 and sigma > 0");
  Weight w;
  w.kind = WeightKind::metropolis;
  w.beta = beta;
  w.sigma = sigma;
  return w;
}

Weight Weight::gaussian(double beta, double sigma, double omega_gamma) {
  if (!(beta > 0.0) || !(sigma > 0.0)) throw InvalidParameter("Gaussian weight needs beta > 0 and sigma > 0");
  const double var = 2.0 * omega_gamma / beta - sigma * sigma;
  if (!(var > 0.0)) throw InvalidParameter("Gaussian weight needs 2 omega_gamma / beta > sigma^2");
  Weight w;
  w.kind = WeightKind::gaussian;
  w.beta = beta;
  w.sigma = sigma;
  w.omega_gamma = omega_gamma;
  w.sigma_gamma = std::sqrt(var);
  return w;
}

double Weight::gamma(double omega) const {
  if (kind == WeightKind::metropolis) return std::exp(-beta * std::max(omega + beta * sigma * sigma / 2.0, 0.0));
  const double u = omega + omega_gamma;
  return std::exp(-u * u / (2.0 * sigma_gamma * sigma_gamma));
}

double Weight::log_mean(double nubar) const {
  const double s = sigma;
  if (kind == WeightKind::metropolis) {
    const double shift = beta * s * s / 2.0;
    const double t1 = log_norm_cdf(-(nubar + shift) / s);
    const double t2 = -beta * nubar + log_norm_cdf((nubar - shift) / s);
    return log_add(t1, t2);
  }
  const double v = sigma_gamma * sigma_gamma + s * s;
  const double u = nubar + omega_gamma;
  return 0.5 * std::log(sigma_gamma * sigma_gamma / v) - u * u / (2.0 * v);
}

double Weight::alpha(double nu1, double nu2) const {
  const double dn = nu1 - nu2;
  return std::exp(-dn * dn / (8.0 * sigma * sigma) + log_mean(0.5 * (nu1 + nu2)));
}

double Weight::h(double nu1, double nu2) const {
  const double dn = nu1 - nu2;
  return std::exp(-dn * dn / (8.0 * sigma * sigma) + log_mean(0.5 * (nu1 + nu2)) + beta * (nu1 + nu2) / 4.0);
}

double Weight::alpha_bar(double nu1, double nu2) const {
  return h(nu1, nu2) / (2.0 * std::cosh(beta * (nu1 - nu2) / 4.0));
}

std::string Weight::name() const { return kind == WeightKind::metropolis ? "metropolis" : "gaussian"; }

TransitionCoeffs transition_coefficients(const Spectrum& spec, const Weight& w) {
  TransitionCoeffs tc;
  tc.nu = spec.bohr;
  const long nb = static_cast<long>(tc.nu.size());
  if (nb > kMaxBohrTable) throw CapacityError("transition table limited to " + std::to_string(kMaxBohrTable) + " Bohr frequencies");
  tc.alpha.resize(nb, nb);
  parallel_for(nb, [&](long c) {
    for (long r = 0; r <= c; ++r) tc.alpha(r, c) = w.alpha(tc.nu[r], tc.nu[c]);
  });
  for (long c = 0; c < nb; ++c)
    for (long r = c + 1; r < nb; ++r) tc.alpha(r, c) = tc.alpha(c, r);
  return tc;
}

CoherentOptions::CoherentOptions() : kappa(1.0 / std::numbers::pi), c(1.0 / (2.0 * std::numbers::sqrt2)) {}

cplx b1_hat(double x) {
  return I1 * (kPi / std::numbers::sqrt2) * std::exp(-x * x / 8.0) * std::tanh(x / 4.0);
}

cplx b2_hat(double y, int order) {
  // PV int b2(t) e^{iyt} dt with the +-t nodes paired so the 1/t pole cancels
  auto g = [y](double t) { return std::exp(cplx(-2.0 * t * t, (y - 1.0) * t)) / cplx(2.0 * t, 1.0); };
  auto f = [&](double t) { return (g(t) - g(-t)) / t; };
  const double T = 6.5;  // e^{-2 T^2} below 1e-36
  const int panels = std::max(8, static_cast<int>(std::ceil(T * (std::abs(y - 1.0) + 4.0) / 3.0)));
  cplx v = integrate_panels(f, 0.0, T, panels, order);
  return v / (2.0 * std::numbers::sqrt2 * kPi);
}

Mat decay_matrix_frame(const Spectrum& spec, const std::vector<Mat>& jumps_frame, const TransitionCoeffs& tc) {
  return decay_from_alpha(spec, jumps_frame, tc.alpha);
}

SuperOp dissipative_part(const Spectrum& spec, const std::vector<Mat>& jumps, const TransitionCoeffs& tc, bool dense) {
  const int d = spec.dim();
  check_jump_norms(jumps, d);
  auto dis = std::make_shared<Dissipator>();
  dis->d = d;
  for (const auto& a : jumps) dis->A.push_back(spec.to_frame(a));
  dis->alpha = tc.alpha;
  dis->idx = spec.bohr_index;
  Mat R = decay_from_alpha(spec, dis->A, tc.alpha);
  dis->K = 0.5 * R;

  SuperOp L;
  L.dim = d;
  L.frame = spec.U;
  L.action = [dis](const Mat& X) -> Mat {
    return dis->transition(X) - dis->K * X - X * dis->K.adjoint();
  };
  L.adjoint = [dis](const Mat& X) -> Mat {
    return dis->transition_adjoint(X) - dis->K.adjoint() * X - X * dis->K;
  };
  if (dense) {
    if (d > 64) throw CapacityError("dense superoperators are limited to n <= 6");
    const long N = static_cast<long>(d) * d;
    Mat M = Mat::Zero(N, N);
    parallel_for(N, [&](long c) {
      const int j = static_cast<int>(c % d), m = static_cast<int>(c / d);
      for (const auto& a : dis->A)
        for (int l = 0; l < d; ++l) {
          const cplx alm = std::conj(a(l, m));
          if (alm == 0.0) continue;
          const int r2 = dis->idx(l, m);
          for (int k = 0; k < d; ++k) M(k + static_cast<long>(d) * l, c) += tc.alpha(dis->idx(k, j), r2) * a(k, j) * alm;
        }
      for (int k = 0; k < d; ++k) M(k + static_cast<long>(d) * m, c) -= dis->K(k, j);
      for (int l = 0; l < d; ++l) M(j + static_cast<long>(d) * l, c) -= std::conj(dis->K(l, m));
    });
    L.matrix = std::move(M);
  }
  return L;
}

Mat coherent_term(const Spectrum& spec, const Mat& jump, const Weight& w, const CoherentOptions& opt) {
  const Mat af = spec.to_frame(jump);
  Mat Bf;
  if (opt.method == CoherentMethod::kernel) {
    Bf = coherent_kernel_frame(spec, af, w, opt);
  } else {
    auto tc = transition_coefficients(spec, w);
    Bf = coherent_bohr_frame(spec, decay_from_alpha(spec, {af}, tc.alpha), w.beta);
  }
  return spec.from_frame(Bf);
}

Generator assemble(const Spectrum& spec, const std::vector<Mat>& jumps, const Weight& w, const AssembleOptions& opt) {
  const int d = spec.dim();
  check_jump_norms(jumps, d);
  if (opt.dense && d > 64) throw CapacityError("dense generator limited to n <= 6 (dim 64)");
  Generator g;
  g.dim = d;
  g.spec = spec;
  g.gs = gibbs(spec, w.beta);
  g.weight = w;
  for (const auto& a : jumps) g.jumps_frame.push_back(spec.to_frame(a));

  auto tc = transition_coefficients(spec, w);
  g.R_frame = decay_from_alpha(spec, g.jumps_frame, tc.alpha);
  if (opt.zero_coherent || jumps.empty()) {
    g.B_frame = Mat::Zero(d, d);
  } else if (opt.coherent.method == CoherentMethod::kernel) {
    g.B_frame = Mat::Zero(d, d);
    for (const auto& af : g.jumps_frame) g.B_frame += coherent_kernel_frame(spec, af, w, opt.coherent);
  } else {
    // B = sum_a B^a is linear in R, so one pass over the summed decay matrix suffices
    g.B_frame = coherent_bohr_frame(spec, g.R_frame, w.beta);
  }

  SuperOp D = dissipative_part(spec, jumps, tc, opt.dense);
  const Mat Bf = g.B_frame;
  g.L.dim = d;
  g.L.frame = spec.U;
  auto act = D.action;
  auto adj = D.adjoint;
  g.L.action = [act, Bf](const Mat& X) -> Mat { return act(X) - I1 * (Bf * X - X * Bf); };
  g.L.adjoint = [adj, Bf](const Mat& X) -> Mat { return adj(X) + I1 * (Bf * X - X * Bf); };
  if (D.matrix) {
    Mat M = std::move(*D.matrix);
    // -i[B, X]
    for (int m = 0; m < d; ++m)
      for (int j = 0; j < d; ++j) {
        const long c = j + static_cast<long>(d) * m;
        for (int k = 0; k < d; ++k) M(k + static_cast<long>(d) * m, c) -= I1 * Bf(k, j);
        for (int l = 0; l < d; ++l) M(j + static_cast<long>(d) * l, c) += I1 * Bf(m, l);
      }
    g.L.matrix = std::move(M);
  }
  // schrodinger symmetrizer: Gamma^{-1}, Gamma_(kl) = (p_k p_l)^{1/4}
  RVec s(static_cast<long>(d) * d);
  for (int l = 0; l < d; ++l)
    for (int k = 0; k < d; ++k) s(k + static_cast<long>(d) * l) = std::pow(g.gs.p(k) * g.gs.p(l), -0.25);
  g.L.sym = std::move(s);
  return g;
}

Generator assemble(const Hamiltonian& H, const JumpSet& jumps, const Weight& w, const AssembleOptions& opt) {
  if (opt.dense && H.n() > 6) throw CapacityError("dense generator limited to n <= 6");
  Spectrum spec = hermitian_eig(H.dense());
  return assemble(spec, jump_matrices(jumps, H.n()), w, opt);
}

double detailed_balance_residual(const Generator& g, const GibbsState& gs, Convention c) {
  if (!g.L.matrix) throw CapacityError("detailed_balance_residual needs the dense generator (n <= 6)");
  if (gs.dim() != g.dim) throw InvalidSize("Gibbs state does not match the generator");
  const Mat& M = *g.L.matrix;
  const int d = g.dim;
  const long N = static_cast<long>(d) * d;
  RVec gam(N);
  for (int l = 0; l < d; ++l)
    for (int k = 0; k < d; ++k) gam(k + static_cast<long>(d) * l) = std::pow(gs.p(k) * gs.p(l), 0.25);
  // entry (r, c) of Gamma Op Gamma^{-1}, Op = M^dag or M
  auto G = [&](long r, long col) -> cplx {
    cplx v = c == Convention::heisenberg ? std::conj(M(col, r)) : M(r, col);
    return v * gam(r) / gam(col);
  };
  double num = 0.0, den = 0.0;
  for (long col = 0; col < N; ++col)
    for (long r = 0; r < N; ++r) {
      cplx a = G(r, col);
      den += std::norm(a);
      if (r < col) num += 2.0 * std::norm(a - std::conj(G(col, r)));
      else if (r == col) num += std::norm(a - std::conj(a));
    }
  return std::sqrt(num) / std::max(1.0, std::sqrt(den));
}

double fixed_point_residual(const Generator& g) {
  Mat rf = g.gs.p.cast<cplx>().asDiagonal();
  return trace_norm(g.L.apply_frame(rf));
}

double trace_defect(const Generator& g, const std::vector<Mat>& inputs) {
  double worst = 0.0;
  for (const auto& X : inputs) worst = std::max(worst, std::abs(g.apply(X).trace()));
  return worst;
}

nlohmann::json serialize_generator(const Generator& g) {
  if (!g.L.matrix) throw CapacityError("generator serialization needs the dense form");
  const int d = g.dim;
  const long N = static_cast<long>(d) * d;
  // dissipative part: full matrix minus the coherent commutator, rotated to the computational basis
  Mat M = *g.L.matrix;
  for (int m = 0; m < d; ++m)
    for (int j = 0; j < d; ++j) {
      const long c = j + static_cast<long>(d) * m;
      for (int k = 0; k < d; ++k) M(k + static_cast<long>(d) * m, c) += I1 * g.B_frame(k, j);
      for (int l = 0; l < d; ++l) M(j + static_cast<long>(d) * l, c) -= I1 * g.B_frame(m, l);
    }
  const Mat W = kron(g.spec.U.conjugate(), g.spec.U);
  const Mat D = W * M * W.adjoint();
  const Mat B = g.B();
  nlohmann::json j;
  j["dim"] = d;
  j["weight"] = {{"kind", g.weight.name()},
                 {"beta", g.weight.beta},
                 {"sigma", g.weight.sigma},
                 {"omega_gamma", g.weight.omega_gamma},
                 {"sigma_gamma", g.weight.sigma_gamma}};
  auto dump = [](const Mat& X) {
    nlohmann::json e = nlohmann::json::array();
    for (long r = 0; r < X.rows(); ++r)
      for (long c = 0; c < X.cols(); ++c) e.push_back({X(r, c).real(), X(r, c).imag()});
    return e;
  };
  j["B"] = dump(B);
  j["D"] = dump(D);
  j["D_dim"] = N;
  return j;
}

}  // namespace qmarkov
