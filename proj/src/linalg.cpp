#include "qmarkov/linalg.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qmarkov {

// full-register index pieces for the sites in `sites` (most significant first)
std::vector<long> site_offsets(const std::vector<int>& sites, int n) {
  const int k = static_cast<int>(sites.size());
  std::vector<long> off(1L << k, 0);
  for (long a = 0; a < (1L << k); ++a) {
    long v = 0;
    for (int q = 0; q < k; ++q)
      if ((a >> (k - 1 - q)) & 1L) v |= 1L << (n - 1 - sites[q]);
    off[a] = v;
  }
  return off;
}

namespace {

void check_region(const Region& A, int n) {
  for (int s : A.sites)
    if (s < 0 || s >= n) throw InvalidRegion("site " + std::to_string(s) + " outside [0," + std::to_string(n) + ")");
}

long find_root(std::vector<long>& parent, long x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

}  // namespace

Spectrum hermitian_eig(const Mat& M) {
  if (M.rows() != M.cols()) throw InvalidSize("hermitian_eig needs a square matrix");
  if (hermiticity_defect(M) > 1e-10) throw NumericDomain("hermitian_eig: input is not Hermitian");
  const int d = static_cast<int>(M.rows());
  Eigen::SelfAdjointEigenSolver<Mat> es(M);
  if (es.info() != Eigen::Success) throw NumericDomain("hermitian_eig: eigensolver failed");
  Spectrum s;
  s.E = es.eigenvalues();
  s.U = es.eigenvectors();
  const double normM = std::max(std::abs(s.E(0)), std::abs(s.E(d - 1)));
  s.dedup_tol = 1e-9 * std::max(1.0, normM);

  // snap clusters so degenerate Bohr frequencies coincide exactly
  for (int i = 0; i < d;) {
    int j = i + 1;
    while (j < d && s.E(j) - s.E(j - 1) <= s.dedup_tol) ++j;
    if (j - i > 1) {
      double mean = s.E.segment(i, j - i).mean();
      s.E.segment(i, j - i).setConstant(mean);
    }
    i = j;
  }

  std::vector<double> diffs;
  diffs.reserve(static_cast<size_t>(d) * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) diffs.push_back(s.E(i) - s.E(j));
  std::sort(diffs.begin(), diffs.end());
  diffs.erase(std::unique(diffs.begin(), diffs.end()), diffs.end());
  // cluster by gap; representative is the cluster midpoint, which keeps the list sign-symmetric
  std::vector<double> lo, hi;
  for (size_t i = 0; i < diffs.size();) {
    size_t j = i + 1;
    while (j < diffs.size() && diffs[j] - diffs[j - 1] <= s.dedup_tol) ++j;
    lo.push_back(diffs[i]);
    hi.push_back(diffs[j - 1]);
    s.bohr.push_back(0.5 * (diffs[i] + diffs[j - 1]));
    i = j;
  }
  s.bohr_index.resize(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double v = s.E(i) - s.E(j);
      auto it = std::upper_bound(lo.begin(), lo.end(), v);
      s.bohr_index(i, j) = static_cast<int>(it - lo.begin()) - 1;
    }
  return s;
}

GibbsState gibbs(const Spectrum& spec, double beta) {
  if (!(beta > 0.0)) throw InvalidParameter("gibbs needs beta > 0");
  GibbsState g;
  g.beta = beta;
  g.U = spec.U;
  const int d = spec.dim();
  const double e0 = spec.E.minCoeff();
  RVec w(d);
  for (int i = 0; i < d; ++i) w(i) = std::exp(-beta * (spec.E(i) - e0));
  const double z = w.sum();
  g.logZ = std::log(z) - beta * e0;
  g.p = w / z;
  for (int i = 0; i < d; ++i)
    if (g.p(i) < 1e-300) {
      g.p(i) = 1e-300;
      g.floored = true;
    }
  auto conj_diag = [&](const RVec& v) -> Mat { return spec.U * v.cast<cplx>().asDiagonal() * spec.U.adjoint(); };
  g.rho = conj_diag(g.p);
  g.rho_q = conj_diag(g.p.array().pow(0.25).matrix());
  g.rho_mq = conj_diag(g.p.array().pow(-0.25).matrix());
  g.rho_h = conj_diag(g.p.array().sqrt().matrix());
  g.rho_mh = conj_diag(g.p.array().sqrt().inverse().matrix());
  return g;
}

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (long i = 0; i < a.rows(); ++i)
    for (long j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Mat partial_trace(const Mat& rho, const Region& A, int n) {
  check_region(A, n);
  if (rho.rows() != (1L << n) || rho.cols() != (1L << n)) throw InvalidSize("partial_trace: dimension mismatch");
  const Region B = complement(A, n);
  const auto offA = site_offsets(A.sites, n);
  const auto offB = site_offsets(B.sites, n);
  const long dB = static_cast<long>(offB.size());
  Mat out = Mat::Zero(dB, dB);
  for (long j = 0; j < dB; ++j)
    for (long i = 0; i < dB; ++i) {
      cplx acc = 0.0;
      for (long a : offA) acc += rho(a | offB[i], a | offB[j]);
      out(i, j) = acc;
    }
  return out;
}

Mat embed(const Mat& op, const std::vector<int>& support, int n) {
  const Region S(support);
  if (S.size() != static_cast<int>(support.size()) || !std::equal(S.sites.begin(), S.sites.end(), support.begin()))
    throw InvalidRegion("embed: support must be sorted and unique");
  check_region(S, n);
  if (op.rows() != (1L << S.size())) throw InvalidSize("embed: operator dimension mismatch");
  const auto offS = site_offsets(S.sites, n);
  const auto offR = site_offsets(complement(S, n).sites, n);
  const long dim = 1L << n;
  Mat out = Mat::Zero(dim, dim);
  for (long r : offR)
    for (size_t b = 0; b < offS.size(); ++b)
      for (size_t a = 0; a < offS.size(); ++a) out(offS[a] | r, offS[b] | r) = op(a, b);
  return out;
}

Mat replace_with_maximally_mixed(const Mat& rho, const Region& A, int n) {
  if (A.empty()) return rho;
  const Mat pt = partial_trace(rho, A, n);
  const auto offA = site_offsets(A.sites, n);
  const auto offB = site_offsets(complement(A, n).sites, n);
  const double scale = 1.0 / static_cast<double>(offA.size());
  Mat out = Mat::Zero(rho.rows(), rho.cols());
  for (long a : offA)
    for (size_t j = 0; j < offB.size(); ++j)
      for (size_t i = 0; i < offB.size(); ++i) out(a | offB[i], a | offB[j]) = scale * pt(i, j);
  return out;
}

cplx kms_inner(const GibbsState& g, const Mat& X, const Mat& Y) {
  if (X.rows() != g.rho.rows() || Y.rows() != g.rho.rows()) throw InvalidSize("kms_inner: dimension mismatch");
  return (X.adjoint() * g.rho_h * Y * g.rho_h).trace();
}

double kms_norm(const GibbsState& g, const Mat& X) {
  return std::sqrt(std::max(0.0, kms_inner(g, X, X).real()));
}

double op_norm(const Mat& M) {
  if (M.size() == 0) return 0.0;
  if (M.rows() == M.cols() && hermiticity_defect(M) == 0.0) {
    Eigen::SelfAdjointEigenSolver<Mat> es(M, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  Eigen::BDCSVD<Mat> svd(M);
  return svd.singularValues()(0);
}

double trace_norm(const Mat& M) {
  if (M.size() == 0) return 0.0;
  if (M.rows() == M.cols() && hermiticity_defect(M) <= 1e-14 * std::max(1.0, max_abs(M))) {
    Mat h = 0.5 * (M + M.adjoint());
    Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
  }
  Eigen::BDCSVD<Mat> svd(M);
  return svd.singularValues().sum();
}

double trace_distance(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw InvalidSize("trace_distance: dimension mismatch");
  return trace_norm(a - b);
}

double fro_norm(const Mat& M) { return M.norm(); }

double max_abs(const Mat& M) { return M.size() ? M.cwiseAbs().maxCoeff() : 0.0; }

double hermiticity_defect(const Mat& M) {
  if (M.rows() != M.cols()) return std::numeric_limits<double>::infinity();
  double d = 0.0;
  for (long j = 0; j < M.cols(); ++j)
    for (long i = 0; i <= j; ++i) d = std::max(d, std::abs(M(i, j) - std::conj(M(j, i))));
  return d;
}

Vec vec(const Mat& X) { return Eigen::Map<const Vec>(X.data(), X.size()); }

Mat unvec(const Vec& v, int dim) { return Eigen::Map<const Mat>(v.data(), dim, dim); }

Mat random_complex(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Mat G(rows, cols);
  // fill in a fixed order so results do not depend on Eigen's evaluation order
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) {
      double re = nd(rng);
      double im = nd(rng);
      G(i, j) = cplx(re, im) / std::sqrt(2.0);
    }
  return G;
}

Mat random_hermitian(std::mt19937_64& rng, int dim) {
  Mat G = random_complex(rng, dim, dim);
  return 0.5 * (G + G.adjoint());
}

Mat random_density(std::mt19937_64& rng, int dim) {
  Mat G = random_complex(rng, dim, dim);
  Mat r = G * G.adjoint();
  r /= r.trace().real();
  return 0.5 * (r + r.adjoint());
}

Mat random_contraction(std::mt19937_64& rng, int dim) {
  Mat G = random_complex(rng, dim, dim);
  return G / op_norm(G);
}

Mat random_unitary(std::mt19937_64& rng, int dim) {
  Mat G = random_complex(rng, dim, dim);
  Eigen::HouseholderQR<Mat> qr(G);
  Mat Q = qr.householderQ();
  Mat R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < dim; ++i) {
    cplx ph = R(i, i) / std::abs(R(i, i));
    Q.col(i) *= ph;
  }
  return Q;
}

Backend parse_backend(const std::string& s) {
  if (s == "spectral") return Backend::spectral;
  if (s == "ode") return Backend::ode;
  throw InvalidParameter("unknown backend '" + s + "'");
}

Mat SuperOp::to_frame(const Mat& X) const { return frame.size() ? Mat(frame.adjoint() * X * frame) : X; }

Mat SuperOp::from_frame(const Mat& Xf) const { return frame.size() ? Mat(frame * Xf * frame.adjoint()) : Xf; }

Mat SuperOp::apply_frame(const Mat& Xf) const {
  if (matrix) return unvec(*matrix * vec(Xf), dim);
  if (action) return action(Xf);
  throw Error("SuperOp has neither a matrix nor an action");
}

Mat SuperOp::apply_adjoint_frame(const Mat& Xf) const {
  if (matrix) return unvec(matrix->adjoint() * vec(Xf), dim);
  if (adjoint) return adjoint(Xf);
  throw Error("SuperOp has no adjoint action");
}

Mat SuperOp::apply(const Mat& X) const { return from_frame(apply_frame(to_frame(X))); }

Mat SuperOp::apply_adjoint(const Mat& X) const { return from_frame(apply_adjoint_frame(to_frame(X))); }

SuperOp SuperOp::zero(int dim) {
  SuperOp L;
  L.dim = dim;
  L.matrix = Mat::Zero(L.dim2(), L.dim2());
  L.action = [dim](const Mat&) -> Mat { return Mat::Zero(dim, dim); };
  L.adjoint = L.action;
  L.sym = RVec::Ones(L.dim2());
  return L;
}

SuperOp SuperOp::identity(int dim) {
  SuperOp L;
  L.dim = dim;
  L.matrix = Mat::Identity(L.dim2(), L.dim2());
  L.action = [](const Mat& X) -> Mat { return X; };
  L.adjoint = L.action;
  L.sym = RVec::Ones(L.dim2());
  return L;
}

SpectralForm::SpectralForm(const SuperOp& L, double block_tol) {
  if (!L.matrix || !L.sym) throw Error("spectral backend needs a dense generator with a symmetrizer");
  dim_ = L.dim;
  frame_ = L.frame;
  w_ = *L.sym;
  const long N = L.dim2();
  Mat G = *L.matrix;
  for (long c = 0; c < N; ++c)
    for (long r = 0; r < N; ++r) G(r, c) *= w_(r) / w_(c);
  double num = 0.0;
  for (long c = 0; c < N; ++c)
    for (long r = 0; r < c; ++r) {
      cplx a = G(r, c), b = G(c, r);
      num += 2.0 * std::norm(a - std::conj(b));
      cplx m = 0.5 * (a + std::conj(b));
      G(r, c) = m;
      G(c, r) = std::conj(m);
    }
  for (long c = 0; c < N; ++c) {
    num += 4.0 * G(c, c).imag() * G(c, c).imag();
    G(c, c) = G(c, c).real();
  }
  const double gn = G.norm();
  asym_ = std::sqrt(num) / std::max(1.0, gn);

  const double thr = block_tol * std::max(max_abs(G), 1e-300);
  std::vector<long> parent(N);
  std::iota(parent.begin(), parent.end(), 0L);
  for (long c = 0; c < N; ++c)
    for (long r = 0; r < c; ++r)
      if (std::abs(G(r, c)) > thr) {
        long a = find_root(parent, r), b = find_root(parent, c);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
  std::vector<std::vector<long>> comps;
  std::vector<long> comp_of(N, -1);
  for (long i = 0; i < N; ++i) {
    long r = find_root(parent, i);
    if (comp_of[r] < 0) {
      comp_of[r] = static_cast<long>(comps.size());
      comps.emplace_back();
    }
    comps[comp_of[r]].push_back(i);
  }
  evals_.resize(N);
  long off = 0;
  for (auto& idx : comps) {
    const long m = static_cast<long>(idx.size());
    Mat sub(m, m);
    for (long c = 0; c < m; ++c)
      for (long r = 0; r < m; ++r) sub(r, c) = G(idx[r], idx[c]);
    Block b;
    b.idx = std::move(idx);
    b.offset = off;
    if (m == 1) {
      b.V = Mat::Ones(1, 1);
      b.lambda = RVec::Constant(1, sub(0, 0).real());
    } else if (sub.imag().cwiseAbs().maxCoeff() <= 1e-15 * std::max(max_abs(sub), 1.0)) {
      // real symmetric blocks (real H, Pauli jumps) are ~4x cheaper
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sub.real());
      if (es.info() != Eigen::Success) throw NumericDomain("SpectralForm: eigensolver failed");
      b.V = es.eigenvectors().cast<cplx>();
      b.lambda = es.eigenvalues();
    } else {
      Eigen::SelfAdjointEigenSolver<Mat> es(sub);
      if (es.info() != Eigen::Success) throw NumericDomain("SpectralForm: eigensolver failed");
      b.V = es.eigenvectors();
      b.lambda = es.eigenvalues();
    }
    evals_.segment(off, m) = b.lambda;
    off += m;
    blocks_.push_back(std::move(b));
  }
}

Vec SpectralForm::to_sym(const Mat& Xf, bool heisenberg) const {
  Vec x = vec(Xf);
  return heisenberg ? Vec(x.array() / w_.cast<cplx>().array()) : Vec(x.array() * w_.cast<cplx>().array());
}

Mat SpectralForm::from_sym(const Vec& y, bool heisenberg) const {
  Vec x = heisenberg ? Vec(y.array() * w_.cast<cplx>().array()) : Vec(y.array() / w_.cast<cplx>().array());
  return unvec(x, dim_);
}

Vec SpectralForm::modes(const Vec& y) const {
  Vec c(y.size());
  for (const auto& b : blocks_) {
    const long m = static_cast<long>(b.idx.size());
    Vec yb(m);
    for (long i = 0; i < m; ++i) yb(i) = y(b.idx[i]);
    c.segment(b.offset, m) = b.V.adjoint() * yb;
  }
  return c;
}

Vec SpectralForm::unmodes(const Vec& c) const {
  Vec y(c.size());
  for (const auto& b : blocks_) {
    const long m = static_cast<long>(b.idx.size());
    Vec yb = b.V * c.segment(b.offset, m);
    for (long i = 0; i < m; ++i) y(b.idx[i]) = yb(i);
  }
  return y;
}

Mat SpectralForm::apply_frame(const std::function<double(double)>& f, const Mat& Xf, bool heisenberg) const {
  Vec c = modes(to_sym(Xf, heisenberg));
  for (long i = 0; i < c.size(); ++i) c(i) *= f(evals_(i));
  return from_sym(unmodes(c), heisenberg);
}

Mat SpectralForm::apply(const std::function<double(double)>& f, const Mat& X, bool heisenberg) const {
  Mat Xf = frame_.size() ? Mat(frame_.adjoint() * X * frame_) : X;
  Mat Yf = apply_frame(f, Xf, heisenberg);
  return frame_.size() ? Mat(frame_ * Yf * frame_.adjoint()) : Yf;
}

double phi1(double z) {
  if (std::abs(z) < 1e-5) return 1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0;
  return std::expm1(z) / z;
}

Mat ode_propagate(const std::function<Mat(const Mat&)>& f, const Mat& X0, double t, const OdeOptions& opt) {
  namespace odeint = boost::numeric::odeint;
  if (t < 0.0) throw InvalidParameter("ode_propagate needs t >= 0");
  if (t == 0.0) return X0;
  using State = std::vector<cplx>;
  const long r = X0.rows(), c = X0.cols();
  State y(X0.data(), X0.data() + X0.size());
  auto rhs = [&](const State& x, State& dx, double) {
    const Mat out = f(Eigen::Map<const Mat>(x.data(), r, c));
    dx.assign(out.data(), out.data() + out.size());
  };
  long steps = 0;
  auto count = [&](const State&, double s) {
    if (++steps > opt.max_steps) throw StiffnessError("ode_propagate: step budget exhausted at s=" + std::to_string(s));
  };
  const double n0 = std::max(X0.norm(), 1e-12), f0 = std::max(f(X0).norm(), 1e-12);
  const double h0 = std::min(t, 0.01 * n0 / f0);
  try {
    odeint::integrate_adaptive(odeint::make_controlled<odeint::runge_kutta_dopri5<State>>(opt.atol, opt.rtol), rhs,
                               y, 0.0, t, h0, count);
  } catch (const odeint::odeint_error& e) {
    throw StiffnessError(std::string("ode_propagate: ") + e.what());
  }
  return Eigen::Map<const Mat>(y.data(), r, c);
}

Mat propagate(const SuperOp& L, const Mat& X0, double t, Backend backend) {
  if (t < 0.0) throw InvalidParameter("propagate needs t >= 0");
  if (t == 0.0) return X0;
  if (backend == Backend::spectral) {
    SpectralForm sf(L);
    return sf.apply([t](double l) { return std::exp(l * t); }, X0);
  }
  Mat Xf = L.to_frame(X0);
  // prefer the matrix-free action when present
  Mat Yf = ode_propagate([&L](const Mat& Z) -> Mat { return L.action ? L.action(Z) : L.apply_frame(Z); }, Xf, t);
  return L.from_frame(Yf);
}

}  // namespace qmarkov
