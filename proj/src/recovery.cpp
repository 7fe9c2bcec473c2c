#include "qmarkov/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "qmarkov/parallel.hpp"

namespace qmarkov {

namespace {

int qubits_of(long dim) {
  int n = 0;
  while ((1L << n) < dim) ++n;
  if ((1L << n) != dim) throw InvalidSize("operator dimension is not a power of two");
  return n;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (size_t i = 0; i < x.size(); ++i)
    if (x[i] > 0.0 && y[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  const size_t m = lx.size();
  if (m < 2) return 0.0;
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < m; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= m;
  my /= m;
  double sxy = 0.0, sxx = 0.0;
  for (size_t i = 0; i < m; ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

}  // namespace

Weight RecoveryScenario::make_weight() const {
  return weight == WeightKind::metropolis ? Weight::metropolis(beta, sigma) : Weight::gaussian(beta, sigma, omega_gamma);
}

void RecoveryScenario::validate() const {
  for (int s : A.sites)
    if (s < 0 || s >= H.n()) throw InvalidRegion("region site " + std::to_string(s) + " outside the system");
  if (times.empty()) throw InvalidParameter("recovery scenario needs at least one time");
  for (size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] > 0.0)) throw InvalidParameter("times must be positive");
    if (i > 0 && !(times[i] > times[i - 1])) throw InvalidParameter("times must be strictly increasing");
  }
  if (ell && *ell < 1) throw InvalidParameter("ell must be >= 1");
}

Mat discard_region(const GibbsState& gs, const Region& A) {
  return replace_with_maximally_mixed(gs.rho, A, qubits_of(gs.rho.rows()));
}

Mat ode_time_average(const std::function<Mat(const Mat&)>& f, const Mat& X, double t) {
  if (!(t > 0.0)) throw InvalidParameter("time average needs t > 0");
  const long d = X.rows();
  Mat Y0(d, 2 * X.cols());
  Y0.leftCols(X.cols()) = X;
  Y0.rightCols(X.cols()).setZero();
  auto F = [&](const Mat& S) -> Mat {
    Mat out(S.rows(), S.cols());
    out.leftCols(X.cols()) = f(S.leftCols(X.cols()));
    out.rightCols(X.cols()) = S.leftCols(X.cols());
    return out;
  };
  Mat Yt = ode_propagate(F, Y0, t);
  return Yt.rightCols(X.cols()) / t;
}

LocalRecovery::LocalRecovery(const Hamiltonian& H, const Region& A, const Weight& w, Backend backend)
    : n_(H.n()), backend_(backend) {
  if (A.empty()) throw InvalidRegion("recovery needs a nonempty region");
  for (int s : A.sites)
    if (s < 0 || s >= n_) throw InvalidRegion("region site " + std::to_string(s) + " outside the system");
  std::vector<int> s = H.support();
  s.insert(s.end(), A.sites.begin(), A.sites.end());
  sites_ = Region(std::move(s)).sites;
  const Hamiltonian Hs = restrict_to(H, sites_);
  JumpSet js;
  for (int a : A.sites) {
    const int pos = static_cast<int>(std::lower_bound(sites_.begin(), sites_.end(), a) - sites_.begin());
    for (char p : {'X', 'Y', 'Z'}) js.push_back({std::string(1, p) + std::to_string(a), pos, p});
  }
  const int k = Hs.n();
  if (backend == Backend::spectral && k > 6)
    throw CapacityError("spectral backend limited to 6 active sites, got " + std::to_string(k));
  AssembleOptions opt;
  opt.dense = backend == Backend::spectral;
  g_ = assemble(hermitian_eig(Hs.dense()), jump_matrices(js, k), w, opt);
  if (backend == Backend::spectral) sf_ = std::make_shared<SpectralForm>(g_.L);
}

Mat LocalRecovery::lift(const std::function<Mat(const Mat&)>& local, const Mat& X) const {
  if (X.rows() != (1L << n_)) throw InvalidSize("operator does not match the register");
  if (static_cast<int>(sites_.size()) == n_) return local(X);
  const auto offS = site_offsets(sites_, n_);
  const auto offR = site_offsets(complement(Region(sites_), n_).sites, n_);
  const long ds = static_cast<long>(offS.size()), dr = static_cast<long>(offR.size());
  Mat out(X.rows(), X.cols());
  Mat slice(ds, ds);
  for (long r2 = 0; r2 < dr; ++r2)
    for (long r1 = 0; r1 < dr; ++r1) {
      for (long b = 0; b < ds; ++b)
        for (long a = 0; a < ds; ++a) slice(a, b) = X(offS[a] | offR[r1], offS[b] | offR[r2]);
      Mat y = local(slice);
      for (long b = 0; b < ds; ++b)
        for (long a = 0; a < ds; ++a) out(offS[a] | offR[r1], offS[b] | offR[r2]) = y(a, b);
    }
  return out;
}

Mat LocalRecovery::apply_function(const std::function<double(double)>& f, const Mat& X, bool heisenberg) const {
  if (!sf_) throw Error("apply_function needs the spectral backend");
  return lift([&](const Mat& Xs) { return sf_->apply(f, Xs, heisenberg); }, X);
}

Mat LocalRecovery::heisenberg(const Mat& X) const {
  return lift([&](const Mat& Xs) { return g_.L.apply_adjoint(Xs); }, X);
}

Mat LocalRecovery::apply(const Mat& rho, double t) const {
  if (!(t > 0.0)) throw InvalidParameter("time average needs t > 0");
  if (sf_) return apply_function([t](double l) { return phi1(l * t); }, rho, false);
  auto F = [this](const Mat& Z) { return lift([this](const Mat& Xs) { return g_.L.apply(Xs); }, Z); };
  return ode_time_average(F, rho, t);
}

Mat LocalRecovery::apply_adjoint(const Mat& X, double t) const {
  if (!(t > 0.0)) throw InvalidParameter("time average needs t > 0");
  if (sf_) return apply_function([t](double l) { return phi1(l * t); }, X, true);
  auto F = [this](const Mat& Z) { return heisenberg(Z); };
  return ode_time_average(F, X, t);
}

Mat LocalRecovery::evolve_adjoint(const Mat& X, double t) const {
  if (sf_) return apply_function([t](double l) { return std::exp(l * t); }, X, true);
  return ode_propagate([this](const Mat& Z) { return heisenberg(Z); }, X, t);
}

Mat LocalRecovery::stationarity(const Mat& X, double t) const {
  if (!(t > 0.0)) throw InvalidParameter("time average needs t > 0");
  if (sf_) return apply_function([t](double l) { return l * phi1(l * t); }, X, true);
  return (evolve_adjoint(X, t) - X) / t;
}

SuperOp time_averaged_map(const Generator& g, double t, Backend backend) {
  if (!(t > 0.0)) throw InvalidParameter("time average needs t > 0");
  SuperOp R;
  R.dim = g.dim;
  R.frame = g.L.frame;
  if (backend == Backend::spectral) {
    auto sf = std::make_shared<SpectralForm>(g.L);
    auto f = [t](double l) { return phi1(l * t); };
    R.action = [sf, f](const Mat& Xf) { return sf->apply_frame(f, Xf, false); };
    R.adjoint = [sf, f](const Mat& Xf) { return sf->apply_frame(f, Xf, true); };
  } else {
    auto act = g.L.action, adj = g.L.adjoint;
    R.action = [act, t](const Mat& Xf) { return ode_time_average(act, Xf, t); };
    R.adjoint = [adj, t](const Mat& Xf) { return ode_time_average(adj, Xf, t); };
  }
  return R;
}

RecoveryCurve recovery_error_curve(const RecoveryScenario& s) {
  s.validate();
  const Spectrum spec = hermitian_eig(s.H.dense());
  const GibbsState gs = gibbs(spec, s.beta);
  const Mat rho_mA = discard_region(gs, s.A);
  std::mt19937_64 rng(s.seed);
  const Mat X = random_contraction(rng, gs.dim());

  RecoveryCurve curve;
  curve.rows.resize(s.times.size());
  if (s.A.empty()) {
    for (size_t i = 0; i < s.times.size(); ++i) {
      curve.rows[i].t = s.times[i];
      curve.rows[i].bound = 2.0 / s.times[i];
    }
    return curve;
  }
  const LocalRecovery rec(s.H, s.A, s.make_weight(), s.backend);
  parallel_for(static_cast<long>(s.times.size()), [&](long i) {
    const double t = s.times[i];
    RecoveryRow& r = curve.rows[i];
    r.t = t;
    r.bound = 2.0 / t;
    r.err = trace_distance(rec.apply(rho_mA, t), gs.rho);
    r.fixed_point = trace_distance(rec.apply(gs.rho, t), gs.rho);
    const Mat Y = rec.apply_adjoint(X, t);
    r.dirichlet = -kms_inner(gs, Y, rec.heisenberg(Y)).real();
    r.stationarity = op_norm(rec.stationarity(X, t));
  });
  std::vector<double> ts, es;
  for (const auto& r : curve.rows) {
    ts.push_back(r.t);
    es.push_back(r.err);
  }
  curve.fitted_exponent = -loglog_slope(ts, es);
  curve.err_ratio = es.front() > 0.0 ? es.back() / es.front() : 0.0;
  return curve;
}

int saturating_ell(const Hamiltonian& H, const Region& A) {
  const size_t total = H.terms().size();
  for (int ell = 1;; ++ell) {
    if (truncate_patch(H, A, ell).terms().size() == total) return ell;
    if (ell > static_cast<int>(total) + 2) return ell;  // disconnected terms never join
  }
}

std::vector<TruncationRow> truncated_recovery_error(const RecoveryScenario& s, std::vector<int> ells) {
  s.validate();
  const Spectrum spec = hermitian_eig(s.H.dense());
  const GibbsState gs = gibbs(spec, s.beta);
  const Mat rho_mA = discard_region(gs, s.A);
  const Weight w = s.make_weight();
  if (ells.empty()) {
    if (s.ell) ells.push_back(*s.ell);
    else
      for (int l = 1; l <= saturating_ell(s.H, s.A); ++l) ells.push_back(l);
  }
  const LocalRecovery full(s.H, s.A, w, s.backend);
  std::vector<Mat> full_out;
  for (double t : s.times) full_out.push_back(full.apply(rho_mA, t));
  std::vector<TruncationRow> rows;
  // identical patches give identical maps; only rebuild when the term set changes
  std::vector<std::string> last_labels, all_labels;
  for (const auto& term : s.H.terms()) all_labels.push_back(term.label);
  std::vector<Mat> outs;
  for (int ell : ells) {
    const Hamiltonian patch = truncate_patch(s.H, s.A, ell);
    std::vector<std::string> labels;
    for (const auto& term : patch.terms()) labels.push_back(term.label);
    if (labels == all_labels) {
      outs = full_out;
    } else if (outs.empty() || labels != last_labels) {
      const LocalRecovery tr(patch, s.A, w, s.backend);
      outs.clear();
      for (double t : s.times) outs.push_back(tr.apply(rho_mA, t));
    }
    last_labels = labels;
    for (size_t i = 0; i < s.times.size(); ++i) {
      const Mat& out = outs[i];
      TruncationRow r;
      r.t = s.times[i];
      r.ell = ell;
      r.err_full = trace_distance(full_out[i], gs.rho);
      r.err_trunc = trace_distance(out, gs.rho);
      r.map_gap = trace_distance(full_out[i], out);
      rows.push_back(r);
    }
  }
  return rows;
}

PatchResult patching_prepare(const Hamiltonian& H, double beta, double sigma, int patch_size, int ell, double t,
                             const PatchOptions& opt) {
  const int n = H.n();
  if (n > 8) throw CapacityError("patching limited to n <= 8");
  if (patch_size < 1 || patch_size > n) throw InvalidParameter("patch size must be in [1, n]");
  if (opt.rounds < 1) throw InvalidParameter("rounds must be >= 1");
  const Weight w = opt.weight == WeightKind::metropolis ? Weight::metropolis(beta, sigma)
                                                        : Weight::gaussian(beta, sigma, opt.omega_gamma);
  const GibbsState gs = gibbs(hermitian_eig(H.dense()), beta);
  std::vector<Region> patches;
  std::vector<LocalRecovery> maps;
  for (int s0 = 0; s0 < n; s0 += patch_size) {
    std::vector<int> sites;
    for (int s = s0; s < std::min(n, s0 + patch_size); ++s) sites.push_back(s);
    patches.emplace_back(sites);
    maps.emplace_back(truncate_patch(H, patches.back(), ell), patches.back(), w, opt.backend);
  }
  PatchResult res;
  const long dim = 1L << n;
  res.state = Mat::Identity(dim, dim) / static_cast<double>(dim);
  res.initial_err = trace_distance(res.state, gs.rho);
  for (int round = 0; round < opt.rounds; ++round)
    for (size_t k = 0; k < patches.size(); ++k) {
      if (opt.discard) res.state = replace_with_maximally_mixed(res.state, patches[k], n);
      res.state = maps[k].apply(res.state, t);
      res.after_patch.push_back(trace_distance(res.state, gs.rho));
    }
  res.err = trace_distance(res.state, gs.rho);
  return res;
}

double choi_min_eigenvalue(const LocalRecovery& r, double t) {
  const int n = r.n();
  if (n > 3) throw CapacityError("Choi check limited to n <= 3");
  const long d = 1L << n;
  Mat C = Mat::Zero(d * d, d * d);
  for (long j = 0; j < d; ++j)
    for (long i = 0; i < d; ++i) {
      Mat E = Mat::Zero(d, d);
      E(i, j) = 1.0;
      C.block(i * d, j * d, d, d) = r.apply(E, t);
    }
  C = 0.5 * (C + C.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> es(C, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace qmarkov
