#include "qmarkov/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "qmarkov/dirichlet.hpp"
#include "qmarkov/markov.hpp"
#include "qmarkov/oft.hpp"
#include "qmarkov/parallel.hpp"

namespace qmarkov {

namespace {

int qubits_of(long dim) {
  int n = 0;
  while ((1L << n) < dim) ++n;
  if ((1L << n) != dim) throw InvalidSize("operator dimension is not a power of two");
  return n;
}

// e^{iHt} A e^{-iHt} from a plain eigendecomposition
struct Evolver {
  RVec E;
  Mat U;
  explicit Evolver(const Mat& H) {
    Eigen::SelfAdjointEigenSolver<Mat> es(H);
    E = es.eigenvalues();
    U = es.eigenvectors();
  }
  Mat operator()(const Mat& A, double t) const {
    if (t == 0.0) return A;
    Mat Af = U.adjoint() * A * U;
    for (long j = 0; j < Af.cols(); ++j)
      for (long k = 0; k < Af.rows(); ++k) Af(k, j) *= std::exp(I1 * (E(k) - E(j)) * t);
    return U * Af * U.adjoint();
  }
};

Mat commutator(const Mat& a, const Mat& b) { return a * b - b * a; }

// Pauli string with letters on `sites`, identity elsewhere
Mat pauli_on(const std::vector<int>& sites, const std::string& letters, int n) {
  std::string s(n, 'I');
  for (size_t i = 0; i < sites.size(); ++i) s[sites[i]] = letters[i];
  return pauli_string(s);
}

std::vector<int> random_sites(std::mt19937_64& rng, int n, int k) {
  std::vector<int> all(n);
  for (int i = 0; i < n; ++i) all[i] = i;
  for (int i = 0; i < k; ++i) std::swap(all[i], all[i + rng() % (n - i)]);
  std::vector<int> out(all.begin(), all.begin() + k);
  std::sort(out.begin(), out.end());
  return out;
}

std::string random_letters(std::mt19937_64& rng, int k) {
  static const char xyz[] = "XYZ";
  std::string s;
  for (int i = 0; i < k; ++i) s += xyz[rng() % 3];
  return s;
}

const double kBetas[] = {0.2, 1.0, 4.0};

}  // namespace

BoundAccumulator::BoundAccumulator(std::string name, double tolerance, double floor)
    : name_(std::move(name)), tol_(tolerance), floor_(floor) {}

void BoundAccumulator::add(double value, double bound) {
  margins_.push_back(bound - value);
  worst_ = std::max(worst_, (value - bound) / std::max(std::abs(bound), floor_));
}

void BoundAccumulator::merge(const BoundAccumulator& other) {
  margins_.insert(margins_.end(), other.margins_.begin(), other.margins_.end());
  worst_ = std::max(worst_, other.worst_);
}

BoundReport BoundAccumulator::report() const {
  BoundReport r;
  r.name = name_;
  r.tolerance = tol_;
  r.instances = static_cast<long>(margins_.size());
  r.max_violation = worst_;
  if (!margins_.empty()) {
    std::vector<double> m = margins_;
    std::sort(m.begin(), m.end());
    r.margin_min = m.front();
    r.margin_median = m.size() % 2 ? m[m.size() / 2] : 0.5 * (m[m.size() / 2 - 1] + m[m.size() / 2]);
  }
  return r;
}

double lr_bound(int region_size, int degree, int ell, double t) {
  const double x = 2.0 * degree * std::abs(t);
  const double log_term = ell * std::log(std::max(x, 1e-300)) - std::lgamma(ell + 1.0);
  const double b = region_size * std::exp(log_term) / (1.0 - 2.0 / std::numbers::e);
  return x == 0.0 ? 0.0 : std::min(2.0, b);
}

BoundReport lr_truncation_check(const Hamiltonian& H, const Region& A, int ell, const std::vector<double>& t_grid,
                                const std::vector<Mat>& ops) {
  if (H.n() > 8) throw CapacityError("lr_truncation_check limited to n <= 8");
  BoundAccumulator acc("lieb_robinson_truncation");
  const Evolver full(H.dense());
  const Evolver patch(truncate_patch(H, A, ell).dense());
  for (const Mat& op : ops) {
    const double a = op_norm(op);
    for (double t : t_grid) {
      const double lhs = op_norm(patch(op, t) - full(op, t));
      acc.add(lhs, a * lr_bound(A.size(), H.degree(), ell, t));
    }
  }
  return acc.report();
}

double double_commutator_identity(const Mat& rho, const Region& A) {
  const int n = qubits_of(rho.rows());
  if (A.size() > 3) throw CapacityError("double commutator identity limited to |A| <= 3");
  if (A.empty()) throw InvalidRegion("double commutator identity needs a nonempty region");
  const Mat lhs = rho - replace_with_maximally_mixed(rho, A, n);
  Mat rhs = Mat::Zero(rho.rows(), rho.cols());
  const int k = A.size();
  static const char ixyz[] = "IXYZ";
  for (long code = 0; code < (1L << (2 * k)); ++code) {
    std::string letters;
    for (int i = 0; i < k; ++i) letters += ixyz[(code >> (2 * (k - 1 - i))) & 3];
    const Mat S = pauli_on(A.sites, letters, n);
    rhs += commutator(S, commutator(S, rho));
  }
  rhs /= std::pow(2.0, 2 * k + 1);
  return max_abs(lhs - rhs);
}

ValueBound holder_loose(const GibbsState& gs, const Mat& A, const Mat& O) {
  ValueBound vb;
  vb.value = kms_norm(gs, commutator(A, O));
  const double left = op_norm(gs.rho_q * A * gs.rho_mq);
  const double right = op_norm(gs.rho_mq * A * gs.rho_q);
  vb.bound = (left + right) * kms_norm(gs, O);
  return vb;
}

ValueBound imaginary_conjugation(const Hamiltonian& H, const Spectrum& spec, const Mat& S, int weight, double beta) {
  const int d = H.degree();
  const double x = 2.0 * d * std::abs(beta);
  if (!(x < 1.0)) throw InvalidParameter("imaginary conjugation bound needs |beta| < 1/(2d)");
  ValueBound vb;
  vb.value = conjugation_norm(spec, S, beta);
  vb.bound = std::pow(1.0 / (1.0 - x), weight);
  return vb;
}

double leibniz_deviation(const std::vector<Mat>& factors, const Mat& O) {
  if (factors.empty()) throw InvalidParameter("leibniz identity needs at least one factor");
  const long d = O.rows();
  Mat prod = Mat::Identity(d, d);
  for (const Mat& f : factors) prod = (prod * f).eval();
  const Mat lhs = commutator(prod, O);
  Mat rhs = Mat::Zero(d, d);
  for (size_t j = 0; j < factors.size(); ++j) {
    Mat left = Mat::Identity(d, d), right = Mat::Identity(d, d);
    for (size_t i = 0; i < j; ++i) left = (left * factors[i]).eval();
    for (size_t i = j + 1; i < factors.size(); ++i) right = (right * factors[i]).eval();
    rhs += left * commutator(factors[j], O) * right;
  }
  return max_abs(lhs - rhs);
}

BoundReport holder_loose_sweep(std::uint64_t seed, int count) {
  std::vector<BoundAccumulator> parts(count, BoundAccumulator("holder_loose"));
  parallel_for(count, [&](long i) {
    std::mt19937_64 rng(seed + 1000003ULL * i);
    const double beta = kBetas[i % 3];
    const Hamiltonian H = build_random_local(2, 2, 2, rng());
    const GibbsState gs = gibbs(hermitian_eig(H.dense()), beta);
    const Mat A = random_contraction(rng, 4);
    const Mat O = random_complex(rng, 4, 4);
    const ValueBound vb = holder_loose(gs, A, O);
    parts[i].add(vb.value, vb.bound);
  });
  BoundAccumulator acc("holder_loose");
  for (const auto& p : parts) acc.merge(p);
  return acc.report();
}

BoundReport kms_norm_sweep(std::uint64_t seed, int count) {
  std::vector<BoundAccumulator> parts(count, BoundAccumulator("kms_norm_vs_operator_norm"));
  parallel_for(count, [&](long i) {
    std::mt19937_64 rng(seed + 1000003ULL * i);
    const int n = 1 + static_cast<int>(i % 3);
    const double beta = kBetas[(i / 3) % 3];
    const Hamiltonian H = build_random_local(n, std::min(n, 2), n + 1, rng());
    const GibbsState gs = gibbs(hermitian_eig(H.dense()), beta);
    const Mat X = random_complex(rng, 1 << n, 1 << n);
    const double k = kms_norm(gs, X), o = op_norm(X);
    parts[i].add(k * k, o * o);
  });
  BoundAccumulator acc("kms_norm_vs_operator_norm");
  for (const auto& p : parts) acc.merge(p);
  return acc.report();
}

BoundReport imaginary_conjugation_sweep(std::uint64_t seed, int count) {
  std::vector<BoundAccumulator> parts(count, BoundAccumulator("imaginary_conjugation"));
  parallel_for(count, [&](long i) {
    std::mt19937_64 rng(seed + 1000003ULL * i);
    const int n = 3 + static_cast<int>(i % 3);
    const Hamiltonian H = (i % 2) ? build_random_local(n, 2, n + 1, rng())
                                  : build_tfim_chain(n, 1.0, std::uniform_real_distribution<>(0.2, 1.05)(rng), false);
    const Spectrum spec = hermitian_eig(H.dense());
    const int w = 1 + static_cast<int>(rng() % 3);
    const Mat S = pauli_on(random_sites(rng, n, w), random_letters(rng, w), n);
    const double frac = std::uniform_real_distribution<>(-0.98, 0.98)(rng);
    const double beta = frac / (2.0 * H.degree());
    const ValueBound vb = imaginary_conjugation(H, spec, S, w, beta);
    parts[i].add(vb.value, vb.bound);
  });
  BoundAccumulator acc("imaginary_conjugation");
  for (const auto& p : parts) acc.merge(p);
  return acc.report();
}

BoundReport lr_sweep(std::uint64_t seed, int count) {
  // each instance: one model, one region, one ell, one operator, one time
  std::vector<BoundAccumulator> parts(count, BoundAccumulator("lieb_robinson_truncation"));
  parallel_for(count, [&](long i) {
    std::mt19937_64 rng(seed + 1000003ULL * i);
    const int n = 4 + static_cast<int>(i % 3);
    const Hamiltonian H = (i % 2) ? build_random_local(n, 2, n + 1, rng())
                                  : build_tfim_chain(n, 1.0, std::uniform_real_distribution<>(0.2, 1.05)(rng), false);
    const int k = 1 + static_cast<int>(rng() % 2);
    const Region A(random_sites(rng, n, k));
    const int ell = 1 + static_cast<int>(rng() % 4);
    const double t = std::uniform_real_distribution<>(0.0, 1.0)(rng);
    const Mat op = embed(random_contraction(rng, 1 << k), A.sites, n);
    const Evolver full(H.dense());
    const Evolver patch(truncate_patch(H, A, ell).dense());
    parts[i].add(op_norm(patch(op, t) - full(op, t)), lr_bound(A.size(), H.degree(), ell, t));
  });
  BoundAccumulator acc("lieb_robinson_truncation");
  for (const auto& p : parts) acc.merge(p);
  return acc.report();
}

IdentityReport double_commutator_sweep(std::uint64_t seed, int count) {
  IdentityReport r{"double_commutator", count, 0.0, 1e-10};
  std::vector<double> dev(count);
  parallel_for(count, [&](long i) {
    std::mt19937_64 rng(seed + 1000003ULL * i);
    const int n = 2 + static_cast<int>(i % 3);
    const int k = 1 + static_cast<int>(rng() % 2);
    const Mat rho = random_density(rng, 1 << n);
    dev[i] = double_commutator_identity(rho, Region(random_sites(rng, n, k)));
  });
  for (double d : dev) r.max_deviation = std::max(r.max_deviation, d);
  return r;
}

IdentityReport leibniz_sweep(std::uint64_t seed, int count) {
  IdentityReport r{"leibniz_commutator", count, 0.0, 1e-12};
  std::vector<double> dev(count);
  parallel_for(count, [&](long i) {
    std::mt19937_64 rng(seed + 1000003ULL * i);
    const int n = 4;
    const int w = 1 + static_cast<int>(rng() % 3);
    const auto sites = random_sites(rng, n, w);
    const std::string letters = random_letters(rng, w);
    std::vector<Mat> factors;
    for (int j = 0; j < w; ++j) factors.push_back(pauli_on({sites[j]}, letters.substr(j, 1), n));
    const Mat O = random_contraction(rng, 1 << n);
    dev[i] = leibniz_deviation(factors, O);
  });
  for (double d : dev) r.max_deviation = std::max(r.max_deviation, d);
  return r;
}

std::optional<double> local_gap(const Generator& g, double kernel_tol) {
  const SpectralForm sf(g.L);
  std::optional<double> gap;
  for (long i = 0; i < sf.eigenvalues().size(); ++i) {
    const double a = std::abs(sf.eigenvalues()(i));
    if (a > kernel_tol && (!gap || a < *gap)) gap = a;
  }
  return gap;
}

GapDecayReport gap_decay_check(const Generator& g, const std::vector<double>& times, int samples,
                               std::uint64_t seed) {
  const double tol = 1e-10;
  const SpectralForm sf(g.L);
  GapDecayReport r;
  std::optional<double> gap;
  for (long i = 0; i < sf.eigenvalues().size(); ++i) {
    const double a = std::abs(sf.eigenvalues()(i));
    if (a > tol && (!gap || a < *gap)) gap = a;
  }
  if (!gap) throw NumericDomain("generator has no nonzero eigenvalue; gap undefined");
  r.gap = *gap;
  std::mt19937_64 rng(seed);
  for (int s = 0; s < samples; ++s) {
    const Mat X = random_complex(rng, g.dim, g.dim);
    const double xn = kms_norm(g.gs, X);
    for (double t : times) {
      auto f = [&](double lam) { return std::abs(lam) <= tol ? 0.0 : std::exp(lam * t); };
      GapDecayRow row{t, kms_norm(g.gs, sf.apply(f, X, true)), std::exp(-r.gap * t) * xn};
      r.worst_slack = std::min(r.worst_slack, row.rhs - row.lhs);
      r.rows.push_back(row);
    }
  }
  return r;
}

CommutatorDirichletReport commutator_dirichlet_relation(const Generator& g, const Mat& jump, int samples,
                                                        const std::vector<double>& times, std::uint64_t seed) {
  if (g.jumps_frame.size() != 1) throw InvalidParameter("commutator_dirichlet_relation needs a single-jump generator");
  const double tol = 1e-10;
  const SpectralForm sf(g.L);
  CommutatorDirichletReport r;
  std::mt19937_64 rng(seed);
  {
    const Mat X0 = random_contraction(rng, g.dim);
    const Mat K = sf.apply([&](double lam) { return std::abs(lam) <= tol ? 1.0 : 0.0; }, X0, true);
    r.kernel_dirichlet = dirichlet_direct(g, g.gs, K);
    r.kernel_commutator = kms_norm(g.gs, commutator(jump, K));
  }
  for (int s = 0; s < samples; ++s) {
    const Mat X0 = random_contraction(rng, g.dim);
    r.rows.push_back({dirichlet_direct(g, g.gs, X0), kms_norm(g.gs, commutator(jump, X0)), 0.0});
    for (double t : times) {
      const Mat Xt = sf.apply([&](double lam) { return phi1(lam * t); }, X0, true);
      r.rows.push_back({dirichlet_direct(g, g.gs, Xt), kms_norm(g.gs, commutator(jump, Xt)), t});
    }
  }
  // upper envelope: max log commutator inside equal-width bins of log E
  std::vector<std::pair<double, double>> pts;
  for (const auto& row : r.rows)
    if (row.dirichlet > 1e-14 && row.commutator > 1e-14) pts.push_back({std::log(row.dirichlet), std::log(row.commutator)});
  if (pts.size() >= 2) {
    double lo = 1e300, hi = -1e300;
    for (auto& p : pts) {
      lo = std::min(lo, p.first);
      hi = std::max(hi, p.first);
    }
    const int bins = 8;
    std::vector<double> bx(bins, 0.0), by(bins, -1e300);
    for (auto& p : pts) {
      int b = hi > lo ? std::min(bins - 1, static_cast<int>((p.first - lo) / (hi - lo) * bins)) : 0;
      if (p.second > by[b]) {
        by[b] = p.second;
        bx[b] = p.first;
      }
    }
    std::vector<double> xs, ys;
    for (int b = 0; b < bins; ++b)
      if (by[b] > -1e299) {
        xs.push_back(bx[b]);
        ys.push_back(by[b]);
      }
    r.envelope_slope = linear_fit(xs, ys).slope;
  }
  return r;
}

double quasilocal_proxy(const Hamiltonian& H, const Region& A, const Weight& w, int ell) {
  const int n = H.n();
  if (n > 5) throw CapacityError("quasilocal proxy limited to n <= 5");
  const JumpSet jumps = single_site_jumps(A);
  const Generator full = assemble(H, jumps, w);
  const Generator trunc = assemble(truncate_patch(H, A, ell), jumps, w);
  const long count = 1L << (2 * n);
  std::vector<double> norms(count);
  static const char ixyz[] = "IXYZ";
  parallel_for(count, [&](long code) {
    std::string s;
    for (int i = 0; i < n; ++i) s += ixyz[(code >> (2 * (n - 1 - i))) & 3];
    const Mat P = pauli_string(s);
    norms[code] = op_norm(full.heisenberg(P) - trunc.heisenberg(P));
  });
  return *std::max_element(norms.begin(), norms.end());
}

nlohmann::json to_json(const BoundReport& r) {
  return {{"name", r.name},
          {"instances", r.instances},
          {"max_violation", r.max_violation},
          {"margin_min", r.margin_min},
          {"margin_median", r.margin_median},
          {"tolerance", r.tolerance},
          {"pass", r.pass()}};
}

nlohmann::json to_json(const IdentityReport& r) {
  return {{"name", r.name},
          {"instances", r.instances},
          {"max_deviation", r.max_deviation},
          {"tolerance", r.tolerance},
          {"pass", r.pass()}};
}

}  // namespace qmarkov
