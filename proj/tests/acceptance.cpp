// Acceptance runner: `acceptance` runs every criterion, `acceptance k` runs one.
// One line per criterion, PASS or FAIL plus the numbers behind it.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "qmarkov/bounds.hpp"
#include "qmarkov/dirichlet.hpp"
#include "qmarkov/markov.hpp"
#include "qmarkov/oft.hpp"
#include "qmarkov/recovery.hpp"

using namespace qmarkov;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3g", v);
  return b;
}

double rel(const Mat& a, const Mat& b) { return max_abs(a - b) / std::max(max_abs(b), 1e-300); }

std::vector<Weight> both_weights(double beta) {
  return {Weight::metropolis(beta, 1.0 / beta), Weight::gaussian(beta, 1.0 / beta, 1.0 / beta)};
}

double slope_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (size_t i = 0; i < x.size(); ++i) {
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return linear_fit(lx, ly).slope;
}

Outcome c1() {
  std::vector<Hamiltonian> models;
  for (int n = 1; n <= 4; ++n) models.push_back(build_random_local(n, std::min(n, 2), n + 1, 100 + n));
  for (int n = 2; n <= 4; ++n) models.push_back(build_tfim_chain(n, 1.0, 0.9, false));
  for (int n = 2; n <= 4; ++n) models.push_back(build_classical_ising(n, 1.0, false));
  double db = 0.0, fp = 0.0;
  int count = 0;
  for (const Hamiltonian& H : models) {
    std::vector<int> all;
    for (int s = 0; s < H.n(); ++s) all.push_back(s);
    for (double beta : {0.2, 1.0, 4.0})
      for (const Weight& w : both_weights(beta)) {
        const Generator g = assemble(H, single_site_jumps(Region(all)), w);
        db = std::max(db, detailed_balance_residual(g, g.gs));
        fp = std::max(fp, fixed_point_residual(g));
        ++count;
      }
  }
  return {db <= 1e-8 && fp <= 1e-8, "models=" + std::to_string(models.size()) + " generators=" +
                                        std::to_string(count) + " db_residual=" + fmt(db) + " fixed_point=" + fmt(fp)};
}

Outcome c2() {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<> u(-2.0, 2.0);
  double recon = 0.0, shift = 0.0;
  for (int i = 0; i < 50; ++i) {
    const int n = 2 + i % 2;
    const Spectrum s = hermitian_eig(build_random_local(n, 2, n + 1, 500 + i).dense());
    const Mat A = random_complex(rng, 1 << n, 1 << n);
    const BohrDecomp bd = bohr_decompose(s, A);
    const OftParams p(0.3 + std::abs(u(rng)) / 2);
    recon = std::max(recon, rel(oft_reconstruct(bd, p), A));
    const ConjugationPair cp = conjugate_imaginary(s, bd, u(rng), std::abs(u(rng)), p);
    shift = std::max(shift, rel(cp.lhs, cp.rhs));
  }
  return {recon <= 1e-9 && shift <= 1e-9, "instances=50 reconstruction=" + fmt(recon) + " imaginary_shift=" + fmt(shift)};
}

Outcome c3() {
  std::mt19937_64 rng(3);
  double db = 0.0, dc = 0.0;
  int pairs = 0, quads = 0;
  for (int n = 1; n <= 3; ++n)
    for (double beta : {0.5, 1.0, 2.0})
      for (const Weight& w : both_weights(beta)) {
        const Hamiltonian H = build_random_local(n, std::min(n, 2), n + 1, 300 + 10 * n + pairs);
        const Spectrum spec = hermitian_eig(H.dense());
        const auto jumps = jump_matrices(single_site_jumps(Region{0}), n);
        const Generator g = assemble(spec, jumps, w);
        const TransitionCoeffs tc = transition_coefficients(spec, w);
        const Mat X = random_contraction(rng, 1 << n);
        const double d = dirichlet_direct(g, g.gs, X);
        const double b = dirichlet_bilinear(spec, g.gs, jumps, tc, X, X).real();
        db = std::max(db, std::abs(d - b) / std::abs(b));
        ++pairs;
        if (beta == 1.0) {
          const auto ci = dirichlet_commutator_integral(spec, g.gs, jumps, DirichletKernels(w), X);
          dc = std::max(dc, std::abs(ci.value - d) / std::abs(d));
          ++quads;
        }
      }
  const KernelIdentityReport k = metropolis_kernel_identity();
  return {db <= 1e-7 && dc <= 1e-5 && k.pass && k.points == 100,
          "pairs=" + std::to_string(pairs) + " direct_vs_bilinear=" + fmt(db) + " quadrature=" + std::to_string(quads) +
              " direct_vs_integral=" + fmt(dc) + " kernel_grid=" + std::to_string(k.points) +
              " kernel_rel=" + fmt(k.max_rel_h)};
}

Outcome c4() {
  struct Case {
    Hamiltonian H;
    Region A;
  };
  std::vector<Case> cases{{build_tfim_chain(4, 1.0, 1.05, false), Region{1}},
                          {build_random_local(3, 2, 4, 17), Region{0}}};
  double worst_e = -1e300, worst_s = -1e300;
  int checks = 0;
  std::mt19937_64 rng(4);
  for (const Case& c : cases) {
    const GibbsState gs = gibbs(hermitian_eig(c.H.dense()), 1.0);
    const LocalRecovery rec(c.H, c.A, Weight::metropolis(1.0, 1.0), Backend::spectral);
    for (int k = 0; k < 20; ++k) {
      const Mat X = random_contraction(rng, gs.dim());
      for (double t : {1.0, 10.0, 100.0, 1000.0}) {
        const Mat Y = rec.apply_adjoint(X, t);
        const double e = -kms_inner(gs, Y, rec.heisenberg(Y)).real();
        const double s = op_norm(rec.stationarity(X, t));
        worst_e = std::max(worst_e, e - 2.0 / t);
        worst_s = std::max(worst_s, s - 2.0 / t);
        ++checks;
      }
    }
  }
  return {worst_e <= 1e-9 && worst_s <= 1e-9, "checks=" + std::to_string(checks) +
                                                  " max(E-2/t)=" + fmt(worst_e) + " max(stat-2/t)=" + fmt(worst_s)};
}

Outcome c5() {
  RecoveryScenario s;
  s.H = build_tfim_chain(6, 1.0, 1.05, false);
  s.beta = 1.0;
  s.sigma = 1.0;
  s.A = Region{0};
  for (int i = 0; i <= 8; ++i) s.times.push_back(std::pow(10.0, i / 2.0));
  const RecoveryCurve c = recovery_error_curve(s);
  double fp = 0.0;
  bool tail_down = true;
  for (size_t i = 0; i < c.rows.size(); ++i) {
    fp = std::max(fp, c.rows[i].fixed_point);
    if (i > 0 && c.rows[i].t >= 10.0) tail_down = tail_down && c.rows[i].err <= c.rows[i - 1].err;
  }
  return {c.err_ratio <= 0.1 && fp <= 1e-8 && tail_down,
          "err(1)=" + fmt(c.rows.front().err) + " err(1e4)=" + fmt(c.rows.back().err) + " ratio=" + fmt(c.err_ratio) +
              " fixed_point=" + fmt(fp) + " fitted_exponent=" + fmt(c.fitted_exponent)};
}

Outcome c6() {
  const int n = 6;
  const Hamiltonian H = build_classical_ising(n, 1.0, false);
  const GibbsState gs = gibbs(hermitian_eig(H.dense()), 1.0);
  double worst = 0.0;
  int shielded = 0;
  for (int code = 0; code < 729; ++code) {
    std::vector<int> a, b, c;
    int x = code;
    for (int s = 0; s < n; ++s, x /= 3) (x % 3 == 0 ? a : x % 3 == 1 ? b : c).push_back(s);
    if (a.empty() || c.empty()) continue;
    const auto d = graph_distance(H, Region(a), Region(c));
    if (d && *d < 2) continue;  // some term touches both
    worst = std::max(worst, std::abs(qcmi(gs.rho, {Region(a), Region(b), Region(c)})));
    ++shielded;
  }
  const CmiScan scan = cmi_decay_scan(build_tfim_chain(10, 1.0, 1.05, false), 1.0);
  const bool fit_ok = scan.slope && *scan.slope < 0.0 && scan.r2 && *scan.r2 >= 0.9;
  return {worst <= 1e-9 && shielded > 0 && fit_ok,
          "ising_shielded=" + std::to_string(shielded) + " max_qcmi=" + fmt(worst) +
              " tfim10_slope=" + (scan.slope ? fmt(*scan.slope) : "none") + " r2=" + (scan.r2 ? fmt(*scan.r2) : "none")};
}

Outcome c7() {
  const std::uint64_t seed = 20240607;
  bool ok = true;
  std::string d;
  for (const BoundReport& r : {holder_loose_sweep(seed), imaginary_conjugation_sweep(seed), kms_norm_sweep(seed),
                               lr_sweep(seed)}) {
    ok = ok && r.pass() && r.instances >= 200;
    d += r.name + ":n=" + std::to_string(r.instances) + ",worst=" + fmt(r.max_violation) + " ";
  }
  return {ok, d};
}

Outcome c8() {
  const IdentityReport r = double_commutator_sweep(8);
  return {r.pass() && r.instances >= 50, "instances=" + std::to_string(r.instances) + " max_dev=" + fmt(r.max_deviation)};
}

Outcome c9() {
  RecoveryScenario s;
  s.H = build_tfim_chain(6, 1.0, 1.05, false);
  s.beta = 1.0;
  s.sigma = 1.0;
  s.A = Region{0};
  s.times = {1.0, 3.16, 10.0, 31.6, 100.0};
  const auto rows = truncated_recovery_error(s);
  int max_ell = 0;
  for (const auto& r : rows) max_ell = std::max(max_ell, r.ell);
  bool mono = true;
  for (double t : s.times) {
    double prev = 1e300;
    for (int ell = 1; ell <= max_ell; ++ell)
      for (const auto& r : rows)
        if (r.t == t && r.ell == ell) {
          mono = mono && r.map_gap <= prev + 1e-10;
          prev = r.map_gap;
        }
  }
  double worst_slope = -1e300;
  for (int ell = 1; ell <= max_ell; ++ell) {
    std::vector<double> ts, gs;
    for (const auto& r : rows)
      if (r.ell == ell && r.map_gap > 1e-12) {
        ts.push_back(r.t);
        gs.push_back(r.map_gap);
      }
    if (ts.size() >= 2) worst_slope = std::max(worst_slope, slope_loglog(ts, gs));
  }
  return {mono && worst_slope <= 1.1, "ells=1.." + std::to_string(max_ell) + " nonincreasing=" +
                                          (mono ? "yes" : "no") + " max_loglog_slope=" + fmt(worst_slope)};
}

Outcome c10() {
  const PatchResult r = patching_prepare(build_tfim_chain(6, 1.0, 1.05, false), 0.5, 2.0, 2, 3, 1e3);
  return {r.err <= 0.05, "initial=" + fmt(r.initial_err) + " final=" + fmt(r.err) + " threshold=0.05"};
}

Outcome c11() {
  std::vector<Generator> gens;
  for (const Weight& w : both_weights(1.0)) {
    gens.push_back(assemble(build_tfim_chain(3, 1.0, 1.05, false), single_site_jumps(Region{0, 1, 2}), w));
    gens.push_back(assemble(build_random_local(2, 2, 3, 41), single_site_jumps(Region{0, 1}), w));
  }
  double slack = 1e300, gap = 1e300;
  bool ok = true;
  for (size_t i = 0; i < gens.size(); ++i) {
    const GapDecayReport r = gap_decay_check(gens[i], {0.1, 1.0, 10.0}, 20, 11 + i);
    ok = ok && r.pass(1e-8);
    slack = std::min(slack, r.worst_slack);
    gap = std::min(gap, r.gap);
  }
  return {ok, "instances=" + std::to_string(gens.size()) + " min_gap=" + fmt(gap) + " worst_slack=" + fmt(slack)};
}

const std::vector<std::pair<std::string, std::function<Outcome()>>> kCriteria = {
    {"detailed_balance", c1}, {"oft_identities", c2},       {"dirichlet_three_way", c3},
    {"time_average_bounds", c4}, {"recovery_decay", c5},    {"cmi", c6},
    {"exact_inequalities", c7},  {"double_commutator", c8}, {"quasi_locality", c9},
    {"toy_patching", c10},       {"local_gap", c11}};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  if (argc > 1) {
    only = std::atoi(argv[1]);
    if (only < 1 || only > static_cast<int>(kCriteria.size())) {
      std::cerr << "usage: acceptance [1-" << kCriteria.size() << "]\n";
      return 2;
    }
  }
  bool all = true;
  for (size_t i = 0; i < kCriteria.size(); ++i) {
    if (only && static_cast<int>(i) + 1 != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = kCriteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (o.pass ? "PASS" : "FAIL") << " C" << i + 1 << " " << kCriteria[i].first << " " << o.detail
              << " (" << fmt(secs) << "s)" << std::endl;
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
