#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "qmarkov/lindblad.hpp"
#include "qmarkov/spinsys.hpp"

namespace qmarkov {

struct RecoveryScenario {
  Hamiltonian H;
  double beta = 1.0;
  double sigma = 1.0;
  WeightKind weight = WeightKind::metropolis;
  double omega_gamma = 0.0;
  Region A;
  std::vector<double> times;
  std::optional<int> ell;
  Backend backend = Backend::spectral;
  std::uint64_t seed = 7;  // for the probe observable

  Weight make_weight() const;
  void validate() const;
};

// Tr_A[rho] (x) I_A / 2^|A|
Mat discard_region(const GibbsState& gs, const Region& A);

// Generator with jumps P^1_A built from a Hamiltonian that may live on a few sites only.
// It acts on `sites` (H support plus A) and as the identity elsewhere.
class LocalRecovery {
 public:
  LocalRecovery(const Hamiltonian& H, const Region& A, const Weight& w, Backend backend);

  const std::vector<int>& sites() const { return sites_; }
  int n() const { return n_; }
  const Generator& generator() const { return g_; }

  // R_{A,t}[rho] and R^dag_{A,t}[X] on the full register
  Mat apply(const Mat& rho, double t) const;
  Mat apply_adjoint(const Mat& X, double t) const;
  // L^dag[X] lifted to the full register
  Mat heisenberg(const Mat& X) const;
  // e^{t L^dag}[X]
  Mat evolve_adjoint(const Mat& X, double t) const;
  // L^dag R^dag_t [X] = (e^{t L^dag} X - X) / t
  Mat stationarity(const Mat& X, double t) const;

  // generic f(L) on the spectral backend, lifted to the full register
  Mat apply_function(const std::function<double(double)>& f, const Mat& X, bool heisenberg) const;

 private:
  Mat lift(const std::function<Mat(const Mat&)>& local, const Mat& X) const;
  Mat time_average_local(const Mat& Xs, double t, bool heisenberg) const;

  int n_ = 0;
  std::vector<int> sites_;
  Generator g_;
  Backend backend_;
  std::shared_ptr<SpectralForm> sf_;
};

// R_{A,t} as a map; needs t > 0
SuperOp time_averaged_map(const Generator& g, double t, Backend backend);

// (1/t) int_0^t e^{sF} X ds by integrating the pair (Y, Z) with Y' = F Y, Z' = Y
Mat ode_time_average(const std::function<Mat(const Mat&)>& f, const Mat& X, double t);

struct RecoveryRow {
  double t = 0.0;
  double err = 0.0;           // ||R_t[rho_{-A}] - rho||_1
  double dirichlet = 0.0;     // E_A(R^dag_t[X]) for the probe X
  double bound = 0.0;         // 2/t
  double stationarity = 0.0;  // ||L^dag R^dag_t X||
  double fixed_point = 0.0;   // ||R_t[rho] - rho||_1
};

struct RecoveryCurve {
  std::vector<RecoveryRow> rows;
  double fitted_exponent = 0.0;  // slope of log err against log t
  double err_ratio = 0.0;        // err(t_max) / err(t_min)
};

RecoveryCurve recovery_error_curve(const RecoveryScenario& s);

struct TruncationRow {
  double t = 0.0;
  int ell = 0;
  double err_full = 0.0;
  double err_trunc = 0.0;
  double map_gap = 0.0;
};

// one row per (ell, t); ells defaults to 1 .. saturation when empty
std::vector<TruncationRow> truncated_recovery_error(const RecoveryScenario& s, std::vector<int> ells = {});

// smallest ell with H_ell = H
int saturating_ell(const Hamiltonian& H, const Region& A);

struct PatchOptions {
  bool discard = false;  // apply Tr_A (x) tau_A before each recovery
  int rounds = 1;
  Backend backend = Backend::spectral;
  WeightKind weight = WeightKind::metropolis;
  double omega_gamma = 0.0;
};

struct PatchResult {
  Mat state;
  double err = 0.0;                // ||state - rho||_1
  double initial_err = 0.0;        // ||tau - rho||_1
  std::vector<double> after_patch;  // err after each patch application
};

PatchResult patching_prepare(const Hamiltonian& H, double beta, double sigma, int patch_size, int ell, double t,
                             const PatchOptions& opt = {});

// min eigenvalue of the Choi matrix of R_t (n <= 3)
double choi_min_eigenvalue(const LocalRecovery& r, double t);

}  // namespace qmarkov
