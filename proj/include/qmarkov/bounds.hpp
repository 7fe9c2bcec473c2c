#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qmarkov/lindblad.hpp"
#include "qmarkov/spinsys.hpp"

namespace qmarkov {

struct BoundReport {
  std::string name;
  long instances = 0;
  double max_violation = -1e300;  // max of (value - bound) / max(|bound|, floor); positive = violated
  double margin_min = 0.0;        // of bound - value
  double margin_median = 0.0;
  double tolerance = 1e-10;
  bool pass() const { return instances > 0 && max_violation <= tolerance; }
};

// collects (value, bound) pairs
class BoundAccumulator {
 public:
  explicit BoundAccumulator(std::string name, double tolerance = 1e-10, double floor = 1e-12);
  void add(double value, double bound);
  void merge(const BoundAccumulator& other);
  BoundReport report() const;

 private:
  std::string name_;
  double tol_, floor_;
  std::vector<double> margins_;
  double worst_ = -1e300;
};

// min(2, |A| (2 d |t|)^l / l! / (1 - 2/e)), for ||A|| = 1
double lr_bound(int region_size, int degree, int ell, double t);

// || e^{i H_l t} A e^{-i H_l t} - e^{i H t} A e^{-i H t} || against lr_bound for every t and every operator
BoundReport lr_truncation_check(const Hamiltonian& H, const Region& A, int ell, const std::vector<double>& t_grid,
                                const std::vector<Mat>& ops);

// max |rho - rho_{-A} - 2^{-(2|A|+1)} sum_S [S,[S,rho]]|
double double_commutator_identity(const Mat& rho, const Region& A);

struct ValueBound {
  double value = 0.0;
  double bound = 0.0;
};

// ||[A,O]||_rho vs (||rho^{1/4} A rho^{-1/4}|| + ||rho^{-1/4} A rho^{1/4}||) ||O||_rho
ValueBound holder_loose(const GibbsState& gs, const Mat& A, const Mat& O);

// ||e^{bH} S e^{-bH}|| vs (1 - 2 d |b|)^{-w}, S a Pauli string of weight w, |b| < 1/2d
ValueBound imaginary_conjugation(const Hamiltonian& H, const Spectrum& spec, const Mat& S, int weight, double beta);

// [prod_i A_i, O] = sum_j (prod_{i<j} A_i) [A_j, O] (prod_{i>j} A_i); max entry deviation
double leibniz_deviation(const std::vector<Mat>& factors, const Mat& O);

// randomized sweeps; every one is deterministic in the seed
BoundReport holder_loose_sweep(std::uint64_t seed, int count = 200);
BoundReport kms_norm_sweep(std::uint64_t seed, int count = 200);
BoundReport imaginary_conjugation_sweep(std::uint64_t seed, int count = 200);
BoundReport lr_sweep(std::uint64_t seed, int count = 200);

struct IdentityReport {
  std::string name;
  long instances = 0;
  double max_deviation = 0.0;
  double tolerance = 0.0;
  bool pass() const { return instances > 0 && max_deviation <= tolerance; }
};
IdentityReport double_commutator_sweep(std::uint64_t seed, int count = 50);
IdentityReport leibniz_sweep(std::uint64_t seed, int count = 50);

// smallest nonzero |eigenvalue| of the generator; nullopt when everything is kernel
std::optional<double> local_gap(const Generator& g, double kernel_tol = 1e-10);

struct GapDecayRow {
  double t = 0.0;
  double lhs = 0.0;  // ||e^{t L^dag} X - P^dag X||_rho
  double rhs = 0.0;  // e^{-gap t} ||X||_rho
};
struct GapDecayReport {
  double gap = 0.0;
  std::vector<GapDecayRow> rows;
  double worst_slack = 1e300;  // min of rhs - lhs
  bool pass(double tol = 1e-8) const { return !rows.empty() && worst_slack >= -tol; }
};
GapDecayReport gap_decay_check(const Generator& g, const std::vector<double>& times, int samples,
                               std::uint64_t seed);

struct CommutatorDirichletRow {
  double dirichlet = 0.0;
  double commutator = 0.0;  // ||[A, X]||_rho
  double t = 0.0;           // time average used to produce X, 0 for the raw sample
};
struct CommutatorDirichletReport {
  double kernel_dirichlet = 0.0;   // E of the projected kernel operator
  double kernel_commutator = 0.0;  // its commutator with the jump
  std::vector<CommutatorDirichletRow> rows;
  double envelope_slope = 0.0;  // of log commutator against log E, upper hull fit
  bool kernel_pass(double tol = 1e-5) const { return kernel_commutator <= tol; }
};
// single-jump generator; samples X with ||X|| = 1 and their time averages
CommutatorDirichletReport commutator_dirichlet_relation(const Generator& g, const Mat& jump, int samples,
                                                        const std::vector<double>& times, std::uint64_t seed);

// max over Pauli strings P of ||(L^dag - L_l^dag)[P]||, a proxy for the induced inf->inf norm
double quasilocal_proxy(const Hamiltonian& H, const Region& A, const Weight& w, int ell);

nlohmann::json to_json(const BoundReport& r);
nlohmann::json to_json(const IdentityReport& r);

}  // namespace qmarkov
