#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qmarkov/linalg.hpp"
#include "qmarkov/spinsys.hpp"

namespace qmarkov {

struct Tripartition {
  Region A, B, C;
  // disjoint and covering 0..n-1
  void validate(int n) const;
};

// natural-log entropy; eigenvalues below 1e-14 contribute nothing
double von_neumann_entropy(const Mat& rho);

// S(AB) + S(BC) - S(B) - S(ABC)
double qcmi(const Mat& rho, const Tripartition& p);

// binary entropy in nats
double binary_entropy(double p);

struct CmiBound {
  double value = 0.0;
  bool clamped = false;
};
// delta log dimC + h2(delta)
CmiBound cmi_recovery_bound(double delta, long dimC);

struct CmiRow {
  int dist = 0;  // graph distance between A and C
  Tripartition parts;
  double qcmi = 0.0;
};

struct CmiScan {
  std::vector<CmiRow> rows;
  std::optional<double> slope;  // of log qcmi against dist
  std::optional<double> r2;
  std::string note;
};

// A = {0}, B = {1..b}, C = the rest, for b = 1 .. n-2
CmiScan cmi_decay_scan(const Hamiltonian& H, double beta, double fit_floor = 1e-12);

struct LinearFit {
  double slope = 0.0, intercept = 0.0, r2 = 0.0;
};
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace qmarkov
