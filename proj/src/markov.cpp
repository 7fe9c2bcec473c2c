#include "qmarkov/markov.hpp"

#include <cmath>
#include <iostream>

#include "qmarkov/parallel.hpp"

namespace qmarkov {

void Tripartition::validate(int n) const {
  std::vector<int> seen(n, 0);
  for (const Region* r : {&A, &B, &C})
    for (int s : r->sites) {
      if (s < 0 || s >= n) throw InvalidRegion("tripartition site " + std::to_string(s) + " outside the system");
      if (seen[s]++) throw InvalidRegion("tripartition regions overlap at site " + std::to_string(s));
    }
  for (int s = 0; s < n; ++s)
    if (!seen[s]) throw InvalidRegion("tripartition misses site " + std::to_string(s));
}

double von_neumann_entropy(const Mat& rho) {
  if (rho.rows() != rho.cols()) throw InvalidSize("entropy needs a square matrix");
  if (std::abs(rho.trace() - 1.0) > 1e-8) throw InvalidParameter("entropy: trace deviates from 1");
  Mat h = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (long i = 0; i < es.eigenvalues().size(); ++i) {
    const double p = es.eigenvalues()(i);
    if (p > 1e-14) s -= p * std::log(p);
  }
  return s;
}

double qcmi(const Mat& rho, const Tripartition& p) {
  int n = 0;
  while ((1L << n) < rho.rows()) ++n;
  p.validate(n);
  auto S_of = [&](const Region& keep) {
    if (keep.empty()) return 0.0;
    return von_neumann_entropy(partial_trace(rho, complement(keep, n), n));
  };
  const double sAB = S_of(region_union(p.A, p.B));
  const double sBC = S_of(region_union(p.B, p.C));
  const double sB = S_of(p.B);
  const double sABC = von_neumann_entropy(rho);
  return sAB + sBC - sB - sABC;
}

double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log(p) - (1.0 - p) * std::log1p(-p);
}

CmiBound cmi_recovery_bound(double delta, long dimC) {
  if (dimC < 1) throw InvalidParameter("cmi_recovery_bound needs dimC >= 1");
  CmiBound b;
  if (delta < 0.0 || delta > 1.0) {
    std::cerr << "warning: cmi_recovery_bound clamps delta=" << delta << " into [0,1]\n";
    delta = std::clamp(delta, 0.0, 1.0);
    b.clamped = true;
  }
  b.value = delta * std::log(static_cast<double>(dimC)) + binary_entropy(delta);
  return b;
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  LinearFit f;
  const size_t m = x.size();
  if (m < 2 || y.size() != m) return f;
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < m; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (size_t i = 0; i < m; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

CmiScan cmi_decay_scan(const Hamiltonian& H, double beta, double fit_floor) {
  const int n = H.n();
  if (n > 12) throw CapacityError("cmi scan limited to n <= 12");
  if (n < 3) throw InvalidSize("cmi scan needs n >= 3");
  const GibbsState gs = gibbs(hermitian_eig(H.dense()), beta);
  CmiScan scan;
  const int count = n - 2;
  scan.rows.resize(count);
  parallel_for(count, [&](long k) {
    const int b = static_cast<int>(k) + 1;
    CmiRow& row = scan.rows[k];
    std::vector<int> Bs, Cs;
    for (int s = 1; s <= b; ++s) Bs.push_back(s);
    for (int s = b + 1; s < n; ++s) Cs.push_back(s);
    row.parts = {Region{0}, Region(Bs), Region(Cs)};
    auto d = graph_distance(H, row.parts.A, row.parts.C);
    row.dist = d ? *d : -1;
    row.qcmi = qcmi(gs.rho, row.parts);
  });
  std::vector<double> xs, ys;
  for (const auto& r : scan.rows)
    if (r.qcmi > fit_floor && r.dist > 0) {
      xs.push_back(r.dist);
      ys.push_back(std::log(r.qcmi));
    }
  if (xs.size() < 2) {
    scan.note = "fit skipped: fewer than two values above the floor";
    return scan;
  }
  LinearFit f = linear_fit(xs, ys);
  scan.slope = f.slope;
  scan.r2 = f.r2;
  return scan;
}

}  // namespace qmarkov
