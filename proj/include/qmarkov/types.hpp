#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qmarkov {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

inline constexpr cplx I1{0.0, 1.0};

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvalidSize : Error {
  using Error::Error;
};
struct InvalidRegion : Error {
  using Error::Error;
};
struct InvalidParameter : Error {
  using Error::Error;
};
struct NumericDomain : Error {
  using Error::Error;
};
// size limit of a backend exceeded
struct CapacityError : Error {
  using Error::Error;
};
struct StiffnessError : Error {
  using Error::Error;
};

// Sorted set of sites. Site 0 is the most significant tensor factor.
struct Region {
  std::vector<int> sites;

  Region() = default;
  Region(std::initializer_list<int> s);
  explicit Region(std::vector<int> s);

  bool empty() const { return sites.empty(); }
  int size() const { return static_cast<int>(sites.size()); }
  bool contains(int s) const;
  bool intersects(const std::vector<int>& other) const;
};

Region region_union(const Region& a, const Region& b);
Region complement(const Region& a, int n);

}  // namespace qmarkov
