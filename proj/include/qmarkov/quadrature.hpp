#pragma once

#include <vector>

namespace qmarkov {

struct GaussLegendre {
  std::vector<double> x;  // nodes on [-1, 1], ascending
  std::vector<double> w;
};

// cached per order; Newton iteration on P_n
const GaussLegendre& gauss_legendre(int order);

// composite rule on [a, b] with equal panels
template <class F>
auto integrate_panels(F&& f, double a, double b, int panels, int order = 20) {
  const auto& gl = gauss_legendre(order);
  const double h = (b - a) / panels;
  decltype(f(a)) acc{};
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    for (size_t i = 0; i < gl.x.size(); ++i) acc += (0.5 * h * gl.w[i]) * f(mid + 0.5 * h * gl.x[i]);
  }
  return acc;
}

// composite rule over consecutive breakpoints
template <class F>
auto integrate_breaks(F&& f, const std::vector<double>& breaks, int panels_per_piece, int order = 20) {
  decltype(f(breaks.front())) acc{};
  for (size_t k = 0; k + 1 < breaks.size(); ++k)
    if (breaks[k + 1] > breaks[k]) acc += integrate_panels(f, breaks[k], breaks[k + 1], panels_per_piece, order);
  return acc;
}

}  // namespace qmarkov
