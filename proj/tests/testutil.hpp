#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace testutil {

// Central finite differences of a scalar function at x.
inline std::vector<double> fd_gradient(
    const std::function<double(std::span<const double>)>& f,
    std::vector<double> x, double h = 1e-6) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double x0 = x[i];
    x[i] = x0 + h;
    const double up = f(x);
    x[i] = x0 - h;
    const double dn = f(x);
    x[i] = x0;
    g[i] = (up - dn) / (2.0 * h);
  }
  return g;
}

// || a - b || / max(||b||, floor)
inline double rel_err(std::span<const double> a, std::span<const double> b,
                      double floor = 1e-8) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    num += d * d;
    den += b[i] * b[i];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), floor);
}

}  // namespace testutil
