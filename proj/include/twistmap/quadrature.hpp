#pragma once

#include <functional>
#include <vector>

#include "twistmap/common.hpp"

namespace twistmap {

struct Quadrature {
  std::vector<double> x;
  std::vector<double> w;

  double integrate(const std::function<double(double)>& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * f(x[i]);
    return s;
  }
};

// Gauss-Legendre nodes and weights on [a, b].
Quadrature gauss_legendre(int n, double a, double b);

// Integral of f over [a, b], doubling the rule order until two successive
// estimates agree to rel_tol.  Throws QuadratureError on non-convergence.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol = 1e-13);

}  // namespace twistmap
