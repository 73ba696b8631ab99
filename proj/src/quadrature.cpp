#include "twistmap/quadrature.hpp"

#include <cmath>
#include <limits>

namespace twistmap {

Quadrature gauss_legendre(int n, double a, double b) {
  if (n < 1) throw ConfigError("quadrature order must be >= 1");
  Quadrature q;
  q.x.resize(n);
  q.w.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Newton iteration on P_n from the Chebyshev-like initial guess
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / pp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    const double xm = 0.5 * (b + a);
    const double xl = 0.5 * (b - a);
    q.x[i] = xm - xl * x;
    q.x[n - 1 - i] = xm + xl * x;
    const double w = 2.0 * xl / ((1.0 - x * x) * pp * pp);
    q.w[i] = w;
    q.w[n - 1 - i] = w;
  }
  return q;
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol) {
  double prev = gauss_legendre(32, a, b).integrate(f);
  double residual = std::numeric_limits<double>::infinity();
  for (int n = 64; n <= 4096; n *= 2) {
    const double cur = gauss_legendre(n, a, b).integrate(f);
    residual = std::fabs(cur - prev) / std::max(std::fabs(cur), 1e-300);
    if (residual <= rel_tol) return cur;
    prev = cur;
  }
  throw QuadratureError("quadrature did not converge; achieved relative residual " +
                            std::to_string(residual),
                        residual);
}

}  // namespace twistmap
