#include "twistmap/oracle.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#define LAPACK_COMPLEX_CPP
#include <lapacke.h>

namespace twistmap {

namespace {

constexpr int kBand = 2;  // 5-point stencil: two sub/super diagonals

// Banded (5-diagonal) real matrix, stored by diagonals: diag(d)[j] = A(j, j+d)
struct Banded {
  int n = 0;
  // offsets -2..2 -> index d+2
  std::vector<std::array<double, 5>> rows;

  explicit Banded(int n_) : n(n_), rows(n_, {0, 0, 0, 0, 0}) {}
  double& at(int i, int j) { return rows[i][j - i + kBand]; }
  double get(int i, int j) const {
    const int d = j - i + kBand;
    if (j < 0 || j >= n || d < 0 || d > 4) return 0.0;
    return rows[i][d];
  }
};

// 4th-order radial operator u'' + u'/rho - l^2 u / rho^2 on the half-offset
// grid, with the parity fold u(-rho) = (-1)^{|l|} u(rho) at the axis and
// Dirichlet ghosts outside rho_max.
//
// The interior stencil is exactly self-adjoint in the rho-weighted inner
// product (the D2 and D1/rho asymmetries cancel identically for the central
// coefficients).  Only the fold-generated (0,1)/(1,0) pair is asymmetric;
// averaging it away would perturb those coefficients at O(1/h^2) and wreck
// the origin accuracy for l = 0 states, so the consistent form is kept and
// the residual non-Hermiticity (one corner pair, measured norm drift at
// roundoff level over 1e4 steps) is monitored by the norm guard instead.
Banded radial_operator(const RadialGrid& grid, int l) {
  const int n = grid.n;
  const double h = grid.h;
  const double sign = (std::abs(l) % 2 == 0) ? 1.0 : -1.0;
  Banded op(n);
  const double c2[5] = {-1.0, 16.0, -30.0, 16.0, -1.0};   // /12h^2
  const double c1[5] = {1.0, -8.0, 0.0, 8.0, -1.0};       // /12h
  for (int i = 0; i < n; ++i) {
    const double rho = grid.rho(i);
    for (int s = -2; s <= 2; ++s) {
      const int j = i + s;
      const double coef = c2[s + 2] / (12.0 * h * h) + c1[s + 2] / (12.0 * h * rho);
      if (j >= 0 && j < n) {
        op.at(i, j) += coef;
      } else if (j < 0) {
        op.at(i, -j - 1) += sign * coef;  // fold across the axis
      }
      // j >= n: Dirichlet, drop
    }
    op.at(i, i) += -static_cast<double>(l) * l / (rho * rho);
  }
  return op;
}

void banded_matvec(const Banded& a, const std::vector<Complex>& x, std::vector<Complex>& y) {
  const int n = a.n;
  for (int i = 0; i < n; ++i) {
    Complex acc = 0.0;
    for (int s = -2; s <= 2; ++s) {
      const int j = i + s;
      if (j < 0 || j >= n) continue;
      acc += a.rows[i][s + kBand] * x[j];
    }
    y[i] = acc;
  }
}

double weighted_norm2(const RadialGrid& grid, const std::vector<Complex>& u) {
  double s = 0.0;
  for (int j = 0; j < grid.n; ++j) s += std::norm(u[j]) * grid.rho(j);
  return 2.0 * kPi * s * grid.h;
}

}  // namespace

const std::vector<Complex>& EvolvedState::at_time(double t) const {
  for (std::size_t i = 0; i < times.size(); ++i)
    if (std::fabs(times[i] - t) <= 1e-9 * std::max(1.0, std::fabs(t))) return snapshots[i];
  throw ConfigError("no stored snapshot at t = " + std::to_string(t));
}

EvolvedState evolve(std::vector<Complex> initial, int l, const FieldProfile& profile,
                    double t_begin, double t_end, const RadialGrid& grid,
                    const EvolveOptions& options) {
  const int n = grid.n;
  if (static_cast<int>(initial.size()) != n)
    throw ConfigError("initial samples do not match the grid");
  if (!(options.dt > 0.0)) throw ConfigError("dt must be > 0");
  if (options.dt > 0.01 / profile.omega0() * (1.0 + 1e-12))
    throw ConfigError("dt must resolve the cyclotron scale: dt <= 0.01/omega0");

  const double mass = profile.mass();
  const Banded lap = radial_operator(grid, l);

  EvolvedState out;
  out.grid = grid;
  out.l = l;
  // kinetic-resolution guideline (advisory: Crank-Nicolson stays stable but
  // dephases grid-scale modes when dt is larger)
  double w_max = 0.0;
  for (int j = 0; j <= 100; ++j)
    w_max = std::max(w_max, profile.dissipation(t_begin + (t_end - t_begin) * j / 100.0));
  out.dt_warning = options.dt > 0.5 * mass * grid.h * grid.h / (2.0 * w_max);

  const long steps = std::lround(std::ceil((t_end - t_begin) / options.dt - 1e-9));
  const double dt = (t_end - t_begin) / static_cast<double>(steps);

  std::vector<Complex> u = std::move(initial);
  std::vector<Complex> rhs(n), hu(n);
  std::vector<Complex> ab(static_cast<std::size_t>(2 * kBand + kBand + 1) * n);
  std::vector<lapack_int> ipiv(n);
  const int ldab = 3 * kBand + 1;

  const double norm0 = weighted_norm2(grid, u);
  auto store = [&](double t) {
    out.times.push_back(t);
    out.snapshots.push_back(u);
    out.norm_history.push_back(weighted_norm2(grid, u));
  };
  store(t_begin);

  const int tail = std::max(1, n / 50);  // outer 2% of the box
  for (long step = 0; step < steps; ++step) {
    const double t_mid = t_begin + (step + 0.5) * dt;
    const double w = profile.dissipation(t_mid);
    const double om2 = profile.omega2(t_mid);
    const double om = profile.omega(t_mid);
    const double kin = -w / (2.0 * mass);
    const double shift =
        options.energy_shift_fn ? options.energy_shift_fn(t_mid) : options.energy_shift;

    // rhs = (I - i dt/2 H) u
    banded_matvec(lap, u, hu);
    for (int j = 0; j < n; ++j) {
      const double rho = grid.rho(j);
      const double v = 0.5 * mass * om2 * rho * rho / w + om * l - shift;
      const Complex h_u = kin * hu[j] + v * u[j];
      rhs[j] = u[j] - Complex(0.0, 0.5 * dt) * h_u;
    }

    // A = I + i dt/2 H in LAPACK banded storage
    std::fill(ab.begin(), ab.end(), Complex(0.0));
    for (int j = 0; j < n; ++j) {
      const double rho_j = grid.rho(j);
      const double vj = 0.5 * mass * om2 * rho_j * rho_j / w + om * l - shift;
      for (int s = -2; s <= 2; ++s) {
        const int i = j + s;  // row index
        if (i < 0 || i >= n) continue;
        double hij = kin * lap.get(i, j);
        if (i == j) hij += vj;
        Complex aij = Complex(0.0, 0.5 * dt) * hij;
        if (i == j) aij += 1.0;
        ab[static_cast<std::size_t>(j) * ldab + (2 * kBand + i - j)] = aij;
      }
    }
    lapack_int info = LAPACKE_zgbtrf(LAPACK_COL_MAJOR, n, n, kBand, kBand,
                                     reinterpret_cast<lapack_complex_double*>(ab.data()), ldab,
                                     ipiv.data());
    if (info != 0) throw Error("banded factorization failed at step " + std::to_string(step));
    info = LAPACKE_zgbtrs(LAPACK_COL_MAJOR, 'N', n, kBand, kBand, 1,
                          reinterpret_cast<lapack_complex_double*>(ab.data()), ldab, ipiv.data(),
                          reinterpret_cast<lapack_complex_double*>(rhs.data()), n);
    if (info != 0) throw Error("banded solve failed at step " + std::to_string(step));
    u.swap(rhs);

    const bool last = step + 1 == steps;
    if ((options.store_every > 0 && (step + 1) % options.store_every == 0 && !last) || last)
      store(t_begin + (step + 1) * dt);

    if ((step & 255) == 0 || last) {
      const double norm = weighted_norm2(grid, u);
      double tail_prob = 0.0;
      for (int j = n - tail; j < n; ++j) tail_prob += std::norm(u[j]) * grid.rho(j);
      tail_prob *= 2.0 * kPi * grid.h;
      if (std::fabs(norm - norm0) > options.boundary_probability_limit * norm0 ||
          tail_prob > options.boundary_probability_limit * norm0)
        throw Error("outer boundary too close: probability reached the wall at t = " +
                    std::to_string(t_begin + (step + 1) * dt));
    }
  }
  return out;
}

std::pair<double, double> compare(const EvolvedState& evolved, const MappedState& mapped,
                                  double t2) {
  const std::vector<int> ls = mapped.sectors();
  bool has = false;
  for (int l : ls) has = has || (l == evolved.l);
  if (!has || ls.size() != 1)
    throw ConfigError("sector mismatch between the oracle evolution and the mapped state");

  const std::vector<Complex>& u = evolved.at_time(t2);
  const RadialGrid& grid = evolved.grid;
  double na = 0.0, nb = 0.0;
  Complex overlap = 0.0;
  for (int j = 0; j < grid.n; ++j) {
    const double rho = grid.rho(j);
    const Complex v = mapped.sector_value(evolved.l, rho, t2);
    const double w = rho * grid.h;
    na += std::norm(u[j]) * w;
    nb += std::norm(v) * w;
    overlap += std::conj(u[j]) * v * w;
  }
  na *= 2.0 * kPi;
  nb *= 2.0 * kPi;
  overlap *= 2.0 * kPi;
  const double fidelity = std::abs(overlap) / std::sqrt(na * nb);
  const double l2 = std::sqrt(std::max(0.0, na + nb - 2.0 * std::abs(overlap)));
  return {l2, fidelity};
}

void write_snapshot_csv(const RadialGrid& grid, const std::vector<Complex>& u,
                        const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path);
  out << "rho,re_u,im_u\n";
  for (int j = 0; j < grid.n; ++j)
    out << format_g17(grid.rho(j)) << ',' << format_g17(u[j].real()) << ','
        << format_g17(u[j].imag()) << '\n';
}

}  // namespace twistmap
