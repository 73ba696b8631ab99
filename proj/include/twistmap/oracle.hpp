#pragma once

#include "twistmap/mapping.hpp"

namespace twistmap {

// Independent grid evolution of one angular sector under the CK Hamiltonian,
//
//   i du/dt = -(w/2m)[u'' + u'/rho - l^2 u/rho^2] + (m omega^2 rho^2/(2w)) u
//             + omega l u,
//
// by Crank-Nicolson with time-centered coefficients on the half-offset grid
// and 4th-order differences in rho.  The interior stencil is exactly
// self-adjoint in the rho-weighted inner product, so the step conserves the
// norm to roundoff (the origin fold leaves one off-symmetric coefficient
// pair; its effect sits below 1e-10 per 1e4 steps and the norm guard watches
// it).  Used to validate every analytic construction at desk scale.
//
// energy_shift subtracts a constant from the Hamiltonian; that changes the
// solution by the exact global phase exp(i shift t), which comparisons
// optimize away, and keeps the Crank-Nicolson phase error of the occupied
// levels small at the documented dt.

struct EvolveOptions {
  double dt = 1e-3;
  double energy_shift = 0.0;
  // optional time-dependent shift (overrides energy_shift when set); tracking
  // the instantaneous mean energy keeps the occupied levels centered in every
  // segment of a structured profile
  std::function<double(double)> energy_shift_fn;
  int store_every = 0;  // snapshots every k steps (0: first and last only)
  double boundary_probability_limit = 1e-3;
};

struct EvolvedState {
  RadialGrid grid;
  int l = 0;
  std::vector<double> times;
  std::vector<std::vector<Complex>> snapshots;
  std::vector<double> norm_history;
  bool dt_warning = false;  // dt above the kinetic-resolution guideline

  const std::vector<Complex>& at_time(double t) const;
};

EvolvedState evolve(std::vector<Complex> initial, int l, const FieldProfile& profile,
                    double t_begin, double t_end, const RadialGrid& grid,
                    const EvolveOptions& options);

// (L2 distance, |overlap|) between a stored oracle snapshot and the mapped
// state at the same time, after optimizing a single global phase.
std::pair<double, double> compare(const EvolvedState& evolved, const MappedState& mapped,
                                  double t2);

void write_snapshot_csv(const RadialGrid& grid, const std::vector<Complex>& u,
                        const std::string& path);

}  // namespace twistmap
