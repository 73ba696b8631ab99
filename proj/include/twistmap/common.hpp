#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace twistmap {

using Complex = std::complex<double>;

constexpr double kPi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// Error hierarchy.  All recoverable failures carry the offending time or
// field path so scenario drivers can report where a run broke.
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Configuration / precondition violations (CLI exit code 2).
struct ConfigError : Error {
  using Error::Error;
};

// Time argument outside a profile's span.
struct RangeError : Error {
  using Error::Error;
};

// Adaptive integrator could not take a step.
struct IntegratorError : Error {
  IntegratorError(const std::string& what, double t) : Error(what), time(t) {}
  double time;
};

// Envelope collapsed below the b-floor, or a QAT caustic was hit.
struct SingularityError : Error {
  SingularityError(const std::string& what, double t) : Error(what), time(t) {}
  double time;
};

// QAT / pair-ratio mapping undefined (u2 zero crossing).
struct LocalityError : Error {
  LocalityError(const std::string& what, double t) : Error(what), time(t) {}
  double time;
};

// Quadrature failed to reach the requested residual.
struct QuadratureError : Error {
  QuadratureError(const std::string& what, double r) : Error(what), residual(r) {}
  double residual;
};

// ---------------------------------------------------------------------------
// Parallel helper.  Worker count comes from TWISTMAP_WORKERS (default: all
// cores).  Results are written to index-addressed slots, so the output is
// deterministic regardless of the worker count.
// ---------------------------------------------------------------------------

std::size_t worker_count();
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

// Locale-independent shortest-exact decimal form with 17 significant digits;
// the one formatting used in every CSV we emit, so identical runs produce
// byte-identical files.
std::string format_g17(double v);

}  // namespace twistmap
