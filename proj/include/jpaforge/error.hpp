#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace jpaforge {

/// Classification of every failure the library reports. The CLI maps these
/// onto process exit codes, so the set is closed.
enum class ErrorKind {
  domain,                    // argument outside the physical domain
  singular_value,            // reciprocal of a zero immittance
  pole,                      // transformer denominator vanishes
  divergence,                // cos(pi*phi_dc/phi0) == 0
  degenerate_bias,           // sin(pi*phi_dc/phi0) == 0 while pumping
  singular_operating_point,  // pumpistor branch denominator vanishes
  oscillation_threshold,     // reflection-gain denominator vanishes
  usage,                     // malformed request (empty grid, unknown name, ...)
  no_bandwidth,              // requested level above the curve peak
  degenerate_fit,            // rank-deficient least-squares design
  infeasible,                // optimizer found no feasible point
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::domain: return "domain";
    case ErrorKind::singular_value: return "singular_value";
    case ErrorKind::pole: return "pole";
    case ErrorKind::divergence: return "divergence";
    case ErrorKind::degenerate_bias: return "degenerate_bias";
    case ErrorKind::singular_operating_point: return "singular_operating_point";
    case ErrorKind::oscillation_threshold: return "oscillation_threshold";
    case ErrorKind::usage: return "usage";
    case ErrorKind::no_bandwidth: return "no_bandwidth";
    case ErrorKind::degenerate_fit: return "degenerate_fit";
    case ErrorKind::infeasible: return "infeasible";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised when a transformer is evaluated at (or within the detection
/// threshold of) its half-wave cutoff. Carries the cutoff in rad/s.
class PoleError : public Error {
 public:
  PoleError(const std::string& what, double cutoff_rad_per_s)
      : Error(ErrorKind::pole, what), cutoff_(cutoff_rad_per_s) {}

  double cutoff_angular() const noexcept { return cutoff_; }

 private:
  double cutoff_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace jpaforge
