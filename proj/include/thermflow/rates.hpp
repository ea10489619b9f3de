#pragma once

#include <cmath>
#include <string>

#include "thermflow/pauli.hpp"

namespace thermflow {

enum class RateKind { Glauber, Metropolis };

inline std::string to_string(RateKind k) {
  return k == RateKind::Glauber ? "glauber" : "metropolis";
}

inline RateKind parse_rate_kind(const std::string& s) {
  if (s == "glauber") return RateKind::Glauber;
  if (s == "metropolis") return RateKind::Metropolis;
  throw ValidationError("unknown rate kind '" + s + "' (expected glauber or metropolis)");
}

/// Transition rate function h(omega) on the reachable Bohr-frequency window
/// [-delta_max, delta_max], satisfying the KMS condition h(-w) = h(w) e^{-beta w}.
/// Convention: omega is the energy *drop* of the jump, so downhill moves are fast
/// (h -> 1 for large positive omega).
struct RateFunction {
  RateKind kind = RateKind::Glauber;
  double beta = 0;
  double delta_max = 0;

  static RateFunction glauber(double beta, double delta_max) {
    return RateFunction{RateKind::Glauber, beta, delta_max};
  }
  static RateFunction metropolis(double beta, double delta_max) {
    return RateFunction{RateKind::Metropolis, beta, delta_max};
  }
  static RateFunction make(RateKind kind, double beta, double delta_max) {
    return RateFunction{kind, beta, delta_max};
  }

  double operator()(double omega) const {
    if (std::abs(omega) > delta_max * (1 + 1e-12) + 1e-12)
      throw ValidationError("rate function evaluated at omega outside the reachable window");
    if (kind == RateKind::Glauber) return 1.0 / (1.0 + std::exp(-beta * omega));
    return std::min(1.0, std::exp(beta * omega));  // Metropolis
  }

  /// Infimum of h over the reachable window (attained at -delta_max).
  double c_lower() const {
    if (kind == RateKind::Glauber) return 1.0 / (1.0 + std::exp(beta * delta_max));
    return std::exp(-beta * delta_max);
  }

  /// Supremum of h over the reachable window.
  double C_upper() const {
    if (kind == RateKind::Glauber) return 1.0 / (1.0 + std::exp(-beta * delta_max));
    return 1.0;
  }
};

}  // namespace thermflow
