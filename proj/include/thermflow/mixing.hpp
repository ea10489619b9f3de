#pragma once

#include <unsupported/Eigen/MatrixFunctions>

#include "thermflow/davies.hpp"
#include "thermflow/support_number.hpp"

namespace thermflow {

struct MixingBound {
  double tau = 0;
  double rho_inv_norm = 0;  // |rho_beta^{-1}|_inf = 1 / min_s p(s)
  double t_mix = 0;         // tau (ln(4) + ln(rho_inv_norm)/2)
};

/// Mixing-time bound from a support number: by the time t_mix, the trace
/// distance to the Gibbs state is below 1/4 from any initial state, via the
/// envelope sqrt(rho_inv_norm) e^{-t/tau}.
inline MixingBound mixing_time_bound(const StabilizerHamiltonian& H, double beta, double tau) {
  MixingBound out;
  out.tau = tau;
  out.rho_inv_norm = 1.0 / H.gibbs(beta).min_p();
  out.t_mix = tau * (std::log(4.0) + 0.5 * std::log(out.rho_inv_norm));
  return out;
}

inline double envelope(const MixingBound& b, double t) {
  return std::sqrt(b.rho_inv_norm) * std::exp(-t / b.tau);
}

inline double trace_distance(const Mat& a, const Mat& b) {
  Eigen::SelfAdjointEigenSolver<Mat> es(a - b);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

struct MixingCurvePoint {
  double t = 0;
  double distance = 0;  // trace distance to the Gibbs state
  double envelope = 0;
};

/// Evolves rho(t) = e^{t L}(rho0) on a time grid (L is the Schroedinger-picture
/// generator, the transpose of lstar on Pauli coefficients) and records the
/// trace distance to the Gibbs state next to the certified envelope.
inline std::vector<MixingCurvePoint> mixing_curve(const DaviesGenerator& g, const Mat& rho0,
                                                  const std::vector<double>& times,
                                                  const MixingBound& bound) {
  const std::uint32_t n = g.H.n();
  if (rho0.rows() != (1 << n) || rho0.cols() != (1 << n))
    throw ValidationError("initial state has the wrong dimension");
  if (std::abs(std::abs(rho0.trace()) - 1.0) > 1e-9)
    throw ValidationError("initial state must have unit trace");
  Eigen::VectorXcd r0 = pauli_coefficients(rho0, n);
  Mat gibbs = dense_gibbs(g.H, g.beta);
  Eigen::MatrixXd lhat = g.lhat();
  std::vector<MixingCurvePoint> out;
  for (double t : times) {
    if (t < 0) throw ValidationError("times must be non-negative");
    Eigen::MatrixXd prop = (t * lhat).exp();
    Eigen::VectorXcd rt = prop.cast<std::complex<double>>() * r0;
    MixingCurvePoint pt;
    pt.t = t;
    pt.distance = trace_distance(materialize(rt, n), gibbs);
    pt.envelope = envelope(bound, t);
    out.push_back(pt);
  }
  return out;
}

/// First grid time at which the distance curve drops below 1/4 (never rises
/// back above in reversible dynamics; returns infinity if it stays above).
inline double quarter_crossing(const std::vector<MixingCurvePoint>& curve) {
  for (const auto& pt : curve)
    if (pt.distance <= 0.25) return pt.t;
  return std::numeric_limits<double>::infinity();
}

}  // namespace thermflow
