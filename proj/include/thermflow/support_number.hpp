#pragma once

#include "thermflow/forms.hpp"

namespace thermflow {

struct SupportNumber {
  bool finite = true;
  double tau = std::numeric_limits<double>::infinity();
  double kernel_leak = 0;  // norm of V restricted to ker(E), relative to |V|
};

/// Smallest tau with V <= tau E (as quadratic forms), computed on the range of
/// E via its pseudo-inverse square root. Infinite iff ker(E) is not contained
/// in ker(V), i.e. some direction has variance but no dissipation.
inline SupportNumber support_number_exact(const Eigen::MatrixXd& E, const Eigen::MatrixXd& V,
                                          double rel_tol = 1e-10) {
  if (E.rows() != E.cols() || V.rows() != V.cols() || E.rows() != V.rows())
    throw ValidationError("form matrices must be square and of equal size");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(E);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
  double emax = es.eigenvalues().cwiseAbs().maxCoeff();
  double cut = rel_tol * std::max(emax, 1e-300);
  double vnorm = std::max(V.cwiseAbs().maxCoeff(), 1e-300);

  std::vector<Eigen::Index> kernel, range;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    if (es.eigenvalues()(i) <= cut) kernel.push_back(i);
    else range.push_back(i);
  }
  SupportNumber out;
  if (!kernel.empty()) {
    Eigen::MatrixXd K(E.rows(), kernel.size());
    for (std::size_t j = 0; j < kernel.size(); ++j) K.col(j) = es.eigenvectors().col(kernel[j]);
    out.kernel_leak = (K.transpose() * V * K).cwiseAbs().maxCoeff() / vnorm;
    if (out.kernel_leak > 1e-9) {
      out.finite = false;
      return out;
    }
  }
  if (range.empty()) {  // E == 0 and V == 0 on everything
    out.tau = 0;
    return out;
  }
  Eigen::MatrixXd Wi(E.rows(), range.size());
  for (std::size_t j = 0; j < range.size(); ++j)
    Wi.col(j) = es.eigenvectors().col(range[j]) / std::sqrt(es.eigenvalues()(range[j]));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> pencil(Wi.transpose() * V * Wi);
  if (pencil.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
  out.tau = std::max(0.0, pencil.eigenvalues().maxCoeff());
  return out;
}

struct CertificateCheck {
  double tau = 0;
  double certificate_eig = 0;  // min eig of tau E - V   (>= -tol |V| certifies)
  double witness_eig = 0;      // min eig of (1-delta) tau E - V  (< 0 shows sharpness)
  bool certified = false;
  bool sharp = false;
};

/// Certifies tau: tau E - V must be PSD up to tolerance, and shaving a
/// relative delta off tau must break positivity (so tau is not an
/// overestimate by more than delta).
inline CertificateCheck certify_support_number(const Eigen::MatrixXd& E,
                                               const Eigen::MatrixXd& V, double tau,
                                               double delta = 1e-3) {
  CertificateCheck out;
  out.tau = tau;
  double vnorm = std::max(V.cwiseAbs().maxCoeff(), 1e-300);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> hi(tau * E - V);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> lo((1 - delta) * tau * E - V);
  if (hi.info() != Eigen::Success || lo.info() != Eigen::Success)
    throw std::runtime_error("eigensolver failed");
  out.certificate_eig = hi.eigenvalues().minCoeff();
  out.witness_eig = lo.eigenvalues().minCoeff();
  out.certified = out.certificate_eig >= -1e-8 * vnorm;
  out.sharp = out.witness_eig < 0;
  return out;
}

struct FlowBound {
  double f_bar = 0;
  double c_lower = 0;
  double tau_bound = 0;  // (4 n / c_lower) e^{beta f_bar}
};

/// Certified upper bound on the support number from a free-energy certificate.
inline FlowBound support_number_flow_bound(const StabilizerHamiltonian& H,
                                           const FreeEnergyCertificate& cert,
                                           const RateFunction& rate) {
  if (std::abs(rate.beta - cert.beta) > 1e-12 * std::max(1.0, std::abs(cert.beta)))
    throw ValidationError("certificate and rate function use different temperatures");
  FlowBound out;
  out.f_bar = cert.f_bar;
  out.c_lower = rate.c_lower();
  out.tau_bound = (4.0 * H.n() / out.c_lower) * std::exp(cert.beta * cert.f_bar);
  return out;
}

}  // namespace thermflow
