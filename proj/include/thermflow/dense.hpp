#pragma once

#include <Eigen/Dense>
#include <complex>

#include "thermflow/hamiltonian.hpp"

namespace thermflow {

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline constexpr std::uint32_t kDenseCap = 5;  // 4^n x 4^n superoperators beyond this blow up

inline void check_dense_cap(std::uint32_t n) {
  if (n > kDenseCap)
    throw CapError("dense representation capped at " + std::to_string(kDenseCap) + " qubits");
}

/// Reverses the low `n` bits of `s` (maps site-major masks, qubit 1 = bit 0,
/// to computational-basis masks, qubit 1 = most significant factor).
inline std::uint64_t reverse_bits(std::uint64_t s, std::uint32_t n) {
  std::uint64_t out = 0;
  for (std::uint32_t j = 0; j < n; ++j)
    if ((s >> j) & 1) out |= std::uint64_t(1) << (n - 1 - j);
  return out;
}

/// Hermitian matrix of a Pauli word: i^{|x&z|} X^x Z^z, qubit 1 leftmost
/// (most significant) tensor factor.
inline Mat pauli_matrix(const PauliOperator& p) {
  check_dense_cap(p.n);
  const std::uint64_t dim = std::uint64_t(1) << p.n;
  const std::uint64_t xr = reverse_bits(p.x, p.n);
  const std::uint64_t zr = reverse_bits(p.z, p.n);
  static const std::complex<double> ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  std::complex<double> phase = ipow[std::popcount(p.x & p.z) & 3];
  Mat m = Mat::Zero(dim, dim);
  for (std::uint64_t c = 0; c < dim; ++c) {
    double sign = (std::popcount(zr & c) & 1) ? -1.0 : 1.0;
    m(c ^ xr, c) = phase * sign;
  }
  return m;
}

inline Mat dense_hamiltonian(const StabilizerHamiltonian& H) {
  check_dense_cap(H.n());
  const std::uint64_t dim = std::uint64_t(1) << H.n();
  Mat m = Mat::Zero(dim, dim);
  for (const auto& t : H.terms()) m -= t.J * pauli_matrix(t.g);
  return m;
}

/// Joint eigenbasis of the stabilizer generators (and hence of H): columns of
/// `basis` are orthonormal eigenvectors, `syndrome[k]` / `energy[k]` label
/// column k. Obtained by diagonalising an encoder with base-3 weights, whose
/// eigenvalues read off the syndrome digits exactly.
struct CodeEigensystem {
  Mat basis;
  std::vector<Syndrome> syndrome;
  Eigen::VectorXd energy;
};

inline CodeEigensystem code_eigensystem(const StabilizerHamiltonian& H) {
  check_dense_cap(H.n());
  const std::uint64_t dim = std::uint64_t(1) << H.n();
  const std::uint32_t r = H.rank();
  Mat enc = Mat::Zero(dim, dim);
  for (std::uint32_t j = 0; j < r; ++j) {
    double w = std::pow(3.0, double(j));
    Mat gj = pauli_matrix(H.basis().generators()[j]);
    enc += (w / 2.0) * (Mat::Identity(dim, dim) - gj);
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(enc);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
  CodeEigensystem out;
  out.basis = es.eigenvectors();
  out.syndrome.resize(dim);
  out.energy.resize(dim);
  for (std::uint64_t k = 0; k < dim; ++k) {
    double v = es.eigenvalues()(k);
    std::uint64_t mask = 0;
    for (std::uint32_t j = r; j-- > 0;) {
      double w = std::pow(3.0, double(j));
      if (v >= w / 2.0) {
        mask |= std::uint64_t(1) << j;
        v -= w;
      }
    }
    if (std::abs(v) > 1e-6)
      throw std::runtime_error("syndrome encoder produced a non-integer eigenvalue");
    out.syndrome[k] = Syndrome{mask, r};
    out.energy(k) = H.syndrome_energy(out.syndrome[k]);
  }
  return out;
}

inline Mat dense_gibbs(const StabilizerHamiltonian& H, double beta) {
  auto eig = code_eigensystem(H);
  auto gibbs = H.gibbs(beta);
  const std::uint64_t dim = std::uint64_t(1) << H.n();
  Eigen::VectorXd w(dim);
  for (std::uint64_t k = 0; k < dim; ++k) w(k) = gibbs(eig.syndrome[k]);
  return eig.basis * w.asDiagonal() * eig.basis.adjoint();
}

}  // namespace thermflow
