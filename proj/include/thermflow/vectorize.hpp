#pragma once

#include "thermflow/dense.hpp"

namespace thermflow {

/// tr(M(p) a) computed from the sparse structure of the Pauli matrix.
inline std::complex<double> pauli_trace(const PauliOperator& p, const Mat& a) {
  const std::uint64_t dim = std::uint64_t(1) << p.n;
  const std::uint64_t xr = reverse_bits(p.x, p.n);
  const std::uint64_t zr = reverse_bits(p.z, p.n);
  static const std::complex<double> ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  std::complex<double> phase = ipow[std::popcount(p.x & p.z) & 3];
  std::complex<double> acc = 0;
  for (std::uint64_t c = 0; c < dim; ++c) {
    double sign = (std::popcount(zr & c) & 1) ? -1.0 : 1.0;
    acc += sign * a(c, c ^ xr);
  }
  return phase * acc;
}

/// Coefficients of a (not necessarily Hermitian) operator over the Pauli
/// basis: coeffs[idx] = tr(M(P_idx) a) / 2^n, so a = sum coeffs[idx] M(P_idx).
inline Eigen::VectorXcd pauli_coefficients(const Mat& a, std::uint32_t n) {
  check_dense_cap(n);
  const double dim = double(std::uint64_t(1) << n);
  Eigen::VectorXcd c(pauli_space_dim(n));
  for (std::uint64_t i = 0; i < pauli_space_dim(n); ++i)
    c(i) = pauli_trace(pauli_from_index(i, n), a) / dim;
  return c;
}

inline Mat materialize(const Eigen::VectorXcd& coeffs, std::uint32_t n) {
  check_dense_cap(n);
  const std::uint64_t dim = std::uint64_t(1) << n;
  Mat a = Mat::Zero(dim, dim);
  for (std::uint64_t i = 0; i < pauli_space_dim(n); ++i) {
    if (coeffs(i) == std::complex<double>(0, 0)) continue;
    a += coeffs(i) * pauli_matrix(pauli_from_index(i, n));
  }
  return a;
}

}  // namespace thermflow
