#pragma once

#include "thermflow/forms.hpp"
#include "thermflow/flow.hpp"

namespace thermflow {

/// Orthonormal basis of the 2^r-dimensional coefficient block attached to a
/// coset representative O: the vector |O_s> = 2^{r/2} |Pi_s O| has ambient
/// Pauli coefficients supported on the coset members R O, with coefficients
/// 2^{-r/2} (-1)^{<e,s>} sign(e) i^{k(R_e, O)}. Block coordinates are indexed
/// by the syndrome mask s.
class BlockBasis {
 public:
  BlockBasis(const StabilizerHamiltonian& H, const PauliOperator& rep)
      : n_(H.n()), r_(H.rank()), rep_(rep) {
    if (H.basis().canonical_representative(rep) != rep)
      throw ValidationError("block basis needs a canonical coset representative");
    const std::uint64_t ne = std::uint64_t(1) << r_;
    static const std::complex<double> ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    const double norm = std::pow(2.0, -double(r_) / 2.0);
    for (std::uint64_t e = 0; e < ne; ++e) {
      PauliOperator R = H.basis().element(e);
      member_index_.push_back(index_of_pauli(multiply(R, rep)));
      base_coeff_.push_back(norm * double(H.basis().element_sign(e)) *
                            ipow[product_phase_exponent(R, rep)]);
    }
  }

  std::uint32_t r() const { return r_; }
  const PauliOperator& rep() const { return rep_; }

  /// Ambient Pauli-coefficient vector of |O_s>.
  Eigen::VectorXcd ambient(std::uint64_t s) const {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(pauli_space_dim(n_));
    for (std::uint64_t e = 0; e < member_index_.size(); ++e) {
      double sign = (std::popcount(e & s) & 1) ? -1.0 : 1.0;
      v(member_index_[e]) += sign * base_coeff_[e];
    }
    return v;
  }

  /// Ambient vector of a whole block-coordinate vector (size 2^r).
  Eigen::VectorXcd ambient(const Eigen::VectorXd& block) const {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(pauli_space_dim(n_));
    for (std::uint64_t s = 0; s < (std::uint64_t(1) << r_); ++s)
      if (block(s) != 0) v += block(s) * ambient(s);
    return v;
  }

 private:
  std::uint32_t n_, r_;
  PauliOperator rep_;
  std::vector<std::uint64_t> member_index_;
  std::vector<std::complex<double>> base_coeff_;
};

/// Block coordinates of |U o O_s> = (e_s - theta e_{s xor sigma_U}) / sqrt(2),
/// where theta is the commutation sign of U with the block's representative
/// and sigma_U its syndrome. Zero when U commutes with both the stabilizers
/// and the representative.
inline Eigen::VectorXd block_projected_vector(const StabilizerHamiltonian& H,
                                              const PauliOperator& rep,
                                              const PauliOperator& u, std::uint64_t s) {
  const std::uint64_t dim = std::uint64_t(1) << H.rank();
  if (s >= dim) throw ValidationError("syndrome index out of range");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
  double theta = commutator_sign(u, rep);
  std::uint64_t shift = H.basis().syndrome(u).mask;
  const double inv = 1.0 / std::sqrt(2.0);
  v(s) += inv;
  v(s ^ shift) -= theta * inv;
  return v;
}

struct TelescopicCheck {
  Eigen::VectorXd lhs, rhs;
  double residual = 0;
};

/// The telescoping identity behind the factorization: for a path
/// I = U_0, ..., U_T = P with steps a_{t+1} = U_t U_{t+1}, and any shift Q,
///   |P o O_{s xor sigma_Q}> = sum_t theta(U_t, O) |a_{t+1} o O_{s xor sigma(U_t Q)}>.
inline TelescopicCheck telescopic_check(const StabilizerHamiltonian& H,
                                        const PauliOperator& rep, const PauliPath& path,
                                        const PauliOperator& q, std::uint64_t s) {
  path.validate();
  TelescopicCheck out;
  std::uint64_t sq = s ^ H.basis().syndrome(q).mask;
  out.lhs = block_projected_vector(H, rep, path.endpoint(), sq);
  out.rhs = Eigen::VectorXd::Zero(out.lhs.size());
  for (std::size_t t = 0; t + 1 < path.vertices.size(); ++t) {
    const PauliOperator& ut = path.vertices[t];
    double theta = commutator_sign(ut, rep);
    std::uint64_t st = s ^ H.basis().syndrome(multiply(ut, q)).mask;
    out.rhs += theta * block_projected_vector(H, rep, path.step(t), st);
  }
  out.residual = (out.lhs - out.rhs).norm();
  return out;
}

/// Restriction of an ambient quadratic form to a coset block: entries
/// B(s, s') = ambient(s)^dag F ambient(s'), checked to be real.
inline Eigen::MatrixXd block_form(const BlockBasis& basis, const Eigen::MatrixXd& form) {
  const std::uint64_t dim = std::uint64_t(1) << basis.r();
  Eigen::MatrixXcd out(dim, dim);
  std::vector<Eigen::VectorXcd> amb;
  for (std::uint64_t s = 0; s < dim; ++s) amb.push_back(basis.ambient(s));
  for (std::uint64_t s = 0; s < dim; ++s)
    for (std::uint64_t t = 0; t < dim; ++t)
      out(s, t) = amb[s].dot(form * amb[t]);  // Eigen dot conjugates the left factor
  double scale = std::max(1.0, out.real().cwiseAbs().maxCoeff());
  if (out.imag().cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw std::runtime_error("block form restriction has a non-vanishing imaginary part");
  return out.real();
}

}  // namespace thermflow
