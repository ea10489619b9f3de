#pragma once

#include "thermflow/davies.hpp"

namespace thermflow {

/// Characters of the Gibbs state against stabilizer-group elements:
/// chi[e] = tr(rho M(prod_j S_j^{e_j})) / 2^n, including the materialisation
/// sign of the product. tr(rho A B)/2^n for arbitrary Paulis A, B reduces to
/// these: it vanishes unless the phaseless product AB lies in the group.
struct GibbsCharacters {
  std::uint32_t n = 0, r = 0;
  std::vector<double> chi;  // indexed by exponent mask, size 2^r

  GibbsCharacters(const StabilizerHamiltonian& H, const GibbsTable& gibbs)
      : n(H.n()), r(H.rank()), chi(std::size_t(1) << H.rank()) {
    const std::uint64_t nsyn = std::uint64_t(1) << r;
    for (std::uint64_t e = 0; e < nsyn; ++e) {
      double acc = 0;
      for (std::uint64_t s = 0; s < nsyn; ++s) {
        double sign = (std::popcount(e & s) & 1) ? -1.0 : 1.0;
        acc += sign * gibbs.subspace_probability(Syndrome(s, r));
      }
      chi[e] = double(H.basis().element_sign(e)) * std::ldexp(acc, -int(n));
    }
  }
};

/// tr(rho M(a) M(b)) / 2^n (complex; the product phase of a*b survives).
inline std::complex<double> pair_trace(const StabilizerHamiltonian& H,
                                       const GibbsCharacters& chars, const PauliOperator& a,
                                       const PauliOperator& b) {
  PauliOperator prod = multiply(a, b);
  auto e = H.basis().in_group(prod);
  if (!e) return {0, 0};
  static const std::complex<double> ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  return ipow[product_phase_exponent(a, b)] * chars.chi[*e];
}

/// Ambient quadratic forms over real Pauli coefficient vectors c (f = sum c_P P):
///   c^T V c = [tr(rho f^2) - tr(rho f)^2] / 2^n   (variance form)
///   c^T E c = -tr(rho f L(f)) / 2^n               (Dirichlet form)
/// Detailed balance makes the dissipative part of the symmetrised matrix
/// exactly real and the coherent part exactly imaginary, so taking the real
/// part yields the Dirichlet form of the dissipative half alone.
struct AmbientForms {
  Eigen::MatrixXd V, E;
  Eigen::VectorXd mean;  // mean(P) = tr(rho P)/2^n
};

inline AmbientForms build_ambient_forms(const DaviesGenerator& g) {
  const std::uint32_t n = g.H.n();
  const std::uint64_t pdim = pauli_space_dim(n);
  GibbsTable gibbs = g.H.gibbs(g.beta);
  GibbsCharacters chars(g.H, gibbs);

  Eigen::MatrixXcd Tc(pdim, pdim);
  std::vector<PauliOperator> paulis;
  paulis.reserve(pdim);
  for (std::uint64_t i = 0; i < pdim; ++i) paulis.push_back(pauli_from_index(i, n));
  for (std::uint64_t i = 0; i < pdim; ++i)
    for (std::uint64_t j = 0; j < pdim; ++j)
      Tc(i, j) = pair_trace(g.H, chars, paulis[i], paulis[j]);

  AmbientForms out;
  out.mean = Tc.col(0).real();
  out.V = Tc.real() - std::ldexp(1.0, int(n)) * out.mean * out.mean.transpose();
  Eigen::MatrixXcd Epre = -Tc * g.lstar;
  out.E = 0.5 * (Epre + Epre.transpose()).real();
  if (!out.E.allFinite() || !out.V.allFinite())
    throw std::runtime_error("quadratic forms are not finite");
  return out;
}

}  // namespace thermflow
