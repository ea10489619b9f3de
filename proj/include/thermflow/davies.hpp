#pragma once

#include "thermflow/rates.hpp"
#include "thermflow/vectorize.hpp"

namespace thermflow {

/// Default coupling set: every single-site Pauli, site-major, letters X, Y, Z.
inline std::vector<PauliOperator> default_couplings(std::uint32_t n) {
  std::vector<PauliOperator> out;
  for (std::uint32_t site = 1; site <= n; ++site)
    for (char letter : {'X', 'Y', 'Z'})
      out.push_back(PauliOperator::single_site(letter, site, n));
  return out;
}

/// Explicitly assembled thermalization generator. `lstar` is the
/// Heisenberg-picture matrix on Pauli coefficient vectors: the column for
/// basis Pauli P holds the coefficients of L(P). Its transpose `lhat`
/// propagates state coefficient vectors (the Schroedinger picture).
struct DaviesGenerator {
  StabilizerHamiltonian H;
  double beta = 0;
  RateFunction rate;
  bool coherent = true;
  std::vector<PauliOperator> couplings;
  CodeEigensystem eig;
  Eigen::MatrixXd lstar;

  Eigen::MatrixXd lhat() const { return lstar.transpose(); }
};

/// Builds the generator in the joint eigenbasis of the stabilizers. Each
/// coupling S maps the syndrome-s sector to the (s ^ sigma(S)) sector, so the
/// Bohr frequency of every nonzero matrix element of U^dag S U is a function
/// of the source column's syndrome alone; the frequency-resolved dissipator
/// becomes an entrywise mask over (A F A). Frequencies are clustered with a
/// relative tolerance so numerically equal ones share one jump operator.
inline DaviesGenerator build_davies(const StabilizerHamiltonian& H, double beta,
                                    RateKind kind, bool include_coherent = true,
                                    std::vector<PauliOperator> couplings = {}) {
  check_dense_cap(H.n());
  if (!(beta > 0)) throw ValidationError("inverse temperature must be positive");
  if (couplings.empty()) couplings = default_couplings(H.n());
  for (const auto& c : couplings)
    if (c.n != H.n() || c.is_identity())
      throw ValidationError("couplings must be non-identity Paulis on the system");

  DaviesGenerator g{H, beta, RateFunction::make(kind, beta, H.frequency_range()),
                    include_coherent, std::move(couplings), code_eigensystem(H),
                    Eigen::MatrixXd()};
  const std::uint32_t n = H.n();
  const std::uint64_t dim = std::uint64_t(1) << n;
  const std::uint64_t pdim = pauli_space_dim(n);
  const Mat& U = g.eig.basis;

  // Per-coupling data: eigenbasis matrix, entrywise mask M, diagonal D.
  std::vector<Mat> As;
  std::vector<Eigen::MatrixXd> Ms;
  std::vector<Eigen::VectorXd> Ds;
  const double ftol = 1e-9 * std::max(1.0, H.frequency_range());
  for (const auto& s : g.couplings) {
    Mat A = U.adjoint() * pauli_matrix(s) * U;
    Syndrome sig = H.basis().syndrome(s);
    // Bohr frequency (energy drop) per source column, snapped to clusters.
    Eigen::VectorXd om(dim);
    for (std::uint64_t k = 0; k < dim; ++k)
      om(k) = H.bohr_frequency(g.eig.syndrome[k], s);
    std::vector<double> sorted(om.data(), om.data() + dim);
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> reps;
    for (double v : sorted)
      if (reps.empty() || v - reps.back() > ftol) reps.push_back(v);
    auto snap = [&](double v) {
      auto it = std::lower_bound(reps.begin(), reps.end(), v - ftol);
      return *it;
    };
    Eigen::VectorXd D(dim);
    for (std::uint64_t k = 0; k < dim; ++k) {
      om(k) = snap(om(k));
      D(k) = g.rate(om(k));
    }
    Eigen::MatrixXd M(dim, dim);
    for (std::uint64_t y = 0; y < dim; ++y)
      for (std::uint64_t yp = 0; yp < dim; ++yp)
        M(y, yp) = (om(y) == om(yp)) ? D(y) : 0.0;
    As.push_back(std::move(A));
    Ms.push_back(std::move(M));
    Ds.push_back(std::move(D));
    (void)sig;
  }

  g.lstar.resize(pdim, pdim);
  for (std::uint64_t p = 0; p < pdim; ++p) {
    Mat F = U.adjoint() * pauli_matrix(pauli_from_index(p, n)) * U;
    Mat G = Mat::Zero(dim, dim);
    if (include_coherent) {
      for (std::uint64_t x = 0; x < dim; ++x)
        for (std::uint64_t y = 0; y < dim; ++y)
          G(x, y) += std::complex<double>(0, g.eig.energy(x) - g.eig.energy(y)) * F(x, y);
    }
    for (std::size_t a = 0; a < g.couplings.size(); ++a) {
      Mat AFA = As[a] * F * As[a];
      G += AFA.cwiseProduct(Ms[a].cast<std::complex<double>>());
      G -= 0.5 * (Ds[a].asDiagonal() * F + F * Ds[a].asDiagonal());
    }
    Eigen::VectorXcd col = pauli_coefficients(U * G * U.adjoint(), n);
    if (col.imag().cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, col.norm()))
      throw std::runtime_error("generator is not real in the Pauli basis");
    g.lstar.col(p) = col.real();
  }
  return g;
}

}  // namespace thermflow
