#pragma once

#include "thermflow/block_basis.hpp"
#include "thermflow/davies.hpp"

namespace thermflow {

/// Explicit A W = B factorization of the flow bound, restricted to one coset
/// block (representative O, base syndrome s).
///
///   A columns are indexed by pairs (V, a) of a Pauli and a coupling letter:
///     A_{(V,a)} = sqrt( h(w^a(s+sV)) p(s+sV) / 2^n ) |a o O_{s+sV}>
///   B columns are indexed by triples (Q, P, gamma) of a shift, a flow target
///   and a path of that target's flow:
///     B_{(Q,P,g)} = sqrt( p(s+sQ) p(s+sPQ) / 2^n ) / sqrt(|Gamma_P|) |P o O_{s+sQ}>
///   W routes each triple through the pairs its shifted path visits, with the
///   telescoping sign; A W = B then holds exactly, column by column.
///
/// (Here s+sV denotes the syndrome mask xor.)
class BlockFactorization {
 public:
  struct ColumnKey {
    std::uint64_t q;        // Pauli index of the shift Q
    std::size_t flow;       // index into the flow list
    std::size_t path;       // path index within the flow
  };

  BlockFactorization(const DaviesGenerator& g, const std::vector<PauliFlow>& flows,
                     const PauliOperator& rep, std::uint64_t s)
      : H_(g.H), rate_(g.rate), flows_(flows), rep_(rep), s_(s) {
    const std::uint32_t n = H_.n();
    const std::uint64_t pdim = pauli_space_dim(n);
    const std::uint64_t bdim = std::uint64_t(1) << H_.rank();
    if (flows_.empty()) throw ValidationError("factorization needs at least one flow");
    for (std::size_t i = 0; i < flows_.size(); ++i)
      for (std::size_t j = 0; j < i; ++j)
        if (flows_[i].target() == flows_[j].target())
          throw ValidationError("flows must have pairwise distinct targets");
    gibbs_ = H_.gibbs(g.beta);
    couplings_ = g.couplings;
    const std::size_t na = couplings_.size();

    // A: one column per (V, a).
    A_.resize(bdim, pdim * na);
    for (std::uint64_t v = 0; v < pdim; ++v) {
      PauliOperator V = pauli_from_index(v, n);
      std::uint64_t sv = s_ ^ H_.basis().syndrome(V).mask;
      for (std::size_t a = 0; a < na; ++a) {
        double h = rate_(H_.bohr_frequency(Syndrome(sv, H_.rank()), couplings_[a]));
        double c = std::sqrt(h * gibbs_.p[sv] / std::ldexp(1.0, int(n)));
        A_.col(v * na + a) = c * block_projected_vector(H_, rep_, couplings_[a], sv);
      }
    }

    // Column index: all shifts Q, all flows, all paths.
    for (std::uint64_t q = 0; q < pdim; ++q)
      for (std::size_t f = 0; f < flows_.size(); ++f)
        for (std::size_t pth = 0; pth < flows_[f].paths().size(); ++pth)
          cols_.push_back(ColumnKey{q, f, pth});

    B_.resize(bdim, cols_.size());
    W_ = Eigen::MatrixXd::Zero(pdim * na, cols_.size());
    for (std::size_t c = 0; c < cols_.size(); ++c) {
      const auto& key = cols_[c];
      const PauliFlow& flow = flows_[key.flow];
      const PauliPath& path = flow.paths()[key.path];
      PauliOperator Q = pauli_from_index(key.q, n);
      std::uint64_t sq = s_ ^ H_.basis().syndrome(Q).mask;
      std::uint64_t spq = s_ ^ H_.basis().syndrome(multiply(flow.target(), Q)).mask;
      double pq = gibbs_.p[sq], ppq = gibbs_.p[spq];
      double gamma_count = double(flow.paths().size());
      B_.col(c) = std::sqrt(pq * ppq / std::ldexp(1.0, int(n)) / gamma_count) *
                  block_projected_vector(H_, rep_, flow.target(), sq);
      for (std::size_t t = 0; t + 1 < path.vertices.size(); ++t) {
        PauliOperator V = multiply(path.vertices[t], Q);
        PauliOperator alpha = path.step(t);
        std::size_t aidx = coupling_index(alpha);
        std::uint64_t sv = s_ ^ H_.basis().syndrome(V).mask;
        double h = rate_(H_.bohr_frequency(Syndrome(sv, H_.rank()), alpha));
        double theta = commutator_sign(path.vertices[t], rep_);
        W_(index_of_pauli(V) * na + aidx, c) +=
            theta * std::sqrt(pq * ppq / (gamma_count * h * gibbs_.p[sv]));
      }
    }
  }

  const Eigen::MatrixXd& A() const { return A_; }
  const Eigen::MatrixXd& W() const { return W_; }
  const Eigen::MatrixXd& B() const { return B_; }
  const std::vector<ColumnKey>& columns() const { return cols_; }

  double residual() const { return (A_ * W_ - B_).cwiseAbs().maxCoeff(); }

  /// Norm of one row of W restricted to a fixed shift Q (the row vector the
  /// closed form speaks about): row (V, a), columns (Q, *, *).
  double row_norm_direct(const PauliOperator& V, const PauliOperator& alpha,
                         const PauliOperator& Q) const {
    std::size_t row = index_of_pauli(V) * couplings_.size() + coupling_index(alpha);
    double acc = 0;
    std::uint64_t qi = index_of_pauli(Q);
    for (std::size_t c = 0; c < cols_.size(); ++c)
      if (cols_[c].q == qi) acc += W_(row, c) * W_(row, c);
    return std::sqrt(acc);
  }

  /// Closed form for the same quantity: the shifted edge e = (VQ, VQ a) of
  /// each flow contributes p(s+sQ) p(s+sPQ) / Omega_P(e), all divided by
  /// h(w^a(s+sV)) p(s+sV).
  double row_norm_closed(const PauliOperator& V, const PauliOperator& alpha,
                         const PauliOperator& Q) const {
    std::uint64_t sv = s_ ^ H_.basis().syndrome(V).mask;
    double h = rate_(H_.bohr_frequency(Syndrome(sv, H_.rank()), alpha));
    std::uint64_t sq = s_ ^ H_.basis().syndrome(Q).mask;
    PauliOperator u = multiply(V, Q);  // path-coordinate start vertex
    FlowEdge e{u, multiply(u, alpha)};
    double acc = 0;
    for (const auto& flow : flows_) {
      if (!flow.edge_index().counts().count(e)) continue;
      std::uint64_t spq = s_ ^ H_.basis().syndrome(multiply(flow.target(), Q)).mask;
      acc += gibbs_.p[sq] * gibbs_.p[spq] / flow.omega(e).value();
    }
    return std::sqrt(acc / (h * gibbs_.p[sv]));
  }

 private:
  std::size_t coupling_index(const PauliOperator& alpha) const {
    for (std::size_t a = 0; a < couplings_.size(); ++a)
      if (couplings_[a] == alpha) return a;
    throw ValidationError("path step letter is not among the generator couplings");
  }

  StabilizerHamiltonian H_;
  RateFunction rate_;
  std::vector<PauliFlow> flows_;
  PauliOperator rep_;
  std::uint64_t s_;
  GibbsTable gibbs_;
  std::vector<PauliOperator> couplings_;
  std::vector<ColumnKey> cols_;
  Eigen::MatrixXd A_, W_, B_;
};

}  // namespace thermflow
