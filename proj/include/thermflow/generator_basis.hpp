#pragma once

#include <optional>

#include "thermflow/pauli.hpp"

namespace thermflow {

/// An independent generating set for an abelian Pauli subgroup, with the GF(2)
/// row-reduction witness needed for membership tests, syndrome maps and coset
/// canonicalisation. Columns are ordered x_1..x_n, z_1..z_n; reduction clears
/// pivots in ascending column order, which makes canonical representatives
/// deterministic and stabilizer-invariant.
class GeneratorBasis {
 public:
  GeneratorBasis() = default;

  /// Builds the basis from candidate generators: keeps the first independent
  /// subset, in input order. Does not require commutativity (callers that need
  /// it check separately).
  explicit GeneratorBasis(std::uint32_t n, const std::vector<PauliOperator>& candidates) : n_(n) {
    for (const auto& g : candidates) {
      if (g.n != n_) throw ValidationError("generator qubit count mismatch");
      add_candidate(g);
    }
    if (rank() > 64) throw ValidationError("rank above 64 is not supported");
  }

  std::uint32_t n() const { return n_; }
  std::uint32_t rank() const { return std::uint32_t(generators_.size()); }

  /// The independent subset S_1..S_r, in first-seen input order.
  const std::vector<PauliOperator>& generators() const { return generators_; }

  /// Exponent mask over S_1..S_r if P is in the group (phaselessly), else nullopt.
  std::optional<std::uint64_t> in_group(const PauliOperator& p) const {
    auto [rem, combo] = reduce(p);
    if (rem.is_identity()) return combo;
    return std::nullopt;
  }

  /// Commutator signs of P against S_1..S_r.
  Syndrome syndrome(const PauliOperator& p) const {
    if (p.n != n_) throw ValidationError("qubit count mismatch in syndrome");
    std::uint64_t mask = 0;
    for (std::size_t j = 0; j < generators_.size(); ++j)
      if (commutator_sign(p, generators_[j]) < 0) mask |= std::uint64_t(1) << j;
    return Syndrome(mask, rank());
  }

  /// Deterministic coset representative of P modulo the group: fully reduces
  /// P's bit vector by the row-reduced basis. rep(S P) == rep(P) for S in the group.
  PauliOperator canonical_representative(const PauliOperator& p) const {
    auto [rem, combo] = reduce(p);
    (void)combo;
    return rem;
  }

  /// Group element for an exponent mask over S_1..S_r (phaseless product).
  PauliOperator element(std::uint64_t exponents) const {
    PauliOperator out = PauliOperator::identity(n_);
    for (std::size_t j = 0; j < generators_.size(); ++j)
      if ((exponents >> j) & 1) out = multiply(out, generators_[j]);
    return out;
  }

  /// Sign relating the materialised product of generators to the Hermitian
  /// representative of the phaseless product: prod_j M(S_j)^{e_j} =
  /// element_sign(e) * M(element(e)). Always +-1 for commuting generators
  /// (e.g. M(XX) M(ZZ) = -M(YY)).
  int element_sign(std::uint64_t exponents) const {
    PauliOperator acc = PauliOperator::identity(n_);
    std::uint32_t k = 0;
    for (std::size_t j = 0; j < generators_.size(); ++j)
      if ((exponents >> j) & 1) {
        k = (k + product_phase_exponent(acc, generators_[j])) & 3;
        acc = multiply(acc, generators_[j]);
      }
    if (k & 1) throw std::runtime_error("non-Hermitian product of commuting generators");
    return k == 0 ? 1 : -1;
  }

 private:
  struct EchelonRow {
    PauliOperator p;      // reduced row
    std::uint64_t combo;  // its expression over generators_ (bit j = S_{j+1})
    std::uint32_t pivot;  // lowest set column; rows kept sorted by pivot
  };

  static std::uint32_t column_of_lowest_bit(const PauliOperator& p) {
    // x columns first (0..n-1), then z columns (n..2n-1).
    if (p.x) return std::uint32_t(std::countr_zero(p.x));
    return p.n + std::uint32_t(std::countr_zero(p.z));
  }

  static bool has_column(const PauliOperator& p, std::uint32_t col) {
    if (col < p.n) return (p.x >> col) & 1;
    return (p.z >> (col - p.n)) & 1;
  }

  std::pair<PauliOperator, std::uint64_t> reduce(const PauliOperator& p) const {
    if (p.n != n_) throw ValidationError("qubit count mismatch in reduction");
    PauliOperator rem = p;
    std::uint64_t combo = 0;
    for (const auto& row : rows_) {
      if (!rem.is_identity() && has_column(rem, row.pivot)) {
        rem = multiply(rem, row.p);
        combo ^= row.combo;
      }
    }
    return {rem, combo};
  }

  void add_candidate(const PauliOperator& g) {
    auto [rem, combo] = reduce(g);
    if (rem.is_identity()) return;  // dependent: not part of the basis
    std::uint64_t self = std::uint64_t(1) << generators_.size();
    generators_.push_back(g);
    EchelonRow nr{rem, combo ^ self, column_of_lowest_bit(rem)};
    // Clear the new pivot from existing rows to keep the reduction canonical.
    for (auto& row : rows_) {
      if (has_column(row.p, nr.pivot)) {
        row.p = multiply(row.p, nr.p);
        row.combo ^= nr.combo;
      }
    }
    auto it = rows_.begin();
    while (it != rows_.end() && it->pivot < nr.pivot) ++it;
    rows_.insert(it, nr);
  }

  std::uint32_t n_ = 0;
  std::vector<PauliOperator> generators_;
  std::vector<EchelonRow> rows_;
};

/// One representative per coset of the Pauli group modulo the stabilizer
/// group, in Pauli-index order (the trivial coset's representative, the
/// identity, comes first). Enumerates all 4^n Paulis, so it is capped.
inline std::vector<PauliOperator> coset_representatives(const GeneratorBasis& basis,
                                                        std::uint32_t n,
                                                        std::uint32_t max_n = 10) {
  if (n > max_n)
    throw CapError("coset enumeration capped at " + std::to_string(max_n) + " qubits");
  std::vector<PauliOperator> reps;
  for (std::uint64_t i = 0; i < pauli_space_dim(n); ++i) {
    PauliOperator p = pauli_from_index(i, n);
    if (basis.canonical_representative(p) == p) reps.push_back(p);
  }
  return reps;
}

}  // namespace thermflow
