#pragma once

#include <cmath>
#include <limits>

#include "thermflow/generator_basis.hpp"

namespace thermflow {

struct HamiltonianTerm {
  PauliOperator g;
  double J = 0;  // must be positive
};

/// Gibbs weights over syndromes for a fixed inverse temperature. p(s) is the
/// per-state weight: each syndrome subspace has dimension 2^{n-r}, so
/// sum_s 2^{n-r} p(s) = 1.
struct GibbsTable {
  double beta = 0;
  std::uint32_t n = 0, r = 0;
  std::vector<double> p;        // indexed by syndrome mask, size 2^r
  std::vector<double> energy;   // epsilon_s, same indexing
  double log_partition = 0;     // log tr e^{-beta H}

  double operator()(const Syndrome& s) const { return p[s.mask]; }
  double subspace_probability(const Syndrome& s) const {
    return std::ldexp(p[s.mask], int(n - r));  // 2^{n-r} p(s)
  }
  double min_p() const {
    double m = std::numeric_limits<double>::infinity();
    for (double v : p) m = std::min(m, v);
    return m;
  }
};

/// H = -sum_i J_i g_i with positive couplings and pairwise commuting terms.
/// Construction validates commutativity and sign consistency: every term must
/// materialise as +1 times the product of basis elements it decomposes into,
/// otherwise the generated group contains -identity and the syndrome-subspace
/// structure (and the barrier norm formula) would break down.
class StabilizerHamiltonian {
 public:
  StabilizerHamiltonian(std::uint32_t n, std::vector<HamiltonianTerm> terms)
      : n_(n), terms_(std::move(terms)) {
    if (terms_.empty()) throw ValidationError("Hamiltonian must have at least one term");
    std::vector<PauliOperator> gs;
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      const auto& t = terms_[i];
      if (t.g.n != n_)
        throw ValidationError("terms[" + std::to_string(i) + "].pauli: qubit count mismatch");
      if (!(t.J > 0))
        throw ValidationError("terms[" + std::to_string(i) + "].J: coupling must be positive");
      if (t.g.is_identity())
        throw ValidationError("terms[" + std::to_string(i) + "].pauli: identity term not allowed");
      for (std::size_t k = 0; k < i; ++k)
        if (commutator_sign(t.g, terms_[k].g) < 0)
          throw ValidationError("terms[" + std::to_string(k) + "] and terms[" + std::to_string(i) +
                                "] anticommute; generators must pairwise commute");
      gs.push_back(t.g);
      total_J_ += t.J;
    }
    basis_ = GeneratorBasis(n_, gs);
    term_masks_.reserve(terms_.size());
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      auto mask = basis_.in_group(terms_[i].g);
      if (!mask) throw ValidationError("internal: term outside its own generated group");
      term_masks_.push_back(*mask);
      // Sign consistency: g_i must equal + product(basis elements), not - product.
      int phase = 0;
      PauliOperator acc = PauliOperator::identity(n_);
      for (std::size_t j = 0; j < basis_.generators().size(); ++j) {
        if ((*mask >> j) & 1) {
          phase = (phase + product_phase_exponent(acc, basis_.generators()[j])) % 4;
          acc = multiply(acc, basis_.generators()[j]);
        }
      }
      if (phase != 0)
        throw ValidationError("terms[" + std::to_string(i) +
                              "]: materialised group contains -identity "
                              "(term equals minus a product of earlier terms)");
    }
  }

  std::uint32_t n() const { return n_; }
  std::uint32_t rank() const { return basis_.rank(); }
  const std::vector<HamiltonianTerm>& terms() const { return terms_; }
  const GeneratorBasis& basis() const { return basis_; }
  /// Exponent mask of term i over the basis generators.
  const std::vector<std::uint64_t>& term_decompositions() const { return term_masks_; }
  double total_coupling() const { return total_J_; }

  Syndrome syndrome(const PauliOperator& p) const { return basis_.syndrome(p); }

  /// epsilon_s = -sum_i J_i prod_j s_j^{c_ij}.
  double syndrome_energy(const Syndrome& s) const {
    if (s.r != rank()) throw ValidationError("syndrome length mismatch");
    double e = 0;
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      int sign = std::popcount(term_masks_[i] & s.mask) & 1 ? -1 : +1;
      e -= terms_[i].J * sign;
    }
    return e;
  }

  /// Bohr frequency omega^alpha(s) = epsilon_s - epsilon_{s XOR sigma_alpha}.
  double bohr_frequency(const Syndrome& s, const PauliOperator& alpha) const {
    return syndrome_energy(s) - syndrome_energy(s ^ syndrome(alpha));
  }

  /// All Bohr frequencies lie in [-frequency_range, frequency_range].
  double frequency_range() const { return 2 * total_J_; }

  /// Step barrier: 4 sum of J_i over terms commuting with P and anticommuting
  /// with U. Equals the infinity norm of P'U'HUP + U'HU - P'HP - H exactly.
  double step_barrier(const PauliOperator& target, const PauliOperator& u) const {
    double sum = 0;
    for (const auto& t : terms_)
      if (commutator_sign(t.g, target) > 0 && commutator_sign(t.g, u) < 0) sum += t.J;
    return 4 * sum;
  }

  /// Worst single-site step cost: max over single-site a of 4 sum_{[g_i,a]=-1} J_i.
  double omega_impl() const {
    double best = 0;
    for (std::uint32_t site = 1; site <= n_; ++site)
      for (char letter : {'X', 'Y', 'Z'}) {
        auto a = PauliOperator::single_site(letter, site, n_);
        double sum = 0;
        for (const auto& t : terms_)
          if (commutator_sign(t.g, a) < 0) sum += t.J;
        best = std::max(best, 4 * sum);
      }
    return best;
  }

  void check_syndrome_cap(std::uint32_t max_r = 26) const {
    if (rank() > max_r)
      throw CapError("syndrome enumeration needs 2^" + std::to_string(rank()) +
                     " entries, above the cap 2^" + std::to_string(max_r));
  }

  /// max_s |epsilon_s| by enumeration (requires rank within the cap).
  double norm_inf() const {
    check_syndrome_cap();
    double m = 0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << rank()); ++mask)
      m = std::max(m, std::abs(syndrome_energy(Syndrome(mask, rank()))));
    return m;
  }

  double ground_energy() const {
    check_syndrome_cap();
    double m = std::numeric_limits<double>::infinity();
    for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << rank()); ++mask)
      m = std::min(m, syndrome_energy(Syndrome(mask, rank())));
    return m;
  }

  GibbsTable gibbs(double beta) const {
    if (beta < 0) throw ValidationError("beta must be nonnegative");
    check_syndrome_cap();
    GibbsTable t;
    t.beta = beta;
    t.n = n_;
    t.r = rank();
    std::uint64_t size = std::uint64_t(1) << rank();
    t.energy.resize(size);
    t.p.resize(size);
    double e0 = std::numeric_limits<double>::infinity();
    for (std::uint64_t mask = 0; mask < size; ++mask) {
      t.energy[mask] = syndrome_energy(Syndrome(mask, rank()));
      e0 = std::min(e0, t.energy[mask]);
    }
    double zshift = 0;  // Z e^{beta e0}
    for (std::uint64_t mask = 0; mask < size; ++mask)
      zshift += std::exp(-beta * (t.energy[mask] - e0));
    zshift = std::ldexp(zshift, int(n_ - rank()));
    for (std::uint64_t mask = 0; mask < size; ++mask)
      t.p[mask] = std::exp(-beta * (t.energy[mask] - e0)) / zshift;
    t.log_partition = std::log(zshift) - beta * e0;
    return t;
  }

 private:
  std::uint32_t n_ = 0;
  std::vector<HamiltonianTerm> terms_;
  GeneratorBasis basis_;
  std::vector<std::uint64_t> term_masks_;
  double total_J_ = 0;
};

}  // namespace thermflow
