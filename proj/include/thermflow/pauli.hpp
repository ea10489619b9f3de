#pragma once

#include <bit>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace thermflow {

/// Raised for malformed or inconsistent inputs (bad strings, non-commuting
/// generator sets, invalid paths, ...). Maps to CLI exit code 1.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when a requested computation exceeds a size cap. CLI exit code 2.
struct CapError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when a numerical certificate fails to validate. CLI exit code 3.
struct CertificateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// An n-qubit Pauli operator modulo phase, stored as a pair of bit vectors:
/// bit j of `x` / `z` is the X / Z component on qubit j+1. The convention for
/// the (unique, Hermitian) materialisation of (x, z) is i^{|x AND z|} X^x Z^z,
/// i.e. Y on every site where both bits are set.
struct PauliOperator {
  std::uint64_t x = 0;
  std::uint64_t z = 0;
  std::uint32_t n = 0;

  PauliOperator() = default;
  PauliOperator(std::uint64_t x_, std::uint64_t z_, std::uint32_t n_) : x(x_), z(z_), n(n_) {
    if (n_ == 0 || n_ > 64) throw ValidationError("qubit count must be in [1, 64]");
  }

  static PauliOperator identity(std::uint32_t n) { return PauliOperator(0, 0, n); }

  /// Single-site operator: letter in {'X','Y','Z'}, site is 1-based.
  static PauliOperator single_site(char letter, std::uint32_t site, std::uint32_t n) {
    if (site < 1 || site > n) throw ValidationError("site index out of range");
    std::uint64_t bit = std::uint64_t(1) << (site - 1);
    switch (letter) {
      case 'X': return PauliOperator(bit, 0, n);
      case 'Y': return PauliOperator(bit, bit, n);
      case 'Z': return PauliOperator(0, bit, n);
      default: throw ValidationError(std::string("invalid Pauli letter '") + letter + "'");
    }
  }

  bool is_identity() const { return x == 0 && z == 0; }

  /// Number of non-identity sites.
  std::uint32_t weight() const { return std::uint32_t(std::popcount(x | z)); }

  char letter_at(std::uint32_t site) const {  // 1-based
    bool bx = (x >> (site - 1)) & 1, bz = (z >> (site - 1)) & 1;
    return bx ? (bz ? 'Y' : 'X') : (bz ? 'Z' : 'I');
  }

  friend bool operator==(const PauliOperator& a, const PauliOperator& b) {
    return a.x == b.x && a.z == b.z && a.n == b.n;
  }
  friend bool operator!=(const PauliOperator& a, const PauliOperator& b) { return !(a == b); }
  friend bool operator<(const PauliOperator& a, const PauliOperator& b) {
    if (a.x != b.x) return a.x < b.x;
    return a.z < b.z;
  }
};

inline void check_same_n(const PauliOperator& a, const PauliOperator& b) {
  if (a.n != b.n) throw ValidationError("qubit count mismatch between Pauli operators");
}

/// Phaseless group product: componentwise XOR of the bit vectors.
inline PauliOperator multiply(const PauliOperator& a, const PauliOperator& b) {
  check_same_n(a, b);
  return PauliOperator(a.x ^ b.x, a.z ^ b.z, a.n);
}

/// Group commutator [a, b] in {+1, -1}: +1 iff the operators commute.
/// Parity of the symplectic form x_a.z_b + z_a.x_b.
inline int commutator_sign(const PauliOperator& a, const PauliOperator& b) {
  check_same_n(a, b);
  auto parity = std::popcount(a.x & b.z) + std::popcount(a.z & b.x);
  return (parity & 1) ? -1 : +1;
}

/// Text format: one letter per qubit from {I,X,Y,Z}, leftmost = qubit 1.
inline PauliOperator parse_pauli(const std::string& text) {
  if (text.empty()) throw ValidationError("empty Pauli string");
  if (text.size() > 64) throw ValidationError("Pauli string longer than 64 sites");
  std::uint64_t x = 0, z = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    std::uint64_t bit = std::uint64_t(1) << i;
    switch (text[i]) {
      case 'I': break;
      case 'X': x |= bit; break;
      case 'Y': x |= bit; z |= bit; break;
      case 'Z': z |= bit; break;
      default:
        throw ValidationError(std::string("invalid character '") + text[i] +
                              "' at position " + std::to_string(i + 1) + " in Pauli string");
    }
  }
  return PauliOperator(x, z, std::uint32_t(text.size()));
}

inline std::string to_string(const PauliOperator& p) {
  std::string s(p.n, 'I');
  for (std::uint32_t i = 0; i < p.n; ++i) s[i] = p.letter_at(i + 1);
  return s;
}

/// Lexicographic index of a Pauli word: qubit 1 is the most significant base-4
/// digit, letters ordered I < X < Y < Z.
inline std::uint64_t pauli_space_dim(std::uint32_t n) { return std::uint64_t(1) << (2 * n); }

inline std::uint64_t index_of_pauli(const PauliOperator& p) {
  std::uint64_t idx = 0;
  for (std::uint32_t site = 1; site <= p.n; ++site) {
    std::uint64_t d = 0;
    switch (p.letter_at(site)) {
      case 'I': d = 0; break;
      case 'X': d = 1; break;
      case 'Y': d = 2; break;
      case 'Z': d = 3; break;
    }
    idx = idx * 4 + d;
  }
  return idx;
}

inline PauliOperator pauli_from_index(std::uint64_t idx, std::uint32_t n) {
  PauliOperator p = PauliOperator::identity(n);
  for (std::uint32_t site = n; site >= 1; --site) {
    std::uint64_t d = idx & 3;
    idx >>= 2;
    std::uint64_t bit = std::uint64_t(1) << (site - 1);
    if (d == 1 || d == 2) p.x |= bit;
    if (d == 2 || d == 3) p.z |= bit;
  }
  return p;
}

/// Phase bookkeeping for materialised products. With P(x,z) = i^{|x&z|} X^x Z^z,
/// P(x1,z1) P(x2,z2) = i^k P(x1^x2, z1^z2) where k is returned mod 4.
/// Used to validate sign consistency of stabilizer decompositions; the phaseless
/// algebra everywhere else never needs it.
inline int product_phase_exponent(const PauliOperator& a, const PauliOperator& b) {
  check_same_n(a, b);
  int k = std::popcount(a.x & a.z) + std::popcount(b.x & b.z)  // i^{a1} i^{a2}
          + 2 * std::popcount(a.z & b.x)                       // Z^z1 past X^x2
          - std::popcount((a.x ^ b.x) & (a.z ^ b.z));          // canonical i^{a3}
  return ((k % 4) + 4) % 4;
}

/// Hashable key for maps keyed on Paulis.
struct PauliKeyHash {
  std::size_t operator()(const PauliOperator& p) const {
    std::uint64_t h = p.x * 0x9e3779b97f4a7c15ull;
    h ^= p.z + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return std::size_t(h);
  }
};

/// Syndrome against an ordered generator basis S_1..S_r: entry j is the
/// commutator sign [P, S_j]. Stored as a bit mask, bit j set <=> entry -1.
/// The group operation (componentwise product of signs) is XOR of masks.
struct Syndrome {
  std::uint64_t mask = 0;
  std::uint32_t r = 0;

  Syndrome() = default;
  Syndrome(std::uint64_t m, std::uint32_t r_) : mask(m), r(r_) {}

  int sign(std::uint32_t j) const { return (mask >> j) & 1 ? -1 : +1; }  // 0-based
  bool trivial() const { return mask == 0; }

  friend Syndrome operator^(const Syndrome& a, const Syndrome& b) {
    if (a.r != b.r) throw ValidationError("syndrome length mismatch");
    return Syndrome(a.mask ^ b.mask, a.r);
  }
  friend bool operator==(const Syndrome& a, const Syndrome& b) {
    return a.mask == b.mask && a.r == b.r;
  }
};

inline std::string to_string(const Syndrome& s) {
  std::string out(s.r, '+');
  for (std::uint32_t j = 0; j < s.r; ++j)
    if ((s.mask >> j) & 1) out[j] = '-';
  return out;
}

}  // namespace thermflow
