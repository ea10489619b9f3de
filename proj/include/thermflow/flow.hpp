#pragma once

#include <algorithm>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "thermflow/hamiltonian.hpp"

namespace thermflow {

/// Exact rational, used for edge multiplicities Omega_P(e) = |Gamma_P| / |Gamma_P^e|.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n, std::int64_t d) : num(n), den(d) {
    if (d == 0) throw ValidationError("rational with zero denominator");
    auto g = std::gcd(num, den);
    if (g) { num /= g; den /= g; }
    if (den < 0) { num = -num; den = -den; }
  }
  double value() const { return double(num) / double(den); }
  double log() const { return std::log(double(num)) - std::log(double(den)); }
  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num == b.num && a.den == b.den;
  }
};

/// A path of single-site steps from the identity: vertices U_0 = 1, ..., U_T,
/// consecutive vertices differing by one site.
struct PauliPath {
  std::vector<PauliOperator> vertices;

  std::size_t length() const { return vertices.empty() ? 0 : vertices.size() - 1; }
  const PauliOperator& endpoint() const {
    if (vertices.empty()) throw ValidationError("empty path");
    return vertices.back();
  }
  /// Step letter alpha_{t+1} = U_t U_{t+1} (a single-site Pauli).
  PauliOperator step(std::size_t t) const { return multiply(vertices[t], vertices[t + 1]); }

  void validate() const {
    if (vertices.empty()) throw ValidationError("path has no vertices");
    if (!vertices.front().is_identity())
      throw ValidationError("path must start at the identity");
    for (std::size_t t = 0; t + 1 < vertices.size(); ++t)
      if (multiply(vertices[t], vertices[t + 1]).weight() != 1)
        throw ValidationError("path step " + std::to_string(t) + " is not single-site");
  }
  void validate(const PauliOperator& target) const {
    validate();
    if (endpoint() != target) throw ValidationError("path does not end at the target");
  }

  /// Path from a list of step letters.
  static PauliPath from_steps(std::uint32_t n, const std::vector<PauliOperator>& steps) {
    PauliPath p;
    p.vertices.push_back(PauliOperator::identity(n));
    for (const auto& s : steps) p.vertices.push_back(multiply(p.vertices.back(), s));
    return p;
  }

  friend bool operator==(const PauliPath& a, const PauliPath& b) {
    return a.vertices == b.vertices;
  }
};

/// Directed edge (U_e, V_e) of a path.
struct FlowEdge {
  PauliOperator from, to;
  friend bool operator==(const FlowEdge& a, const FlowEdge& b) {
    return a.from == b.from && a.to == b.to;
  }
};

struct FlowEdgeHash {
  std::size_t operator()(const FlowEdge& e) const {
    PauliKeyHash h;
    return h(e.from) * 0x100000001b3ull ^ h(e.to);
  }
};

/// Generic per-edge path counter: counts, for every edge key, how many paths
/// contain it (at most once per path), plus the total number of paths. Shared
/// by Pauli flows and the synthetic layer-code flows.
template <class Key, class Hash = std::hash<Key>>
class EdgeCounter {
 public:
  void add_path(const std::vector<Key>& edges) {
    std::unordered_set<Key, Hash> seen;
    for (const auto& e : edges)
      if (seen.insert(e).second) ++counts_[e];
    ++total_paths_;
  }
  std::int64_t total_paths() const { return total_paths_; }
  std::int64_t count(const Key& e) const {
    auto it = counts_.find(e);
    return it == counts_.end() ? 0 : it->second;
  }
  /// Omega(e) = |Gamma| / |Gamma through e| as an exact rational.
  Rational omega(const Key& e) const {
    auto c = count(e);
    if (c == 0) throw ValidationError("edge is not indexed by any path of the flow");
    return Rational(total_paths_, c);
  }
  const std::unordered_map<Key, std::int64_t, Hash>& counts() const { return counts_; }

 private:
  std::unordered_map<Key, std::int64_t, Hash> counts_;
  std::int64_t total_paths_ = 0;
};

/// A Pauli flow Gamma_P: a non-empty set of distinct identity-rooted paths all
/// ending at the same target P, with its edge-multiplicity index.
class PauliFlow {
 public:
  PauliFlow(PauliOperator target, std::vector<PauliPath> paths)
      : target_(target), paths_(std::move(paths)) {
    if (paths_.empty()) throw ValidationError("flow must contain at least one path");
    for (std::size_t i = 0; i < paths_.size(); ++i) {
      paths_[i].validate(target_);
      for (std::size_t k = 0; k < i; ++k)
        if (paths_[i] == paths_[k])
          throw ValidationError("duplicate path in flow (paths " + std::to_string(k) + ", " +
                                std::to_string(i) + ")");
    }
    for (const auto& p : paths_) {
      std::vector<FlowEdge> es;
      for (std::size_t t = 0; t + 1 < p.vertices.size(); ++t)
        es.push_back(FlowEdge{p.vertices[t], p.vertices[t + 1]});
      index_.add_path(es);
    }
  }

  const PauliOperator& target() const { return target_; }
  const std::vector<PauliPath>& paths() const { return paths_; }
  const EdgeCounter<FlowEdge, FlowEdgeHash>& edge_index() const { return index_; }
  Rational omega(const FlowEdge& e) const { return index_.omega(e); }

 private:
  PauliOperator target_;
  std::vector<PauliPath> paths_;
  EdgeCounter<FlowEdge, FlowEdgeHash> index_;
};

/// One row of a free-energy certificate: an indexed edge with its step barrier,
/// exact multiplicity and contribution eps_bar - ln(Omega)/beta.
struct CertificateEdge {
  PauliOperator target;
  FlowEdge edge;
  double eps_bar = 0;
  Rational omega;
  double value = 0;
};

struct FreeEnergyCertificate {
  double beta = 0;
  double f_bar = 0;
  CertificateEdge witness;
  std::vector<CertificateEdge> edges;
};

/// Free energy of a single flow at inverse temperature beta:
/// max over indexed edges e of step_barrier(P, U_e) - ln(Omega_P(e)) / beta.
inline FreeEnergyCertificate flow_free_energy(const StabilizerHamiltonian& H,
                                              const PauliFlow& flow, double beta) {
  if (!(beta > 0)) throw ValidationError("flow free energy requires beta > 0");
  FreeEnergyCertificate cert;
  cert.beta = beta;
  cert.f_bar = -std::numeric_limits<double>::infinity();
  // Deterministic edge order: walk paths in order, first occurrence wins.
  std::unordered_set<FlowEdge, FlowEdgeHash> seen;
  for (const auto& p : flow.paths()) {
    for (std::size_t t = 0; t + 1 < p.vertices.size(); ++t) {
      FlowEdge e{p.vertices[t], p.vertices[t + 1]};
      if (!seen.insert(e).second) continue;
      CertificateEdge row;
      row.target = flow.target();
      row.edge = e;
      row.eps_bar = H.step_barrier(flow.target(), e.from);
      row.omega = flow.omega(e);
      row.value = row.eps_bar - row.omega.log() / beta;
      if (row.value > cert.f_bar) {
        cert.f_bar = row.value;
        cert.witness = row;
      }
      cert.edges.push_back(row);
    }
  }
  return cert;
}

/// Free energy of a flow set: max over flows, with the combined edge table.
inline FreeEnergyCertificate flow_set_free_energy(const StabilizerHamiltonian& H,
                                                  const std::vector<PauliFlow>& flows,
                                                  double beta) {
  if (flows.empty()) throw ValidationError("empty flow set");
  FreeEnergyCertificate out;
  out.beta = beta;
  out.f_bar = -std::numeric_limits<double>::infinity();
  for (const auto& f : flows) {
    auto c = flow_free_energy(H, f, beta);
    if (c.f_bar > out.f_bar) {
      out.f_bar = c.f_bar;
      out.witness = c.witness;
    }
    out.edges.insert(out.edges.end(), c.edges.begin(), c.edges.end());
  }
  return out;
}

}  // namespace thermflow
