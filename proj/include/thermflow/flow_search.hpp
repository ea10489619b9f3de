#pragma once

#include <map>
#include <queue>

#include "thermflow/flow.hpp"

namespace thermflow {

/// Step letters of the deterministic stabilizer-building path zeta(S):
/// generator by generator (basis order), sites in ascending order within each.
inline std::vector<PauliOperator> zeta_steps(const GeneratorBasis& basis,
                                             const PauliOperator& s) {
  auto expo = basis.in_group(s);
  if (!expo) throw ValidationError("zeta target is not a stabilizer group element");
  std::vector<PauliOperator> steps;
  for (std::size_t j = 0; j < basis.generators().size(); ++j) {
    if (!((*expo >> j) & 1)) continue;
    const auto& g = basis.generators()[j];
    for (std::uint32_t site = 1; site <= g.n; ++site) {
      char c = g.letter_at(site);
      if (c != 'I') steps.push_back(PauliOperator::single_site(c, site, g.n));
    }
  }
  return steps;
}

struct LiftReport {
  double zeta_cost = 0;            // max step barrier over zeta-segment vertices
  double f_bar_before = 0;         // free energy of the degenerate input flow
  double f_bar_after = 0;
  double barrier_max_before = 0;   // max step barrier over input-path vertices
  std::size_t duplicates_removed = 0;
};

struct LiftResult {
  PauliFlow flow;
  LiftReport report;
};

/// Degeneracy lift: turns paths ending at S_gamma P (any stabilizer multiple of
/// the target) into paths ending exactly at P by prepending zeta(S_gamma) and
/// shifting the original path by S_gamma. Step barriers of the shifted segment
/// are unchanged (stabilizer invariance); the zeta segment adds at most the
/// reported zeta_cost per edge.
inline LiftResult degeneracy_lift(const StabilizerHamiltonian& H,
                                  const std::vector<PauliPath>& paths,
                                  const PauliOperator& target, double beta) {
  if (paths.empty()) throw ValidationError("degeneracy lift needs at least one path");
  LiftReport rep;

  // Free energy of the degenerate input flow: per-edge barriers are measured
  // against the common coset (stabilizer-invariant), multiplicities across the
  // shared edge index.
  EdgeCounter<FlowEdge, FlowEdgeHash> pre_index;
  for (const auto& p : paths) {
    p.validate();
    std::vector<FlowEdge> es;
    for (std::size_t t = 0; t + 1 < p.vertices.size(); ++t)
      es.push_back(FlowEdge{p.vertices[t], p.vertices[t + 1]});
    pre_index.add_path(es);
  }
  rep.f_bar_before = -std::numeric_limits<double>::infinity();
  for (const auto& p : paths) {
    for (std::size_t t = 0; t + 1 < p.vertices.size(); ++t) {
      double eb = H.step_barrier(target, p.vertices[t]);
      rep.barrier_max_before = std::max(rep.barrier_max_before, eb);
      auto om = pre_index.omega(FlowEdge{p.vertices[t], p.vertices[t + 1]});
      rep.f_bar_before = std::max(rep.f_bar_before, eb - om.log() / beta);
    }
  }
  if (paths.size() == 1 && paths[0].vertices.size() == 1)
    rep.f_bar_before = 0;  // single empty path: no edges

  std::vector<PauliPath> lifted;
  for (const auto& p : paths) {
    PauliOperator sg = multiply(p.endpoint(), target);
    if (sg.is_identity()) {
      lifted.push_back(p);
      continue;
    }
    auto zsteps = zeta_steps(H.basis(), sg);  // throws if endpoint not in the coset
    PauliPath q;
    q.vertices.push_back(PauliOperator::identity(H.n()));
    for (const auto& st : zsteps) {
      rep.zeta_cost = std::max(rep.zeta_cost, H.step_barrier(target, q.vertices.back()));
      q.vertices.push_back(multiply(q.vertices.back(), st));
    }
    // q now ends at sg; append the original path shifted by sg (skipping its
    // identity root, which equals sg itself after the shift).
    for (std::size_t t = 1; t < p.vertices.size(); ++t)
      q.vertices.push_back(multiply(sg, p.vertices[t]));
    q.validate(target);
    lifted.push_back(std::move(q));
  }
  // The lift can merge distinct degenerate paths into equal ones; keep one copy.
  std::vector<PauliPath> dedup;
  for (auto& q : lifted) {
    bool dup = false;
    for (const auto& r : dedup) dup = dup || (q == r);
    if (dup) ++rep.duplicates_removed;
    else dedup.push_back(std::move(q));
  }

  LiftResult out{PauliFlow(target, std::move(dedup)), rep};
  auto cert = flow_free_energy(H, out.flow, beta);
  out.report.f_bar_after = cert.f_bar;
  // Airtight sanity bound: every lifted edge value is at most its step barrier,
  // which is at most max(zeta_cost, barrier_max_before). Implies the
  // f_bar' <= f_bar + zeta_cost bound whenever f_bar >= 0.
  double cap = std::max(out.report.zeta_cost, out.report.barrier_max_before);
  if (out.report.f_bar_after > cap + 1e-9)
    throw CertificateError("degeneracy lift raised the free energy above its certified cap");
  return out;
}

struct BottleneckResult {
  PauliPath path;
  double bottleneck = 0;  // max step barrier over non-final vertices of `path`
  bool optimal = true;    // false if the search budget was exhausted
};

struct SearchOptions {
  std::size_t budget = std::size_t(1) << 22;  // max states settled
  bool mod_stabilizer = false;  // search cosets (then lift) instead of Paulis
};

/// Bottleneck-shortest path from the identity to `target`: minimises, over
/// paths, the maximum step barrier of the vertices a step leaves from. Dijkstra
/// with max-composition; deterministic tie-breaking on the state bit pattern.
inline BottleneckResult bottleneck_path_search(const StabilizerHamiltonian& H,
                                               const PauliOperator& target,
                                               SearchOptions opts = {}) {
  if (target.n != H.n()) throw ValidationError("target qubit count mismatch");
  struct Node {
    double key;
    PauliOperator state;
    bool operator>(const Node& o) const {
      if (key != o.key) return key > o.key;
      if (state.x != o.state.x) return state.x > o.state.x;
      return state.z > o.state.z;
    }
  };
  auto canon = [&](const PauliOperator& p) {
    return opts.mod_stabilizer ? H.basis().canonical_representative(p) : p;
  };
  PauliOperator goal = canon(target);
  std::unordered_map<PauliOperator, double, PauliKeyHash> best;
  std::unordered_map<PauliOperator, PauliOperator, PauliKeyHash> parent;
  std::priority_queue<Node, std::vector<Node>, std::greater<Node>> pq;
  PauliOperator start = PauliOperator::identity(H.n());
  pq.push({0.0, start});
  best[start] = 0.0;
  std::size_t settled = 0;
  bool feasible = false, truncated = false;
  std::unordered_set<PauliOperator, PauliKeyHash> done;
  while (!pq.empty()) {
    Node top = pq.top();
    pq.pop();
    if (done.count(top.state)) continue;
    done.insert(top.state);
    if (top.state == goal) { feasible = true; break; }
    if (++settled > opts.budget) { truncated = true; break; }
    double leave_cost = H.step_barrier(target, top.state);
    double nk = std::max(top.key, leave_cost);
    for (std::uint32_t site = 1; site <= H.n(); ++site)
      for (char letter : {'X', 'Y', 'Z'}) {
        PauliOperator nxt =
            canon(multiply(top.state, PauliOperator::single_site(letter, site, H.n())));
        auto it = best.find(nxt);
        if (it == best.end() || nk < it->second) {
          best[nxt] = nk;
          parent[nxt] = top.state;
          pq.push({nk, nxt});
        }
      }
  }
  if (!feasible) {
    if (truncated) throw CapError("bottleneck search budget exhausted before reaching the target");
    throw ValidationError("target unreachable (internal)");  // cannot happen: graph is connected
  }
  // Reconstruct in search space, then (coset mode) translate back to Paulis.
  std::vector<PauliOperator> rev{goal};
  while (rev.back() != start) rev.push_back(parent.at(rev.back()));
  PauliPath path;
  for (auto it = rev.rbegin(); it != rev.rend(); ++it) path.vertices.push_back(*it);
  if (opts.mod_stabilizer) {
    // Vertices are canonical representatives; consecutive reps differ by a
    // single site times a stabilizer only in the quotient. Rebuild actual
    // Paulis: rep-steps are single-site in the quotient, and we realise each
    // step with the single-site letter connecting the actual vertices.
    std::vector<PauliOperator> actual{start};
    for (std::size_t t = 1; t < path.vertices.size(); ++t) {
      PauliOperator want = path.vertices[t];
      bool found = false;
      for (std::uint32_t site = 1; site <= H.n() && !found; ++site)
        for (char letter : {'X', 'Y', 'Z'}) {
          PauliOperator cand =
              multiply(actual.back(), PauliOperator::single_site(letter, site, H.n()));
          if (canon(cand) == want) { actual.push_back(cand); found = true; break; }
        }
      if (!found) throw ValidationError("internal: coset path reconstruction failed");
    }
    path.vertices = std::move(actual);
    if (path.endpoint() != target) {
      auto lift = degeneracy_lift(H, {path}, target, 1.0);
      path = lift.flow.paths()[0];
    }
  }
  path.validate(target);
  double bn = 0;
  for (std::size_t t = 0; t + 1 < path.vertices.size(); ++t)
    bn = std::max(bn, H.step_barrier(target, path.vertices[t]));
  return BottleneckResult{std::move(path), bn, !truncated};
}

/// Deterministically generates up to `budget` distinct variants of a seed path
/// whose step barriers stay at or below the seed's bottleneck: permutations of
/// the seed's step letters, plus stabilizer round trips (build S, run the
/// shifted seed, unbuild S). More paths never raise the flow free energy above
/// the seed barrier, since every edge keeps eps_bar <= ceiling and Omega >= 1.
inline PauliFlow ensemble_flow_generate(const StabilizerHamiltonian& H,
                                        const PauliOperator& target, std::size_t budget,
                                        const PauliPath* seed_path = nullptr) {
  if (budget == 0) throw ValidationError("flow budget must be at least 1");
  PauliPath seed;
  if (seed_path) {
    seed = *seed_path;
    seed.validate(target);
  } else {
    seed = bottleneck_path_search(H, target).path;
  }
  double ceiling = 0;
  for (std::size_t t = 0; t + 1 < seed.vertices.size(); ++t)
    ceiling = std::max(ceiling, H.step_barrier(target, seed.vertices[t]));

  std::vector<PauliPath> chosen{seed};
  auto try_add = [&](const std::vector<PauliOperator>& steps) {
    if (chosen.size() >= budget) return;
    PauliPath cand = PauliPath::from_steps(H.n(), steps);
    if (cand.endpoint() != target) return;
    double mx = 0;
    for (std::size_t t = 0; t + 1 < cand.vertices.size(); ++t)
      mx = std::max(mx, H.step_barrier(target, cand.vertices[t]));
    if (mx > ceiling + 1e-12) return;
    for (const auto& p : chosen)
      if (p == cand) return;
    chosen.push_back(std::move(cand));
  };

  std::vector<PauliOperator> letters;
  for (std::size_t t = 0; t + 1 < seed.vertices.size(); ++t) letters.push_back(seed.step(t));
  std::sort(letters.begin(), letters.end());
  if (letters.size() <= 8) {  // enumerate all distinct orderings
    auto perm = letters;
    do {
      try_add(perm);
      if (chosen.size() >= budget) break;
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  // Stabilizer round trips: zeta(S) ++ seed letters ++ zeta(S), cheapest first.
  if (chosen.size() < budget) {
    std::vector<PauliOperator> seed_steps;
    for (std::size_t t = 0; t + 1 < seed.vertices.size(); ++t) seed_steps.push_back(seed.step(t));
    std::uint64_t r = H.basis().rank();
    std::vector<std::uint64_t> masks;
    for (std::uint64_t m = 1; r < 16 && m < (std::uint64_t(1) << r); ++m) masks.push_back(m);
    std::sort(masks.begin(), masks.end(), [](auto a, auto b) {
      auto pa = std::popcount(a), pb = std::popcount(b);
      return pa != pb ? pa < pb : a < b;
    });
    for (auto m : masks) {
      auto z = zeta_steps(H.basis(), H.basis().element(m));
      std::vector<PauliOperator> steps = z;
      steps.insert(steps.end(), seed_steps.begin(), seed_steps.end());
      steps.insert(steps.end(), z.begin(), z.end());
      try_add(steps);
      if (chosen.size() >= budget) break;
    }
  }
  return PauliFlow(target, std::move(chosen));
}

}  // namespace thermflow
