#pragma once

#include "thermflow/flow.hpp"

namespace thermflow {

struct LayerBound {
  double value = 0;        // F = max_{1<=l'<=l} l' * (a - ln(m)/beta)
  std::uint64_t layers = 1;  // maximising l' (ties resolved to 1)
  double slope = 0;          // a - ln(m)/beta
};

/// Closed-form free-energy bound for the uniform layer model: each of l layers
/// costs `a` and fans out over m choices, so an l'-layer prefix has barrier
/// l'*a and multiplicity m^l'. The maximum over prefix depths is attained at
/// l' = 1 or l' = l depending on the sign of the per-layer slope.
inline LayerBound layer_flow_bound(double a, std::uint64_t m, std::uint64_t l, double beta) {
  if (a < 0) throw ValidationError("layer cost must be non-negative");
  if (m < 1) throw ValidationError("branching factor must be at least 1");
  if (l < 1) throw ValidationError("layer count must be at least 1");
  if (!(beta > 0)) throw ValidationError("inverse temperature must be positive");
  double slope = a - std::log(double(m)) / beta;
  LayerBound out;
  out.slope = slope;
  if (slope > 0) {
    out.layers = l;
    out.value = double(l) * slope;
  } else {
    out.layers = 1;
    out.value = slope;
  }
  return out;
}

struct LayerEdgeKey {
  std::uint64_t layer;   // 1-based depth of the edge's starting prefix + 1
  std::uint64_t prefix;  // choices so far, encoded base m, most recent last
  bool operator==(const LayerEdgeKey& o) const {
    return layer == o.layer && prefix == o.prefix;
  }
};

struct LayerEdgeKeyHash {
  std::size_t operator()(const LayerEdgeKey& k) const {
    std::uint64_t h = k.layer * 0x9e3779b97f4a7c15ULL;
    h ^= k.prefix + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return std::size_t(h);
  }
};

/// Explicit synthetic flow for the layer model: one path per tuple in
/// {0..m-1}^l, with the depth-l' edge of a path identified by its length-l'
/// choice prefix. Materialises all m^l paths, so it is capped.
class SyntheticLayerFlow {
 public:
  SyntheticLayerFlow(std::uint64_t m, std::uint64_t l,
                     std::uint64_t cap = std::uint64_t(1) << 20)
      : m_(m), l_(l) {
    if (m < 1 || l < 1) throw ValidationError("layer model needs m >= 1 and l >= 1");
    double total = std::pow(double(m), double(l));
    if (total > double(cap))
      throw CapError("synthetic layer flow would materialise more than the cap allows");
    std::vector<std::uint64_t> tuple(l, 0);
    for (;;) {
      std::vector<LayerEdgeKey> edges;
      std::uint64_t prefix = 0;
      for (std::uint64_t d = 0; d < l; ++d) {
        prefix = prefix * m + tuple[d];
        edges.push_back(LayerEdgeKey{d + 1, prefix});
      }
      index_.add_path(edges);
      // odometer increment
      std::uint64_t d = l;
      while (d > 0) {
        if (++tuple[d - 1] < m) break;
        tuple[d - 1] = 0;
        --d;
      }
      if (d == 0) break;
    }
  }

  std::uint64_t m() const { return m_; }
  std::uint64_t l() const { return l_; }
  std::uint64_t total_paths() const { return index_.total_paths(); }

  Rational omega(std::uint64_t layer, std::uint64_t prefix) const {
    return index_.omega(LayerEdgeKey{layer, prefix});
  }

  /// Free energy of the synthetic flow under per-layer cost `a`, evaluated
  /// edge by edge through the shared multiplicity index (no closed form).
  LayerBound free_energy(double a, double beta) const {
    if (a < 0) throw ValidationError("layer cost must be non-negative");
    if (!(beta > 0)) throw ValidationError("inverse temperature must be positive");
    LayerBound out;
    out.value = -std::numeric_limits<double>::infinity();
    for (const auto& [key, cnt] : index_.counts()) {
      double barrier = a * double(key.layer);  // climbing the l'-th layer peaks at l'*a
      double v = barrier - index_.omega(key).log() / beta;
      if (v > out.value + 1e-15 ||
          (std::abs(v - out.value) <= 1e-15 && key.layer < out.layers)) {
        out.value = v;
        out.layers = key.layer;
      }
    }
    out.slope = a - std::log(double(m_)) / beta;
    return out;
  }

  const EdgeCounter<LayerEdgeKey, LayerEdgeKeyHash>& index() const { return index_; }

 private:
  std::uint64_t m_, l_;
  EdgeCounter<LayerEdgeKey, LayerEdgeKeyHash> index_;
};

}  // namespace thermflow
