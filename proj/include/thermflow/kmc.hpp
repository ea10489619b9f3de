#pragma once

#include <functional>
#include <random>

#include "thermflow/davies.hpp"

namespace thermflow {

/// Classical embedded chain of the thermalization dynamics: states are Pauli
/// cosets modulo the stabilizer group (canonical representatives), a coupling
/// letter a jumps [Q] -> [aQ] at rate h applied to the Bohr frequency of the
/// syndrome flip. Jumps with aQ ~ Q (a in the group) are exact self-loops and
/// are dropped; logical jumps (trivial syndrome shift, a not in the group)
/// remain. Reversible with stationary weight proportional to p(sigma_Q).
struct ClassicalChain {
  std::uint32_t n = 0, r = 0;
  double beta = 0;
  RateFunction rate;
  std::vector<PauliOperator> reps;
  std::unordered_map<PauliOperator, std::size_t, PauliKeyHash> index;
  Eigen::MatrixXd generator;   // column convention: G(x, y) = rate y -> x
  Eigen::VectorXd stationary;  // normalised

  std::size_t state_of(const PauliOperator& p) const {
    auto it = index.find(p);
    if (it == index.end()) throw ValidationError("operator is not a chain representative");
    return it->second;
  }
};

inline ClassicalChain build_classical_chain(const StabilizerHamiltonian& H, double beta,
                                            RateKind kind,
                                            std::uint64_t state_cap = std::uint64_t(1) << 14) {
  if (!(beta > 0)) throw ValidationError("inverse temperature must be positive");
  H.check_syndrome_cap();
  if (2 * H.n() > 62 || (std::uint64_t(1) << (2 * H.n() - H.rank())) > state_cap)
    throw CapError("classical chain would exceed the state cap");
  ClassicalChain c{H.n(), H.rank(), beta,
                   RateFunction::make(kind, beta, H.frequency_range())};
  const std::uint64_t pdim = std::uint64_t(1) << (2 * H.n());
  for (std::uint64_t i = 0; i < pdim; ++i) {
    PauliOperator p = pauli_from_index(i, H.n());
    if (H.basis().canonical_representative(p) == p) {
      c.index.emplace(p, c.reps.size());
      c.reps.push_back(p);
    }
  }
  const std::size_t m = c.reps.size();
  GibbsTable gibbs = H.gibbs(beta);
  c.generator = Eigen::MatrixXd::Zero(m, m);
  c.stationary.resize(m);
  for (std::size_t y = 0; y < m; ++y) {
    Syndrome sy = H.basis().syndrome(c.reps[y]);
    c.stationary(y) = gibbs(sy);
    for (const auto& a : default_couplings(H.n())) {
      PauliOperator to = H.basis().canonical_representative(multiply(a, c.reps[y]));
      if (to == c.reps[y]) continue;  // exact self-loop: a is a stabilizer
      double h = c.rate(H.bohr_frequency(sy, a));
      std::size_t x = c.index.at(to);
      c.generator(x, y) += h;
      c.generator(y, y) -= h;
    }
  }
  c.stationary /= c.stationary.sum();
  return c;
}

/// Spectral gap of the reversible chain via the symmetrised generator.
inline double spectral_gap(const ClassicalChain& c) {
  const std::size_t m = c.reps.size();
  Eigen::VectorXd sqp = c.stationary.cwiseSqrt();
  Eigen::MatrixXd s(m, m);
  for (std::size_t x = 0; x < m; ++x)
    for (std::size_t y = 0; y < m; ++y) s(x, y) = c.generator(x, y) * sqp(y) / sqp(x);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
  Eigen::VectorXd ev = es.eigenvalues();  // ascending, top one is ~0
  return -ev(m - 2);
}

/// Expected hitting time of an absorbing state set, solving the linear system
/// on the complement (test oracle for the sampled estimates).
inline double exact_mean_first_passage(const ClassicalChain& c,
                                       const std::vector<std::size_t>& absorbing,
                                       std::size_t start) {
  const std::size_t m = c.reps.size();
  std::vector<bool> absorb(m, false);
  for (auto i : absorbing) absorb.at(i) = true;
  if (absorb[start]) return 0;
  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < m; ++i)
    if (!absorb[i]) free.push_back(i);
  Eigen::MatrixXd L(free.size(), free.size());
  for (std::size_t i = 0; i < free.size(); ++i)
    for (std::size_t j = 0; j < free.size(); ++j)
      L(i, j) = c.generator(free[j], free[i]);  // generator on functions
  Eigen::VectorXd rhs = Eigen::VectorXd::Constant(free.size(), -1.0);
  Eigen::VectorXd h = L.fullPivLu().solve(rhs);
  for (std::size_t i = 0; i < free.size(); ++i)
    if (free[i] == start) return h(i);
  throw ValidationError("start state not found");
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct TrajectoryConfig {
  double t_max = 0;
  std::uint64_t seed = 0;
  std::uint64_t index = 0;    // trajectory number; decorrelates streams
  double rate_scale = 1.0;    // overall time unit
  PauliOperator initial;      // any coset member; reduced internally
};

/// Jump record: states[k] holds from times[k] (inclusive) to times[k+1].
struct Trajectory {
  std::vector<double> times;
  std::vector<PauliOperator> states;  // canonical representatives
  double t_max = 0;

  const PauliOperator& state_at(double t) const {
    if (t < 0 || t > t_max) throw ValidationError("query time outside the trajectory window");
    std::size_t k = std::size_t(std::upper_bound(times.begin(), times.end(), t) - times.begin());
    return states[k - 1];
  }
};

/// Gillespie simulation directly on coset representatives; no transition table
/// is materialised. Events are the non-self-loop single-site jumps; waiting
/// times are exponential via inverse CDF, the event is picked by binary search
/// on the cumulative rate vector. Stops early when `stop` returns true for a
/// newly entered state.
inline Trajectory gillespie_run(const StabilizerHamiltonian& H, double beta, RateKind kind,
                                const TrajectoryConfig& cfg,
                                const std::function<bool(const PauliOperator&)>& stop = {}) {
  if (!(cfg.t_max > 0)) throw ValidationError("t_max must be positive");
  if (!(cfg.rate_scale > 0)) throw ValidationError("rate_scale must be positive");
  RateFunction rate = RateFunction::make(kind, beta, H.frequency_range());
  std::mt19937_64 rng(splitmix64(cfg.seed ^ (0x9e3779b97f4a7c15ULL * (cfg.index + 1))));
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  auto couplings = default_couplings(H.n());
  Trajectory out;
  out.t_max = cfg.t_max;
  PauliOperator state = H.basis().canonical_representative(
      cfg.initial.n ? cfg.initial : PauliOperator::identity(H.n()));
  double t = 0;
  out.times.push_back(0);
  out.states.push_back(state);
  std::vector<double> cum(couplings.size());
  std::vector<PauliOperator> dest(couplings.size());
  for (;;) {
    double total = 0;
    std::size_t nev = 0;
    Syndrome sy = H.basis().syndrome(state);
    for (const auto& a : couplings) {
      PauliOperator to = H.basis().canonical_representative(multiply(a, state));
      if (to == state) continue;
      total += cfg.rate_scale * rate(H.bohr_frequency(sy, a));
      cum[nev] = total;
      dest[nev] = to;
      ++nev;
    }
    if (nev == 0) break;  // absorbing (cannot happen with full coupling set)
    t += -std::log1p(-unif(rng)) / total;
    if (t >= cfg.t_max) break;
    double u = unif(rng) * total;
    std::size_t pick =
        std::size_t(std::lower_bound(cum.begin(), cum.begin() + nev, u) - cum.begin());
    if (pick >= nev) pick = nev - 1;
    state = dest[pick];
    out.times.push_back(t);
    out.states.push_back(state);
    if (stop && stop(state)) break;
  }
  return out;
}

/// Counts of the trajectory end states (one draw per trajectory), indexed like
/// the chain states; suitable for a multinomial goodness-of-fit test against
/// the stationary law when t_max is well past the relaxation time.
inline Eigen::VectorXd end_state_counts(const ClassicalChain& chain,
                                        const std::vector<Trajectory>& trajs) {
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(chain.reps.size());
  for (const auto& tr : trajs) counts(chain.state_of(tr.states.back())) += 1;
  return counts;
}

inline double chi_square_statistic(const Eigen::VectorXd& counts,
                                   const Eigen::VectorXd& probabilities) {
  if (counts.size() != probabilities.size()) throw ValidationError("size mismatch");
  double total = counts.sum(), stat = 0;
  for (Eigen::Index i = 0; i < counts.size(); ++i) {
    double expect = total * probabilities(i);
    if (expect <= 0) throw ValidationError("expected count must be positive in every cell");
    stat += (counts(i) - expect) * (counts(i) - expect) / expect;
  }
  return stat;
}

/// Ensemble mean (and standard error) of an observable over chain states at
/// the given times.
struct MeanCurve {
  std::vector<double> times, mean, stderr_;
};

inline MeanCurve mean_curve(const ClassicalChain& chain, const std::vector<Trajectory>& trajs,
                            const Eigen::VectorXd& observable, const std::vector<double>& times) {
  if (observable.size() != Eigen::Index(chain.reps.size()))
    throw ValidationError("observable must assign a value to every chain state");
  MeanCurve out;
  out.times = times;
  for (double t : times) {
    double s = 0, s2 = 0;
    for (const auto& tr : trajs) {
      double v = observable(chain.state_of(tr.state_at(t)));
      s += v;
      s2 += v * v;
    }
    double m = s / double(trajs.size());
    out.mean.push_back(m);
    double var = std::max(0.0, s2 / double(trajs.size()) - m * m);
    out.stderr_.push_back(std::sqrt(var / double(trajs.size())));
  }
  return out;
}

struct DecayFit {
  double lambda = 0;      // fitted relaxation rate
  double intercept = 0;   // ln|m(0) - m_inf| extrapolation
  std::size_t points = 0;
};

/// Least-squares fit of ln|m(t) - m_inf| = intercept - lambda t, using points
/// after the burn-in fraction whose distance from m_inf clears the noise
/// floor (so the log is meaningful).
inline DecayFit fit_decay(const MeanCurve& curve, double m_inf, double noise_floor,
                          double burn_in_frac = 0.1) {
  double t_end = curve.times.empty() ? 0 : curve.times.back();
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < curve.times.size(); ++i) {
    if (curve.times[i] < burn_in_frac * t_end) continue;
    double d = std::abs(curve.mean[i] - m_inf);
    if (d < noise_floor) continue;
    xs.push_back(curve.times[i]);
    ys.push_back(std::log(d));
  }
  if (xs.size() < 4)
    throw ValidationError("too few usable points above the noise floor to fit a decay rate");
  double n = double(xs.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  double denom = n * sxx - sx * sx;
  if (denom <= 0) throw ValidationError("degenerate time grid");
  DecayFit out;
  out.lambda = -(n * sxy - sx * sy) / denom;
  out.intercept = (sy - (-out.lambda) * sx) / n;
  out.points = xs.size();
  return out;
}

/// Deterministic minimum-weight decoder: for every syndrome, the lowest
/// (weight, x, z) Pauli producing it. The logical class of a coset is the
/// canonical representative after applying the correction; class I means "no
/// logical error".
struct Decoder {
  std::vector<PauliOperator> correction;  // indexed by syndrome mask

  static Decoder build(const StabilizerHamiltonian& H) {
    if (H.n() > 8) throw CapError("decoder table capped at 8 qubits");
    H.check_syndrome_cap();
    Decoder d;
    d.correction.assign(std::size_t(1) << H.rank(), PauliOperator());
    std::vector<bool> seen(std::size_t(1) << H.rank(), false);
    for (std::uint64_t i = 0; i < pauli_space_dim(H.n()); ++i) {
      PauliOperator p = pauli_from_index(i, H.n());
      std::uint64_t s = H.basis().syndrome(p).mask;
      if (!seen[s] || better(p, d.correction[s])) {
        d.correction[s] = p;
        seen[s] = true;
      }
    }
    return d;
  }

  PauliOperator logical_class(const StabilizerHamiltonian& H, const PauliOperator& q) const {
    std::uint64_t s = H.basis().syndrome(q).mask;
    return H.basis().canonical_representative(multiply(q, correction[s]));
  }

 private:
  static bool better(const PauliOperator& a, const PauliOperator& b) {
    if (a.weight() != b.weight()) return a.weight() < b.weight();
    if (a.x != b.x) return a.x < b.x;
    return a.z < b.z;
  }
};

struct LifetimeEstimate {
  std::size_t trials = 0, failures = 0;
  double observed_time = 0;  // sum over trials of min(T_fail, t_max)
  double lambda_hat = 0;     // censored-exponential MLE: failures / observed_time
  double lifetime = 0;       // 1 / lambda_hat (infinity when nothing failed)
};

/// Samples the logical failure rate: trajectories start in the trivial class
/// and stop when the decoder would misidentify the logical class.
inline LifetimeEstimate logical_lifetime_estimate(const StabilizerHamiltonian& H, double beta,
                                                  RateKind kind, std::size_t trials,
                                                  double t_max, std::uint64_t seed,
                                                  double rate_scale = 1.0) {
  Decoder dec = Decoder::build(H);
  PauliOperator good = dec.logical_class(H, PauliOperator::identity(H.n()));
  LifetimeEstimate out;
  out.trials = trials;
  for (std::size_t k = 0; k < trials; ++k) {
    TrajectoryConfig cfg{t_max, seed, k, rate_scale, PauliOperator::identity(H.n())};
    auto traj = gillespie_run(H, beta, kind, cfg, [&](const PauliOperator& st) {
      return dec.logical_class(H, st) != good;
    });
    bool failed = dec.logical_class(H, traj.states.back()) != good;
    out.failures += failed;
    out.observed_time += failed ? traj.times.back() : t_max;
  }
  out.lambda_hat = out.failures ? out.failures / out.observed_time : 0;
  out.lifetime = out.failures ? 1.0 / out.lambda_hat : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace thermflow
