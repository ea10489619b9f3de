// Acceptance checks for the full certificate pipeline: each check prints one
// PASS/FAIL line with the measured deviation and the binary exits non-zero if
// any check fails.  Tolerances are pinned; do not loosen them to make a
// regression disappear.
#include <chrono>
#include <cstdio>
#include <random>
#include <sstream>

#include "oracle_dense.hpp"
#include "thermflow/factorization.hpp"
#include "thermflow/flow_search.hpp"
#include "thermflow/kmc.hpp"
#include "thermflow/layer_model.hpp"
#include "thermflow/mixing.hpp"
#include "thermflow/support_number.hpp"

using namespace thermflow;

namespace {

StabilizerHamiltonian make_code(std::uint32_t n, const std::vector<std::string>& gens,
                                const std::vector<double>& J) {
  std::vector<HamiltonianTerm> terms;
  for (std::size_t i = 0; i < gens.size(); ++i)
    terms.push_back({parse_pauli(gens[i]), J[i]});
  return StabilizerHamiltonian(n, terms);
}

StabilizerHamiltonian rep2() { return make_code(2, {"ZZ"}, {1.0}); }
StabilizerHamiltonian rep3() { return make_code(3, {"ZZI", "IZZ"}, {1.0, 1.0}); }
StabilizerHamiltonian bell() { return make_code(2, {"XX", "ZZ"}, {1.0, 1.0}); }
StabilizerHamiltonian two_stab4() {
  return make_code(4, {"ZZII", "IIZZ"}, {1.0, 1.0});
}

PauliOperator random_pauli(std::uint32_t n, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::uint64_t> bits(0, (std::uint64_t(1) << n) - 1);
  return PauliOperator{bits(rng), bits(rng), n};
}

Eigen::VectorXd gap_mode_observable(const ClassicalChain& chain) {
  const Eigen::Index m = Eigen::Index(chain.reps.size());
  Eigen::VectorXd sqp = chain.stationary.cwiseSqrt();
  Eigen::MatrixXd s(m, m);
  for (Eigen::Index x = 0; x < m; ++x)
    for (Eigen::Index y = 0; y < m; ++y) s(x, y) = chain.generator(x, y) * sqp(y) / sqp(x);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  return es.eigenvectors().col(m - 2).cwiseQuotient(sqp);
}

struct Check {
  std::string label;
  bool pass = false;
  std::string detail;
};

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << x;
  return os.str();
}

// 1. The group-theoretic step barrier must equal the symmetrized excitation
//    energy measured on dense matrices: exhaustively on two qubits, sampled on
//    three.
Check check_step_barriers() {
  Check c{"step barriers match the dense excitation oracle"};
  double worst = 0;
  {
    StabilizerHamiltonian H = rep2();
    for (std::uint64_t t = 0; t < pauli_space_dim(2); ++t)
      for (std::uint64_t u = 0; u < pauli_space_dim(2); ++u) {
        PauliOperator target = pauli_from_index(t, 2), start = pauli_from_index(u, 2);
        worst = std::max(worst, std::abs(H.step_barrier(target, start) -
                                         oracle::step_barrier(H, target, start)));
      }
  }
  {
    StabilizerHamiltonian H = rep3();
    std::mt19937_64 rng(0xacce5501);
    for (int trial = 0; trial < 200; ++trial) {
      PauliOperator target = random_pauli(3, rng), start = random_pauli(3, rng);
      worst = std::max(worst, std::abs(H.step_barrier(target, start) -
                                       oracle::step_barrier(H, target, start)));
    }
  }
  c.pass = worst < 1e-9;
  c.detail = "256 exhaustive + 200 random pairs, max deviation " + fmt(worst);
  return c;
}

// 2. The telescoping decomposition of a path difference must be exact.
Check check_telescoping() {
  Check c{"telescoping path decomposition is exact"};
  std::mt19937_64 rng(0xacce5502);
  double worst = 0;
  for (const auto& H : {rep2(), two_stab4()}) {
    const std::uint32_t n = H.n();
    auto reps = coset_representatives(H.basis(), n);
    std::uniform_int_distribution<std::size_t> pick(0, reps.size() - 1);
    std::uniform_int_distribution<std::uint64_t> synd(0,
                                                      (std::uint64_t(1) << H.rank()) - 1);
    std::uniform_int_distribution<int> len(1, 6), site(1, int(n)), letter(0, 2);
    for (int trial = 0; trial < 100; ++trial) {
      PauliPath path;
      path.vertices.push_back(PauliOperator::identity(n));
      int steps = len(rng);
      for (int t = 0; t < steps; ++t)
        path.vertices.push_back(
            multiply(path.vertices.back(),
                     PauliOperator::single_site("XYZ"[letter(rng)],
                                                std::uint32_t(site(rng)), n)));
      auto tc = telescopic_check(H, reps[pick(rng)], path, random_pauli(n, rng), synd(rng));
      worst = std::max(worst, tc.residual);
    }
  }
  c.pass = worst <= 1e-12;
  c.detail = "200 random paths on two codes, max residual " + fmt(worst);
  return c;
}

struct FactorizationSweep {
  double residual = 0;   // max |AW - B| over all blocks and flow sets
  double row_norm = 0;   // max |direct - closed| row-norm deviation
};

FactorizationSweep factorization_sweep() {
  StabilizerHamiltonian H = rep2();
  DaviesGenerator g = build_davies(H, 1.0, RateKind::Glauber, true);
  const std::uint32_t n = H.n();

  PauliFlow one_path(parse_pauli("XI"),
                     {PauliPath{{parse_pauli("II"), parse_pauli("XI")}}});
  PauliFlow two_path(parse_pauli("XX"),
                     {PauliPath{{parse_pauli("II"), parse_pauli("XI"), parse_pauli("XX")}},
                      PauliPath{{parse_pauli("II"), parse_pauli("IX"), parse_pauli("XX")}}});
  std::vector<PauliFlow> ensemble;
  for (const auto& rep : coset_representatives(H.basis(), n))
    if (!rep.is_identity()) ensemble.push_back(ensemble_flow_generate(H, rep, 4));

  std::vector<std::vector<PauliFlow>> flow_sets{{one_path}, {two_path}, ensemble};
  FactorizationSweep out;
  for (const auto& flows : flow_sets)
    for (const auto& rep : coset_representatives(H.basis(), n))
      for (std::uint64_t s = 0; s < (std::uint64_t(1) << H.rank()); ++s) {
        BlockFactorization bf(g, flows, rep, s);
        out.residual = std::max(out.residual, bf.residual());
        for (std::uint64_t v = 0; v < pauli_space_dim(n); ++v)
          for (const auto& alpha : g.couplings)
            for (std::uint64_t q = 0; q < pauli_space_dim(n); ++q) {
              PauliOperator V = pauli_from_index(v, n), Q = pauli_from_index(q, n);
              out.row_norm = std::max(out.row_norm,
                                      std::abs(bf.row_norm_direct(V, alpha, Q) -
                                               bf.row_norm_closed(V, alpha, Q)));
            }
      }
  return out;
}

// 3. The jump-operator factorization A W = B must close on every coset block,
//    for single-path, two-path, and full ensemble flow sets.
Check check_factorization(const FactorizationSweep& sweep) {
  Check c{"block factorization closes on every block"};
  c.pass = sweep.residual <= 1e-9;
  c.detail = "48 block/flow-set combinations, max |AW-B| " + fmt(sweep.residual);
  return c;
}

// 4. The closed-form expression for the W row norms must equal the directly
//    accumulated rows.
Check check_row_norms(const FactorizationSweep& sweep) {
  Check c{"closed-form row norms equal direct row norms"};
  c.pass = sweep.row_norm <= 1e-9;
  c.detail = "all (V, alpha, Q) triples, max deviation " + fmt(sweep.row_norm);
  return c;
}

// 5. The exact support number must sit below the certified flow bound
//    (4n / c) e^{beta f} for every code, temperature, and rate family.
Check check_flow_bound() {
  Check c{"exact support numbers obey the flow free-energy bound"};
  double worst_ratio = 0;
  int configs = 0;
  for (const auto& H : {rep2(), rep3(), two_stab4()}) {
    std::vector<PauliFlow> flows;
    for (const auto& rep : coset_representatives(H.basis(), H.n()))
      if (!rep.is_identity()) flows.push_back(ensemble_flow_generate(H, rep, 8));
    for (double beta : {0.5, 1.0, 2.0})
      for (RateKind kind : {RateKind::Glauber, RateKind::Metropolis}) {
        DaviesGenerator g = build_davies(H, beta, kind, true);
        AmbientForms forms = build_ambient_forms(g);
        SupportNumber sn = support_number_exact(forms.E, forms.V);
        if (!sn.finite) {
          c.detail = "support number not finite (kernel leak)";
          return c;
        }
        FreeEnergyCertificate cert = flow_set_free_energy(H, flows, beta);
        FlowBound fb = support_number_flow_bound(H, cert, g.rate);
        worst_ratio = std::max(worst_ratio, sn.tau / fb.tau_bound);
        ++configs;
      }
  }
  c.pass = configs == 18 && worst_ratio <= 1.0 + 1e-9;
  c.detail = "18 configurations, worst tau_exact/tau_bound " + fmt(worst_ratio);
  return c;
}

// 6. The certified envelope sqrt(|rho^-1|) e^{-t/tau} must dominate the true
//    trace-distance decay, and the curve must cross 1/4 before t_mix.
Check check_envelope() {
  Check c{"trace-distance decay stays under the certified envelope"};
  StabilizerHamiltonian H = rep2();
  const double beta = 1.0;
  DaviesGenerator g = build_davies(H, beta, RateKind::Glauber, true);

  std::vector<PauliFlow> flows;
  for (const auto& rep : coset_representatives(H.basis(), H.n()))
    if (!rep.is_identity()) flows.push_back(ensemble_flow_generate(H, rep, 8));
  FreeEnergyCertificate cert = flow_set_free_energy(H, flows, beta);
  FlowBound fb = support_number_flow_bound(H, cert, g.rate);
  MixingBound mb = mixing_time_bound(H, beta, fb.tau_bound);

  std::vector<Mat> initial;
  Mat zz = Mat::Zero(4, 4);
  zz(0, 0) = 1;  // |00><00|
  initial.push_back(zz);
  Eigen::Vector4cd plus_minus;  // |+-> in the computational basis
  plus_minus << 0.5, -0.5, 0.5, -0.5;
  initial.push_back(plus_minus * plus_minus.adjoint());
  Eigen::Vector4cd ybell;  // (|00> + i |11>)/sqrt(2)
  ybell << std::complex<double>(1, 0) / std::sqrt(2.0), 0, 0,
      std::complex<double>(0, 1) / std::sqrt(2.0);
  initial.push_back(ybell * ybell.adjoint());

  std::vector<double> times;
  for (int k = 0; k <= 24; ++k) times.push_back(mb.t_mix * k / 24.0);

  double worst_gap = -std::numeric_limits<double>::infinity();
  double worst_crossing = 0;
  for (const auto& rho0 : initial) {
    auto curve = mixing_curve(g, rho0, times, mb);
    for (const auto& p : curve) worst_gap = std::max(worst_gap, p.distance - p.envelope);
    worst_crossing = std::max(worst_crossing, quarter_crossing(curve));
  }
  c.pass = worst_gap <= 1e-12 && worst_crossing <= mb.t_mix + 1e-12;
  c.detail = "3 initial states, max(distance - envelope) " + fmt(worst_gap) +
             ", latest quarter-crossing " + fmt(worst_crossing) + " <= t_mix " +
             fmt(mb.t_mix);
  return c;
}

// 7. A single-path flow has unit multiplicities, so its free energy must
//    reduce to the path's bottleneck barrier.
Check check_single_path_reduction() {
  Check c{"single-path flows reduce to the bottleneck barrier"};
  double worst = 0;
  bool all_unit = true;
  int targets = 0;
  for (const auto& H : {rep2(), rep3(), bell(), two_stab4()})
    for (const auto& rep : coset_representatives(H.basis(), H.n())) {
      if (rep.is_identity()) continue;
      BottleneckResult seed = bottleneck_path_search(H, rep);
      PauliFlow flow(rep, {seed.path});
      FreeEnergyCertificate cert = flow_free_energy(H, flow, 1.0);
      for (const auto& edge : cert.edges)
        if (edge.omega.num != edge.omega.den) all_unit = false;
      worst = std::max(worst, std::abs(cert.f_bar - seed.bottleneck));
      ++targets;
    }
  c.pass = all_unit && worst <= 1e-12;
  c.detail = std::to_string(targets) + " targets, multiplicities all 1, max |f - barrier| " +
             fmt(worst);
  return c;
}

// 8. Layer-model bookkeeping: a depth-d edge is shared by m^(l-d) of the m^l
//    paths, so its multiplicity is m^d; the edge-by-edge free energy must match
//    the closed form, and a non-positive slope must make the bound
//    depth-independent.
Check check_layer_model() {
  Check c{"layer-model multiplicities and closed form agree"};
  double worst = 0;
  bool omegas_ok = true;
  for (std::uint64_t m = 1; m <= 4; ++m)
    for (std::uint64_t l = 1; l <= 6; ++l) {
      SyntheticLayerFlow f(m, l);
      std::uint64_t expect = 1;
      for (std::uint64_t d = 1; d <= l; ++d) {
        expect *= m;  // multiplicity at depth d
        std::uint64_t prefixes = 1;
        for (std::uint64_t k = 0; k < d; ++k) prefixes *= m;
        for (std::uint64_t p = 0; p < prefixes; ++p) {
          Rational om = f.omega(d, p);
          if (om.num != std::int64_t(expect) * om.den) omegas_ok = false;
        }
      }
      for (double a : {0.3, 1.0, 2.0})
        for (double beta : {0.5, 1.0}) {
          LayerBound explicit_bound = f.free_energy(a, beta);
          LayerBound closed = layer_flow_bound(a, m, l, beta);
          worst = std::max(worst, std::abs(explicit_bound.value - closed.value));
          if (explicit_bound.layers != closed.layers) omegas_ok = false;
        }
    }

  // Flat regime: slope 1.2 - ln(4) < 0, so the bound must not grow with depth.
  double flat_worst = 0;
  double first = layer_flow_bound(1.2, 4, 1, 1.0).value;
  for (std::uint64_t l = 1; l <= 20; ++l) {
    LayerBound b = layer_flow_bound(1.2, 4, l, 1.0);
    flat_worst = std::max(flat_worst, std::abs(b.value - first));
    if (b.layers != 1) omegas_ok = false;
  }
  worst = std::max(worst, flat_worst);
  c.pass = omegas_ok && worst <= 1e-12;
  c.detail = "m <= 4, l <= 6 exhaustive; max closed-form deviation " + fmt(worst);
  return c;
}

// 9. Kinetic Monte Carlo must reproduce the spectral relaxation rate and the
//    equilibrium occupancy of the syndrome chain.
Check check_kmc() {
  Check c{"sampled kinetics match the spectral gap and equilibrium"};
  std::ostringstream detail;
  bool ok = true;

  for (const auto& H : {make_code(1, {"Z"}, {1.0}), rep2()}) {
    const double beta = 1.0;
    ClassicalChain chain = build_classical_chain(H, beta, RateKind::Glauber);
    double gap = spectral_gap(chain);
    Eigen::VectorXd u = gap_mode_observable(chain);
    Eigen::Index start;
    u.cwiseAbs().maxCoeff(&start);
    std::vector<Trajectory> trajs;
    for (std::uint64_t k = 0; k < 10000; ++k)
      trajs.push_back(gillespie_run(H, beta, RateKind::Glauber,
                                    TrajectoryConfig{8.0, 23, k, 1.0, chain.reps[start]}));
    std::vector<double> grid;
    for (int k = 0; k <= 32; ++k) grid.push_back(8.0 * k / 32.0);
    MeanCurve mc = mean_curve(chain, trajs, u, grid);
    double floor = 0;
    for (double s : mc.stderr_) floor = std::max(floor, s);
    DecayFit fit = fit_decay(mc, 0.0, 5.0 * floor);
    double rel = std::abs(fit.lambda - gap) / gap;
    ok = ok && rel < 0.2;
    detail << H.n() << "-qubit rate error " << fmt(rel) << "; ";
  }

  {
    StabilizerHamiltonian H = rep2();
    ClassicalChain chain = build_classical_chain(H, 1.0, RateKind::Glauber);
    std::vector<Trajectory> trajs;
    for (std::uint64_t k = 0; k < 4000; ++k)
      trajs.push_back(gillespie_run(H, 1.0, RateKind::Glauber,
                                    TrajectoryConfig{16.0, 7, k, 1.0,
                                                     PauliOperator::identity(2)}));
    double stat = chi_square_statistic(end_state_counts(chain, trajs), chain.stationary);
    ok = ok && stat < 18.475;  // 99th percentile, 7 degrees of freedom
    detail << "occupancy chi^2 " << fmt(stat) << " < 18.475";
  }

  c.pass = ok;
  c.detail = detail.str();
  return c;
}

// 10. Lifting a path that ends on a stabilizer multiple of its target must
//     cost at most one extra implementation step per edge.
Check check_degeneracy_lift() {
  Check c{"degeneracy lifts stay within the implementation cost"};
  std::mt19937_64 rng(0xacce5510);
  std::uniform_real_distribution<double> coupling(0.5, 2.0);
  std::uniform_int_distribution<int> which(0, 3);
  const double beta = 1.0;
  int violations = 0, trials = 0;
  double worst_excess = -std::numeric_limits<double>::infinity();
  while (trials < 100) {
    StabilizerHamiltonian H = [&] {
      switch (which(rng)) {
        case 0: return make_code(2, {"ZZ"}, {coupling(rng)});
        case 1: return make_code(3, {"ZZI", "IZZ"}, {coupling(rng), coupling(rng)});
        case 2: return make_code(2, {"XX", "ZZ"}, {coupling(rng), coupling(rng)});
        default: return make_code(4, {"ZZII", "IIZZ"}, {coupling(rng), coupling(rng)});
      }
    }();
    auto reps = coset_representatives(H.basis(), H.n());
    std::uniform_int_distribution<std::size_t> pick(0, reps.size() - 1);
    PauliOperator target = reps[pick(rng)];
    if (target.is_identity()) continue;
    std::uniform_int_distribution<std::uint64_t> mask(1, (std::uint64_t(1) << H.rank()) - 1);
    PauliOperator degenerate = multiply(target, H.basis().element(mask(rng)));
    BottleneckResult seed = bottleneck_path_search(H, degenerate);
    LiftResult lift = degeneracy_lift(H, {seed.path}, target, beta);
    double excess =
        lift.report.f_bar_after - (lift.report.f_bar_before + H.omega_impl());
    worst_excess = std::max(worst_excess, excess);
    if (excess > 1e-9) ++violations;
    ++trials;
  }
  c.pass = violations == 0;
  c.detail = "100 trials, violations " + std::to_string(violations) + ", worst excess " +
             fmt(worst_excess);
  return c;
}

}  // namespace

int main() {
  std::vector<Check> checks;
  FactorizationSweep sweep;

  const auto run = [&checks](Check (*fn)()) {
    auto t0 = std::chrono::steady_clock::now();
    Check c = fn();
    auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%2zu/10] %s  %s — %s (%.1fs)\n", checks.size() + 1,
                c.pass ? "PASS" : "FAIL", c.label.c_str(), c.detail.c_str(), dt);
    std::fflush(stdout);
    checks.push_back(c);
  };

  run(check_step_barriers);
  run(check_telescoping);
  {
    auto t0 = std::chrono::steady_clock::now();
    sweep = factorization_sweep();
    auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (Check c : {check_factorization(sweep), check_row_norms(sweep)}) {
      std::printf("[%2zu/10] %s  %s — %s (%.1fs)\n", checks.size() + 1,
                  c.pass ? "PASS" : "FAIL", c.label.c_str(), c.detail.c_str(), dt);
      std::fflush(stdout);
      checks.push_back(c);
      dt = 0.0;
    }
  }
  run(check_flow_bound);
  run(check_envelope);
  run(check_single_path_reduction);
  run(check_layer_model);
  run(check_kmc);
  run(check_degeneracy_lift);

  int failures = 0;
  for (const auto& c : checks)
    if (!c.pass) ++failures;
  if (failures == 0)
    std::printf("all 10 acceptance checks passed\n");
  else
    std::printf("%d acceptance check(s) FAILED\n", failures);
  return failures == 0 ? 0 : 1;
}
