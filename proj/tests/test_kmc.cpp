#include <catch2/catch_amalgamated.hpp>

#include "thermflow/kmc.hpp"

using namespace thermflow;

namespace {

StabilizerHamiltonian rep2() {
  return StabilizerHamiltonian(2, {{parse_pauli("ZZ"), 1.0}});
}
StabilizerHamiltonian rep3() {
  return StabilizerHamiltonian(3, {{parse_pauli("ZZI"), 1.0}, {parse_pauli("IZZ"), 1.0}});
}
StabilizerHamiltonian single_z() {
  return StabilizerHamiltonian(1, {{parse_pauli("Z"), 1.0}});
}

/// Second eigenvector of the symmetrised generator, mapped back to an
/// observable u = phi / sqrt(pi). Its ensemble mean decays at exactly the
/// spectral gap and has zero stationary mean.
Eigen::VectorXd gap_mode_observable(const ClassicalChain& chain) {
  const Eigen::Index m = Eigen::Index(chain.reps.size());
  Eigen::VectorXd sqp = chain.stationary.cwiseSqrt();
  Eigen::MatrixXd s(m, m);
  for (Eigen::Index x = 0; x < m; ++x)
    for (Eigen::Index y = 0; y < m; ++y) s(x, y) = chain.generator(x, y) * sqp(y) / sqp(x);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  return es.eigenvectors().col(m - 2).cwiseQuotient(sqp);
}

}  // namespace

TEST_CASE("classical chain is a reversible generator on cosets", "[kmc]") {
  StabilizerHamiltonian H = rep2();
  ClassicalChain chain = build_classical_chain(H, 1.0, RateKind::Glauber);
  REQUIRE(chain.reps.size() == 8);
  CHECK(chain.reps[0] == PauliOperator::identity(2));
  for (const auto& p : chain.reps)
    CHECK(H.basis().canonical_representative(p) == p);
  CHECK(chain.stationary.sum() == Catch::Approx(1.0).margin(1e-13));
  CHECK(chain.generator.colwise().sum().cwiseAbs().maxCoeff() < 1e-13);
  GibbsTable gibbs = H.gibbs(1.0);
  for (std::size_t y = 0; y < chain.reps.size(); ++y) {
    CHECK(chain.stationary(y) > 0);
    // Stationary weights are proportional to the Gibbs syndrome weights.
    double ratio = chain.stationary(y) / chain.stationary(0);
    double expect = gibbs(H.basis().syndrome(chain.reps[y])) / gibbs(Syndrome(0, H.rank()));
    CHECK(ratio == Catch::Approx(expect).margin(1e-12));
    for (std::size_t x = 0; x < chain.reps.size(); ++x) {
      if (x != y) CHECK(chain.generator(x, y) >= 0);
      CHECK(chain.stationary(y) * chain.generator(x, y) ==
            Catch::Approx(chain.stationary(x) * chain.generator(y, x)).margin(1e-12));
    }
  }
  CHECK_THROWS_AS(chain.state_of(parse_pauli("YY")), ValidationError);  // non-canonical
  CHECK_THROWS_AS(build_classical_chain(H, -1.0, RateKind::Glauber), ValidationError);
  CHECK_THROWS_AS(build_classical_chain(H, 1.0, RateKind::Glauber, 4), CapError);
}

TEST_CASE("single-qubit chain has its pinned gap and hitting time", "[kmc]") {
  StabilizerHamiltonian H = single_z();
  const double beta = 1.0;
  RateFunction glauber = RateFunction::glauber(beta, H.frequency_range());
  ClassicalChain chain = build_classical_chain(H, beta, RateKind::Glauber);
  REQUIRE(chain.reps.size() == 2);

  // gap = 2 (h(2) + h(-2)); for Glauber the two rates sum to one exactly.
  CHECK(spectral_gap(chain) == Catch::Approx(2.0).margin(1e-12));
  ClassicalChain metro = build_classical_chain(H, beta, RateKind::Metropolis);
  CHECK(spectral_gap(metro) ==
        Catch::Approx(2.0 * (1.0 + std::exp(-2.0 * beta))).margin(1e-12));

  // Mean first flip from the excited coset: one of two letters at rate h(2).
  std::size_t ground = chain.state_of(PauliOperator::identity(1));
  std::size_t excited = chain.state_of(parse_pauli("X"));
  CHECK(exact_mean_first_passage(chain, {ground}, excited) ==
        Catch::Approx(1.0 / (2.0 * glauber(2.0))).margin(1e-12));
  CHECK(exact_mean_first_passage(chain, {ground}, ground) == 0.0);
}

TEST_CASE("trajectory queries honour the jump records", "[kmc]") {
  Trajectory tr;
  tr.times = {0.0, 1.0, 2.5};
  tr.states = {parse_pauli("II"), parse_pauli("XI"), parse_pauli("XX")};
  tr.t_max = 5.0;
  CHECK(tr.state_at(0.0) == parse_pauli("II"));
  CHECK(tr.state_at(0.999) == parse_pauli("II"));
  CHECK(tr.state_at(1.0) == parse_pauli("XI"));
  CHECK(tr.state_at(2.499) == parse_pauli("XI"));
  CHECK(tr.state_at(2.5) == parse_pauli("XX"));
  CHECK(tr.state_at(5.0) == parse_pauli("XX"));
  CHECK_THROWS_AS(tr.state_at(-0.1), ValidationError);
  CHECK_THROWS_AS(tr.state_at(5.1), ValidationError);
}

TEST_CASE("gillespie runs are deterministic per seed and stream index", "[kmc]") {
  StabilizerHamiltonian H = rep2();
  TrajectoryConfig cfg{10.0, 42, 3, 1.0, PauliOperator::identity(2)};
  Trajectory a = gillespie_run(H, 1.0, RateKind::Glauber, cfg);
  Trajectory b = gillespie_run(H, 1.0, RateKind::Glauber, cfg);
  REQUIRE(a.times == b.times);
  REQUIRE(a.states.size() == b.states.size());
  for (std::size_t k = 0; k < a.states.size(); ++k) CHECK(a.states[k] == b.states[k]);

  TrajectoryConfig other = cfg;
  other.index = 4;
  Trajectory c = gillespie_run(H, 1.0, RateKind::Glauber, other);
  REQUIRE(a.times.size() > 1);
  REQUIRE(c.times.size() > 1);
  CHECK(a.times[1] != c.times[1]);

  // States are canonical representatives and never repeat across a jump.
  for (std::size_t k = 0; k < a.states.size(); ++k) {
    CHECK(H.basis().canonical_representative(a.states[k]) == a.states[k]);
    if (k > 0) CHECK_FALSE(a.states[k] == a.states[k - 1]);
  }

  // Early stopping hands back a trajectory ending in the flagged state.
  auto nontrivial = [&](const PauliOperator& p) {
    return !H.basis().syndrome(p).trivial();
  };
  Trajectory stopped = gillespie_run(H, 1.0, RateKind::Glauber, cfg, nontrivial);
  REQUIRE(stopped.states.size() > 1);
  CHECK(nontrivial(stopped.states.back()));
  for (std::size_t k = 0; k + 1 < stopped.states.size(); ++k)
    CHECK_FALSE(nontrivial(stopped.states[k]));

  TrajectoryConfig bad = cfg;
  bad.t_max = 0;
  CHECK_THROWS_AS(gillespie_run(H, 1.0, RateKind::Glauber, bad), ValidationError);
  bad.t_max = 1;
  bad.rate_scale = 0;
  CHECK_THROWS_AS(gillespie_run(H, 1.0, RateKind::Glauber, bad), ValidationError);
}

TEST_CASE("end-state occupancy passes a goodness-of-fit test", "[kmc]") {
  StabilizerHamiltonian H = rep2();
  const double beta = 1.0;
  ClassicalChain chain = build_classical_chain(H, beta, RateKind::Glauber);
  std::vector<Trajectory> trajs;
  for (std::uint64_t k = 0; k < 2000; ++k)
    trajs.push_back(gillespie_run(
        H, beta, RateKind::Glauber,
        TrajectoryConfig{16.0, 7, k, 1.0, PauliOperator::identity(2)}));
  Eigen::VectorXd counts = end_state_counts(chain, trajs);
  CHECK(counts.sum() == Catch::Approx(2000.0));
  double stat = chi_square_statistic(counts, chain.stationary);
  // 99th percentile of chi^2 with 8 - 1 degrees of freedom.
  CHECK(stat < 18.475);

  CHECK(chi_square_statistic(100.0 * chain.stationary, chain.stationary) ==
        Catch::Approx(0.0).margin(1e-12));
  CHECK_THROWS_AS(chi_square_statistic(counts, Eigen::VectorXd::Ones(3)), ValidationError);
  Eigen::VectorXd degenerate = chain.stationary;
  degenerate(0) = 0;
  CHECK_THROWS_AS(chi_square_statistic(counts, degenerate), ValidationError);
}

TEST_CASE("mean curves average the trajectory ensemble", "[kmc]") {
  StabilizerHamiltonian H = rep2();
  ClassicalChain chain = build_classical_chain(H, 1.0, RateKind::Glauber);
  Trajectory still;
  still.times = {0.0};
  still.states = {PauliOperator::identity(2)};
  still.t_max = 5.0;
  Trajectory moved;
  moved.times = {0.0, 2.0};
  moved.states = {PauliOperator::identity(2), parse_pauli("XI")};
  moved.t_max = 5.0;
  Eigen::VectorXd indicator = Eigen::VectorXd::Zero(chain.reps.size());
  indicator(chain.state_of(PauliOperator::identity(2))) = 1.0;
  MeanCurve mc = mean_curve(chain, {still, moved}, indicator, {1.0, 3.0});
  CHECK(mc.mean[0] == Catch::Approx(1.0));
  CHECK(mc.stderr_[0] == Catch::Approx(0.0).margin(1e-12));
  CHECK(mc.mean[1] == Catch::Approx(0.5));
  CHECK(mc.stderr_[1] == Catch::Approx(std::sqrt(0.25 / 2.0)).margin(1e-12));
  CHECK_THROWS_AS(mean_curve(chain, {still}, Eigen::VectorXd::Ones(3), {1.0}),
                  ValidationError);
}

TEST_CASE("decay fits recover a synthetic exponential", "[kmc]") {
  MeanCurve mc;
  for (int k = 0; k <= 40; ++k) {
    double t = 0.25 * k;
    mc.times.push_back(t);
    mc.mean.push_back(0.3 + 2.0 * std::exp(-0.7 * t));
    mc.stderr_.push_back(0.0);
  }
  DecayFit fit = fit_decay(mc, 0.3, 1e-6);
  CHECK(fit.lambda == Catch::Approx(0.7).margin(1e-12));
  CHECK(fit.intercept == Catch::Approx(std::log(2.0)).margin(1e-12));
  CHECK(fit.points >= 30);
  CHECK_THROWS_AS(fit_decay(mc, 0.3, 10.0), ValidationError);  // everything below the floor
  MeanCurve flat;
  flat.times = {1.0, 1.0, 1.0, 1.0};
  flat.mean = {2.0, 2.0, 2.0, 2.0};
  flat.stderr_ = {0, 0, 0, 0};
  CHECK_THROWS_AS(fit_decay(flat, 0.0, 1e-6), ValidationError);  // degenerate grid
}

TEST_CASE("sampled relaxation rate matches the spectral gap", "[kmc]") {
  StabilizerHamiltonian H = rep2();
  const double beta = 1.0;
  ClassicalChain chain = build_classical_chain(H, beta, RateKind::Glauber);
  double gap = spectral_gap(chain);
  Eigen::VectorXd u = gap_mode_observable(chain);
  Eigen::Index start;
  u.cwiseAbs().maxCoeff(&start);

  std::vector<Trajectory> trajs;
  for (std::uint64_t k = 0; k < 3000; ++k)
    trajs.push_back(gillespie_run(H, beta, RateKind::Glauber,
                                  TrajectoryConfig{8.0, 19, k, 1.0, chain.reps[start]}));
  std::vector<double> grid;
  for (int k = 0; k <= 32; ++k) grid.push_back(8.0 * k / 32.0);
  MeanCurve mc = mean_curve(chain, trajs, u, grid);
  double floor = 0;
  for (double s : mc.stderr_) floor = std::max(floor, s);
  DecayFit fit = fit_decay(mc, 0.0, 5.0 * floor);
  CHECK(std::abs(fit.lambda - gap) < 0.2 * gap);
}

TEST_CASE("decoder corrections and logical classes on the repetition code", "[kmc]") {
  StabilizerHamiltonian H = rep3();
  Decoder dec = Decoder::build(H);
  REQUIRE(dec.correction.size() == 4);
  CHECK(dec.correction[0] == PauliOperator::identity(3));
  CHECK(dec.correction[1] == parse_pauli("XII"));
  CHECK(dec.correction[2] == parse_pauli("IIX"));
  CHECK(dec.correction[3] == parse_pauli("IXI"));

  PauliOperator good = dec.logical_class(H, PauliOperator::identity(3));
  CHECK(good == PauliOperator::identity(3));
  // Single X faults decode back to the trivial class.
  for (const char* s : {"XII", "IXI", "IIX"})
    CHECK(dec.logical_class(H, parse_pauli(s)) == good);
  // A Y fault shares the X-fault syndrome, so the correction leaves a
  // residual Z operator: a logical-Z class, not the trivial one.
  PauliOperator y_class = dec.logical_class(H, parse_pauli("YII"));
  CHECK(y_class == H.basis().canonical_representative(parse_pauli("ZII")));
  CHECK_FALSE(y_class == good);
  // A two-site fault flips the logical class.
  CHECK(dec.logical_class(H, parse_pauli("XXI")) == parse_pauli("XXX"));
  CHECK_FALSE(dec.logical_class(H, parse_pauli("XXI")) == good);

  std::vector<HamiltonianTerm> chain_terms;
  for (std::uint32_t i = 0; i < 8; ++i) {
    PauliOperator g;
    g.n = 9;
    g.z = std::uint64_t(0b11) << i;
    chain_terms.push_back({g, 1.0});
  }
  CHECK_THROWS_AS(Decoder::build(StabilizerHamiltonian(9, chain_terms)), CapError);
}

TEST_CASE("sampled logical lifetime approaches the exact hitting time", "[kmc]") {
  StabilizerHamiltonian H = rep2();
  const double beta = 1.0;
  ClassicalChain chain = build_classical_chain(H, beta, RateKind::Glauber);
  Decoder dec = Decoder::build(H);
  PauliOperator good = dec.logical_class(H, PauliOperator::identity(2));
  std::vector<std::size_t> absorbing;
  for (std::size_t i = 0; i < chain.reps.size(); ++i)
    if (dec.logical_class(H, chain.reps[i]) != good) absorbing.push_back(i);
  REQUIRE_FALSE(absorbing.empty());
  double exact = exact_mean_first_passage(chain, absorbing,
                                          chain.state_of(PauliOperator::identity(2)));

  LifetimeEstimate est =
      logical_lifetime_estimate(H, beta, RateKind::Glauber, 1200, 12.0, 11);
  REQUIRE(est.failures > 100);
  CHECK(std::abs(est.lifetime - exact) < 0.2 * exact);

  // Far below the first-passage scale nothing fails and the estimate is open.
  LifetimeEstimate none =
      logical_lifetime_estimate(H, beta, RateKind::Glauber, 5, 1e-3, 11);
  CHECK(none.failures == 0);
  CHECK(none.lambda_hat == 0.0);
  CHECK(std::isinf(none.lifetime));
}
