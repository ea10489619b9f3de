#pragma once

#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "thermflow/block_basis.hpp"
#include "thermflow/factorization.hpp"
#include "thermflow/flow_search.hpp"
#include "thermflow/io.hpp"
#include "thermflow/kmc.hpp"
#include "thermflow/layer_model.hpp"
#include "thermflow/mixing.hpp"

namespace thermflow {

/// Late overrides from a --config JSON object: keys are the long option names
/// without the leading dashes; values replace whatever the flags parsed.
class ConfigOverride {
 public:
  void bind_double(const std::string& key, double* t) {
    set_[key] = [t, key](const json& v) {
      if (!v.is_number()) throw ValidationError("config." + key + ": expected a number");
      *t = v.get<double>();
    };
  }
  void bind_uint(const std::string& key, std::uint64_t* t) {
    set_[key] = [t, key](const json& v) {
      if (!v.is_number_unsigned())
        throw ValidationError("config." + key + ": expected a non-negative integer");
      *t = v.get<std::uint64_t>();
    };
  }
  void bind_size(const std::string& key, std::size_t* t) {
    set_[key] = [t, key](const json& v) {
      if (!v.is_number_unsigned())
        throw ValidationError("config." + key + ": expected a non-negative integer");
      *t = v.get<std::size_t>();
    };
  }
  void bind_string(const std::string& key, std::string* t) {
    set_[key] = [t, key](const json& v) {
      if (!v.is_string()) throw ValidationError("config." + key + ": expected a string");
      *t = v.get<std::string>();
    };
  }
  void bind_bool(const std::string& key, bool* t) {
    set_[key] = [t, key](const json& v) {
      if (!v.is_boolean()) throw ValidationError("config." + key + ": expected a boolean");
      *t = v.get<bool>();
    };
  }
  void apply(const std::string& path) const {
    if (path.empty()) return;
    json cfg = read_json_file(path);
    if (!cfg.is_object()) throw ValidationError(path + ": config must be a JSON object");
    for (auto it = cfg.begin(); it != cfg.end(); ++it) {
      auto found = set_.find(it.key());
      if (found == set_.end())
        throw ValidationError(path + ": unknown config key '" + it.key() + "'");
      found->second(it.value());
    }
  }

 private:
  std::map<std::string, std::function<void(const json&)>> set_;
};

namespace cli_detail {

inline PauliOperator parse_pauli_arg(const std::string& text, std::uint32_t n,
                                     const std::string& flag) {
  PauliOperator p;
  try {
    p = parse_pauli(text);
  } catch (const ValidationError& e) {
    throw ValidationError(flag + ": " + e.what());
  }
  if (p.n != n) throw ValidationError(flag + ": length must match the code's qubit count");
  return p;
}

inline json run_spectrum(const std::string& code_path, double beta) {
  StabilizerHamiltonian H = load_code(code_path);
  if (!(beta > 0)) throw ValidationError("--beta must be positive");
  GibbsTable g = H.gibbs(beta);
  json levels = json::array();
  for (std::uint64_t s = 0; s < (std::uint64_t(1) << H.rank()); ++s) {
    Syndrome syn(s, H.rank());
    levels.push_back({{"syndrome", to_string(syn)},
                      {"energy", g.energy[s]},
                      {"degeneracy", std::uint64_t(1) << (H.n() - H.rank())},
                      {"state_probability", g.p[s]},
                      {"subspace_probability", g.subspace_probability(syn)}});
  }
  return json{{"schema", "thermflow.spectrum/1"},
              {"n", H.n()},
              {"rank", H.rank()},
              {"beta", beta},
              {"log_partition", g.log_partition},
              {"ground_energy", H.ground_energy()},
              {"rho_inv_norm", 1.0 / g.min_p()},
              {"levels", std::move(levels)}};
}

inline json run_barrier(const std::string& code_path, const std::string& target_s,
                        const std::string& start_s, bool search, std::size_t budget,
                        bool mod_stabilizer) {
  StabilizerHamiltonian H = load_code(code_path);
  PauliOperator target = parse_pauli_arg(target_s, H.n(), "--target");
  PauliOperator start = start_s.empty() ? PauliOperator::identity(H.n())
                                        : parse_pauli_arg(start_s, H.n(), "--start");
  json out{{"schema", "thermflow.barrier/1"},
           {"target", to_string(target)},
           {"start", to_string(start)},
           {"barrier", H.step_barrier(target, start)}};
  if (search) {
    auto res = bottleneck_path_search(H, target, SearchOptions{budget, mod_stabilizer});
    json verts = json::array();
    for (const auto& v : res.path.vertices) verts.push_back(to_string(v));
    out["bottleneck"] = {
        {"value", res.bottleneck}, {"path", std::move(verts)}, {"optimal", res.optimal}};
  }
  return out;
}

inline json run_flow_energy(const std::string& code_path, const std::string& flow_path,
                            double beta, bool verify, bool with_edges) {
  StabilizerHamiltonian H = load_code(code_path);
  PauliFlow flow = load_flow(flow_path);
  if (flow.target().n != H.n())
    throw ValidationError(flow_path + ": flow qubit count does not match the code");
  auto cert = flow_free_energy(H, flow, beta);
  json out = certificate_to_json(cert, with_edges);
  if (verify) {
    // Independent recount: per-edge multiplicities by direct scanning, then
    // every edge value and the maximum recomputed from scratch.
    double worst = 0, fbar = -std::numeric_limits<double>::infinity();
    for (const auto& row : cert.edges) {
      std::int64_t count = 0;
      for (const auto& p : flow.paths()) {
        for (std::size_t t = 0; t + 1 < p.vertices.size(); ++t)
          if (p.vertices[t] == row.edge.from && p.vertices[t + 1] == row.edge.to) {
            ++count;
            break;
          }
      }
      double omega = double(flow.paths().size()) / double(count);
      double value = H.step_barrier(flow.target(), row.edge.from) - std::log(omega) / beta;
      worst = std::max(worst, std::abs(value - row.value));
      fbar = std::max(fbar, value);
    }
    worst = std::max(worst, std::abs(fbar - cert.f_bar));
    out["verify"] = {{"max_deviation", worst}, {"tolerance", 1e-12}};
    if (worst > 1e-12)
      throw CertificateError("verification failed: recounted certificate deviates by " +
                             std::to_string(worst));
    out["verify"]["passed"] = true;
  }
  return out;
}

inline json run_flow_search(const std::string& code_path, const std::string& target_s,
                            std::size_t budget, double beta, bool mod_stabilizer,
                            std::size_t search_budget) {
  StabilizerHamiltonian H = load_code(code_path);
  PauliOperator target = parse_pauli_arg(target_s, H.n(), "--target");
  if (target.is_identity()) throw ValidationError("--target: identity needs no flow");
  SearchOptions opts{search_budget, mod_stabilizer};
  auto seed = bottleneck_path_search(H, target, opts);
  PauliFlow flow = ensemble_flow_generate(H, target, budget, &seed.path);
  json out = flow_to_json(flow);
  out["bottleneck"] = seed.bottleneck;
  out["optimal"] = seed.optimal;
  if (beta > 0) out["certificate"] = certificate_to_json(flow_free_energy(H, flow, beta), false);
  return out;
}

inline json run_davies(const std::string& code_path, double beta, const std::string& rate_s,
                       bool no_coherent, bool with_matrix) {
  StabilizerHamiltonian H = load_code(code_path);
  auto g = build_davies(H, beta, parse_rate_kind(rate_s), !no_coherent);
  // Stationarity: the Gibbs coefficient vector must be a fixed point of lhat.
  Eigen::VectorXd rg = pauli_coefficients(dense_gibbs(H, beta), H.n()).real();
  double resid = (g.lhat() * rg).cwiseAbs().maxCoeff();
  json out{{"schema", "thermflow.davies/1"},
           {"n", H.n()},
           {"beta", beta},
           {"rate", rate_s},
           {"coherent", !no_coherent},
           {"dimension", pauli_space_dim(H.n())},
           {"couplings", g.couplings.size()},
           {"stationarity_residual", resid}};
  if (with_matrix) {
    if (H.n() > 3) throw CapError("--matrix output capped at 3 qubits");
    json rows = json::array();
    for (Eigen::Index i = 0; i < g.lstar.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index j = 0; j < g.lstar.cols(); ++j) row.push_back(g.lstar(i, j));
      rows.push_back(std::move(row));
    }
    out["lstar"] = std::move(rows);
  }
  return out;
}

inline json run_bound(const std::string& code_path, double beta, const std::string& rate_s,
                      std::size_t budget, std::size_t search_budget, bool mod_stabilizer,
                      const std::string& target_s, bool no_exact, bool detail) {
  StabilizerHamiltonian H = load_code(code_path);
  if (!(beta > 0)) throw ValidationError("--beta must be positive");
  RateKind kind = parse_rate_kind(rate_s);
  RateFunction rate = RateFunction::make(kind, beta, H.frequency_range());

  std::vector<PauliOperator> targets;
  if (!target_s.empty()) {
    PauliOperator t = parse_pauli_arg(target_s, H.n(), "--target");
    t = H.basis().canonical_representative(t);
    if (t.is_identity()) throw ValidationError("--target: lies in the trivial coset");
    targets.push_back(t);
  } else {
    for (const auto& rep : coset_representatives(H.basis(), H.n()))
      if (!rep.is_identity()) targets.push_back(rep);
  }

  std::vector<PauliFlow> flows;
  json per_target = json::array();
  for (const auto& t : targets) {
    SearchOptions opts{search_budget, mod_stabilizer};
    auto seed = bottleneck_path_search(H, t, opts);
    flows.push_back(ensemble_flow_generate(H, t, budget, &seed.path));
    if (detail) {
      auto c = flow_free_energy(H, flows.back(), beta);
      per_target.push_back({{"target", to_string(t)},
                            {"paths", flows.back().paths().size()},
                            {"f_bar", c.f_bar}});
    }
  }
  auto cert = flow_set_free_energy(H, flows, beta);
  auto fb = support_number_flow_bound(H, cert, rate);
  auto mix = mixing_time_bound(H, beta, fb.tau_bound);

  json out{{"schema", "thermflow.bound/1"},
           {"beta", beta},
           {"rate", rate_s},
           {"targets", targets.size()},
           {"f_bar", cert.f_bar},
           {"witness", certificate_to_json(cert, false)["witness"]},
           {"c_lower", fb.c_lower},
           {"tau_flow", fb.tau_bound},
           {"rho_inv_norm", mix.rho_inv_norm},
           {"t_mix_flow", mix.t_mix}};
  if (detail) out["per_target"] = std::move(per_target);

  if (!no_exact && H.n() <= kDenseCap) {
    auto g = build_davies(H, beta, kind);
    auto forms = build_ambient_forms(g);
    auto sn = support_number_exact(forms.E, forms.V);
    out["tau_exact"] = sn.finite ? json(sn.tau) : json("infinite");
    if (sn.finite) {
      auto chk = certify_support_number(forms.E, forms.V, sn.tau);
      out["tau_certified"] = chk.certified;
      out["t_mix_exact"] = mixing_time_bound(H, beta, sn.tau).t_mix;
      if (fb.tau_bound < sn.tau * (1 - 1e-9))
        throw CertificateError("flow bound " + std::to_string(fb.tau_bound) +
                               " fell below the exact support number " + std::to_string(sn.tau));
      out["certified"] = true;
    } else {
      throw CertificateError("support number is infinite: some direction has variance "
                             "but no dissipation");
    }
  }
  return out;
}

inline json run_kmc(const std::string& code_path, double beta, const std::string& rate_s,
                    const std::string& mode, std::size_t trajectories, double t_max,
                    std::uint64_t seed, double rate_scale, std::size_t points,
                    const std::string& observable) {
  StabilizerHamiltonian H = load_code(code_path);
  RateKind kind = parse_rate_kind(rate_s);
  if (trajectories == 0) throw ValidationError("--trajectories must be positive");
  json out{{"schema", "thermflow.kmc/1"}, {"beta", beta},        {"rate", rate_s},
           {"mode", mode},                {"t_max", t_max},      {"seed", seed},
           {"trajectories", trajectories}};

  if (mode == "lifetime") {
    auto est = logical_lifetime_estimate(H, beta, kind, trajectories, t_max, seed, rate_scale);
    out["failures"] = est.failures;
    out["observed_time"] = est.observed_time;
    out["lambda_hat"] = est.lambda_hat;
    out["lifetime"] = est.failures ? json(est.lifetime) : json("censored");
    ClassicalChain chain = build_classical_chain(H, beta, kind);
    Decoder dec = Decoder::build(H);
    PauliOperator good = dec.logical_class(H, PauliOperator::identity(H.n()));
    std::vector<std::size_t> absorbing;
    for (std::size_t i = 0; i < chain.reps.size(); ++i)
      if (dec.logical_class(H, chain.reps[i]) != good) absorbing.push_back(i);
    if (absorbing.empty()) throw ValidationError("code has no logical sector to decay into");
    double exact = exact_mean_first_passage(
                       chain, absorbing, chain.state_of(PauliOperator::identity(H.n()))) /
                   rate_scale;
    out["exact_mean_first_passage"] = exact;
    return out;
  }

  ClassicalChain chain = build_classical_chain(H, beta, kind);
  std::vector<Trajectory> trajs;
  trajs.reserve(trajectories);
  for (std::size_t k = 0; k < trajectories; ++k)
    trajs.push_back(gillespie_run(
        H, beta, kind, TrajectoryConfig{t_max, seed, k, rate_scale, PauliOperator::identity(H.n())}));

  if (mode == "occupancy") {
    Eigen::VectorXd counts = end_state_counts(chain, trajs);
    double chi2 = chi_square_statistic(counts, chain.stationary);
    json cells = json::array();
    for (std::size_t i = 0; i < chain.reps.size(); ++i)
      cells.push_back({{"state", to_string(chain.reps[i])},
                       {"count", counts(i)},
                       {"expected", chain.stationary(i) * counts.sum()}});
    out["chi_square"] = chi2;
    out["dof"] = chain.reps.size() - 1;
    out["cells"] = std::move(cells);
    return out;
  }
  if (mode == "relaxation") {
    Eigen::VectorXd obs(chain.reps.size());
    double m_inf = 0;
    if (observable == "energy") {
      for (std::size_t i = 0; i < chain.reps.size(); ++i)
        obs(i) = H.syndrome_energy(H.basis().syndrome(chain.reps[i]));
      for (std::size_t i = 0; i < chain.reps.size(); ++i) m_inf += chain.stationary(i) * obs(i);
    } else if (observable == "gap-mode") {
      Eigen::VectorXd sqp = chain.stationary.cwiseSqrt();
      Eigen::MatrixXd s(chain.reps.size(), chain.reps.size());
      for (Eigen::Index x = 0; x < s.rows(); ++x)
        for (Eigen::Index y = 0; y < s.cols(); ++y)
          s(x, y) = chain.generator(x, y) * sqp(y) / sqp(x);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
      Eigen::VectorXd phi = es.eigenvectors().col(s.rows() - 2);
      obs = phi.cwiseQuotient(sqp);  // stationary mean is exactly zero
    } else {
      throw ValidationError("--observable must be energy or gap-mode");
    }
    if (points < 8) throw ValidationError("--points must be at least 8");
    std::vector<double> grid;
    for (std::size_t i = 0; i < points; ++i) grid.push_back(t_max * double(i) / double(points - 1));
    auto curve = mean_curve(chain, trajs, obs, grid);
    double noise = 0;
    for (double e : curve.stderr_) noise = std::max(noise, e);
    auto fit = fit_decay(curve, m_inf, 5 * noise);
    out["lambda_hat"] = fit.lambda;
    out["fit_points"] = fit.points;
    out["spectral_gap"] = spectral_gap(chain) * rate_scale;
    out["observable"] = observable;
    return out;
  }
  throw ValidationError("--mode must be occupancy, relaxation or lifetime");
}

inline json run_layer_bound(double cost, std::uint64_t branching, std::uint64_t layers,
                            double beta, bool cross_check) {
  auto b = layer_flow_bound(cost, branching, layers, beta);
  json out{{"schema", "thermflow.layer/1"}, {"cost", cost},     {"branching", branching},
           {"layers", layers},              {"beta", beta},     {"value", b.value},
           {"maximising_depth", b.layers},  {"slope", b.slope}};
  if (cross_check) {
    SyntheticLayerFlow syn(branching, layers);
    auto f = syn.free_energy(cost, beta);
    out["explicit_value"] = f.value;
    out["explicit_depth"] = f.layers;
    out["explicit_paths"] = syn.total_paths();
    if (std::abs(f.value - b.value) > 1e-9 * std::max(1.0, std::abs(b.value)))
      throw CertificateError("closed form and explicit layer flow disagree");
    out["match"] = true;
  }
  return out;
}

}  // namespace cli_detail

inline int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Free-energy-barrier certificates for stabilizer thermalization"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "thermflow 1.0.0");
  std::function<json()> action;

  // spectrum
  {
    auto* sub = app.add_subcommand("spectrum", "Syndrome energies and Gibbs weights");
    auto code = std::make_shared<std::string>();
    auto beta = std::make_shared<double>(0);
    auto cfg = std::make_shared<std::string>();
    auto ov = std::make_shared<ConfigOverride>();
    sub->add_option("--code", *code, "code JSON file")->required();
    sub->add_option("--beta", *beta, "inverse temperature");
    sub->add_option("--config", *cfg, "JSON config overriding flags");
    ov->bind_string("code", code.get());
    ov->bind_double("beta", beta.get());
    sub->callback([=, &action] {
      action = [=] {
        ov->apply(*cfg);
        return cli_detail::run_spectrum(*code, *beta);
      };
    });
  }
  // barrier
  {
    auto* sub = app.add_subcommand("barrier", "Step barriers and bottleneck paths");
    auto code = std::make_shared<std::string>();
    auto target = std::make_shared<std::string>();
    auto start = std::make_shared<std::string>();
    auto search = std::make_shared<bool>(false);
    auto mod_stab = std::make_shared<bool>(false);
    auto budget = std::make_shared<std::size_t>(std::size_t(1) << 22);
    auto cfg = std::make_shared<std::string>();
    auto ov = std::make_shared<ConfigOverride>();
    sub->add_option("--code", *code, "code JSON file")->required();
    sub->add_option("--target", *target, "target Pauli P")->required();
    sub->add_option("--start", *start, "step start U (default identity)");
    sub->add_flag("--search", *search, "also run the bottleneck path search");
    sub->add_flag("--mod-stabilizer", *mod_stab, "search cosets instead of Paulis");
    sub->add_option("--budget", *budget, "search budget (settled states)");
    sub->add_option("--config", *cfg, "JSON config overriding flags");
    ov->bind_string("code", code.get());
    ov->bind_string("target", target.get());
    ov->bind_string("start", start.get());
    ov->bind_bool("search", search.get());
    ov->bind_bool("mod-stabilizer", mod_stab.get());
    ov->bind_size("budget", budget.get());
    sub->callback([=, &action] {
      action = [=] {
        ov->apply(*cfg);
        return cli_detail::run_barrier(*code, *target, *start, *search, *budget, *mod_stab);
      };
    });
  }
  // flow-energy
  {
    auto* sub = app.add_subcommand("flow-energy", "Free energy of an explicit flow");
    auto code = std::make_shared<std::string>();
    auto flow = std::make_shared<std::string>();
    auto beta = std::make_shared<double>(0);
    auto verify = std::make_shared<bool>(false);
    auto no_edges = std::make_shared<bool>(false);
    auto cfg = std::make_shared<std::string>();
    auto ov = std::make_shared<ConfigOverride>();
    sub->add_option("--code", *code, "code JSON file")->required();
    sub->add_option("--flow", *flow, "flow JSON file")->required();
    sub->add_option("--beta", *beta, "inverse temperature")->required();
    sub->add_flag("--verify", *verify, "recount multiplicities independently");
    sub->add_flag("--no-edges", *no_edges, "omit the per-edge table");
    sub->add_option("--config", *cfg, "JSON config overriding flags");
    ov->bind_string("code", code.get());
    ov->bind_string("flow", flow.get());
    ov->bind_double("beta", beta.get());
    ov->bind_bool("verify", verify.get());
    ov->bind_bool("no-edges", no_edges.get());
    sub->callback([=, &action] {
      action = [=] {
        ov->apply(*cfg);
        return cli_detail::run_flow_energy(*code, *flow, *beta, *verify, !*no_edges);
      };
    });
  }
  // flow-search
  {
    auto* sub = app.add_subcommand("flow-search", "Bottleneck path plus flow ensemble");
    auto code = std::make_shared<std::string>();
    auto target = std::make_shared<std::string>();
    auto budget = std::make_shared<std::size_t>(64);
    auto beta = std::make_shared<double>(0);
    auto mod_stab = std::make_shared<bool>(false);
    auto sbudget = std::make_shared<std::size_t>(std::size_t(1) << 22);
    auto cfg = std::make_shared<std::string>();
    auto ov = std::make_shared<ConfigOverride>();
    sub->add_option("--code", *code, "code JSON file")->required();
    sub->add_option("--target", *target, "target Pauli P")->required();
    sub->add_option("--budget", *budget, "max paths in the flow");
    sub->add_option("--beta", *beta, "if set, include the free-energy certificate");
    sub->add_flag("--mod-stabilizer", *mod_stab, "search cosets instead of Paulis");
    sub->add_option("--search-budget", *sbudget, "search budget (settled states)");
    sub->add_option("--config", *cfg, "JSON config overriding flags");
    ov->bind_string("code", code.get());
    ov->bind_string("target", target.get());
    ov->bind_size("budget", budget.get());
    ov->bind_double("beta", beta.get());
    ov->bind_bool("mod-stabilizer", mod_stab.get());
    ov->bind_size("search-budget", sbudget.get());
    sub->callback([=, &action] {
      action = [=] {
        ov->apply(*cfg);
        return cli_detail::run_flow_search(*code, *target, *budget, *beta, *mod_stab, *sbudget);
      };
    });
  }
  // davies
  {
    auto* sub = app.add_subcommand("davies", "Assemble the thermalization generator");
    auto code = std::make_shared<std::string>();
    auto beta = std::make_shared<double>(0);
    auto rate = std::make_shared<std::string>("glauber");
    auto no_coherent = std::make_shared<bool>(false);
    auto matrix = std::make_shared<bool>(false);
    auto cfg = std::make_shared<std::string>();
    auto ov = std::make_shared<ConfigOverride>();
    sub->add_option("--code", *code, "code JSON file")->required();
    sub->add_option("--beta", *beta, "inverse temperature")->required();
    sub->add_option("--rate", *rate, "glauber or metropolis");
    sub->add_flag("--no-coherent", *no_coherent, "drop the Hamiltonian commutator");
    sub->add_flag("--matrix", *matrix, "include the full matrix (small n only)");
    sub->add_option("--config", *cfg, "JSON config overriding flags");
    ov->bind_string("code", code.get());
    ov->bind_double("beta", beta.get());
    ov->bind_string("rate", rate.get());
    ov->bind_bool("no-coherent", no_coherent.get());
    ov->bind_bool("matrix", matrix.get());
    sub->callback([=, &action] {
      action = [=] {
        ov->apply(*cfg);
        return cli_detail::run_davies(*code, *beta, *rate, *no_coherent, *matrix);
      };
    });
  }
  // bound
  {
    auto* sub = app.add_subcommand("bound", "Support number and mixing-time bound");
    auto code = std::make_shared<std::string>();
    auto beta = std::make_shared<double>(0);
    auto rate = std::make_shared<std::string>("glauber");
    auto budget = std::make_shared<std::size_t>(64);
    auto sbudget = std::make_shared<std::size_t>(std::size_t(1) << 22);
    auto mod_stab = std::make_shared<bool>(false);
    auto target = std::make_shared<std::string>();
    auto no_exact = std::make_shared<bool>(false);
    auto detail = std::make_shared<bool>(false);
    auto cfg = std::make_shared<std::string>();
    auto ov = std::make_shared<ConfigOverride>();
    sub->add_option("--code", *code, "code JSON file")->required();
    sub->add_option("--beta", *beta, "inverse temperature")->required();
    sub->add_option("--rate", *rate, "glauber or metropolis");
    sub->add_option("--budget", *budget, "max paths per flow");
    sub->add_option("--search-budget", *sbudget, "search budget (settled states)");
    sub->add_flag("--mod-stabilizer", *mod_stab, "search cosets instead of Paulis");
    sub->add_option("--target", *target, "bound a single target's flow only");
    sub->add_flag("--no-exact", *no_exact, "skip the exact support number");
    sub->add_flag("--detail", *detail, "include the per-target table");
    sub->add_option("--config", *cfg, "JSON config overriding flags");
    ov->bind_string("code", code.get());
    ov->bind_double("beta", beta.get());
    ov->bind_string("rate", rate.get());
    ov->bind_size("budget", budget.get());
    ov->bind_size("search-budget", sbudget.get());
    ov->bind_bool("mod-stabilizer", mod_stab.get());
    ov->bind_string("target", target.get());
    ov->bind_bool("no-exact", no_exact.get());
    ov->bind_bool("detail", detail.get());
    sub->callback([=, &action] {
      action = [=] {
        ov->apply(*cfg);
        return cli_detail::run_bound(*code, *beta, *rate, *budget, *sbudget, *mod_stab, *target,
                                     *no_exact, *detail);
      };
    });
  }
  // kmc
  {
    auto* sub = app.add_subcommand("kmc", "Kinetic Monte Carlo cross-checks");
    auto code = std::make_shared<std::string>();
    auto beta = std::make_shared<double>(0);
    auto rate = std::make_shared<std::string>("glauber");
    auto mode = std::make_shared<std::string>("occupancy");
    auto traj = std::make_shared<std::size_t>(1000);
    auto t_max = std::make_shared<double>(10.0);
    auto seed = std::make_shared<std::uint64_t>(1);
    auto scale = std::make_shared<double>(1.0);
    auto points = std::make_shared<std::size_t>(40);
    auto obs = std::make_shared<std::string>("energy");
    auto cfg = std::make_shared<std::string>();
    auto ov = std::make_shared<ConfigOverride>();
    sub->add_option("--code", *code, "code JSON file")->required();
    sub->add_option("--beta", *beta, "inverse temperature")->required();
    sub->add_option("--rate", *rate, "glauber or metropolis");
    sub->add_option("--mode", *mode, "occupancy, relaxation or lifetime");
    sub->add_option("--trajectories", *traj, "number of trajectories");
    sub->add_option("--t-max", *t_max, "time horizon per trajectory");
    sub->add_option("--seed", *seed, "base RNG seed");
    sub->add_option("--rate-scale", *scale, "overall rate multiplier");
    sub->add_option("--points", *points, "relaxation grid size");
    sub->add_option("--observable", *obs, "relaxation observable: energy or gap-mode");
    sub->add_option("--config", *cfg, "JSON config overriding flags");
    ov->bind_string("code", code.get());
    ov->bind_double("beta", beta.get());
    ov->bind_string("rate", rate.get());
    ov->bind_string("mode", mode.get());
    ov->bind_size("trajectories", traj.get());
    ov->bind_double("t-max", t_max.get());
    ov->bind_uint("seed", seed.get());
    ov->bind_double("rate-scale", scale.get());
    ov->bind_size("points", points.get());
    ov->bind_string("observable", obs.get());
    sub->callback([=, &action] {
      action = [=] {
        ov->apply(*cfg);
        return cli_detail::run_kmc(*code, *beta, *rate, *mode, *traj, *t_max, *seed, *scale,
                                   *points, *obs);
      };
    });
  }
  // layer-bound
  {
    auto* sub = app.add_subcommand("layer-bound", "Closed-form layer-model free energy");
    auto cost = std::make_shared<double>(0);
    auto branching = std::make_shared<std::uint64_t>(1);
    auto layers = std::make_shared<std::uint64_t>(1);
    auto beta = std::make_shared<double>(0);
    auto cross = std::make_shared<bool>(false);
    auto cfg = std::make_shared<std::string>();
    auto ov = std::make_shared<ConfigOverride>();
    sub->add_option("--cost", *cost, "per-layer cost a >= 0")->required();
    sub->add_option("--branching", *branching, "branching factor m")->required();
    sub->add_option("--layers", *layers, "layer count l")->required();
    sub->add_option("--beta", *beta, "inverse temperature")->required();
    sub->add_flag("--cross-check", *cross, "evaluate the explicit synthetic flow too");
    sub->add_option("--config", *cfg, "JSON config overriding flags");
    ov->bind_double("cost", cost.get());
    ov->bind_uint("branching", branching.get());
    ov->bind_uint("layers", layers.get());
    ov->bind_double("beta", beta.get());
    ov->bind_bool("cross-check", cross.get());
    sub->callback([=, &action] {
      action = [=] {
        ov->apply(*cfg);
        return cli_detail::run_layer_bound(*cost, *branching, *layers, *beta, *cross);
      };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  auto emit_error = [](const std::string& type, const std::string& message) {
    json err{{"error", {{"type", type}, {"message", message}}}};
    std::cerr << err.dump() << "\n";
  };
  try {
    json out = action();
    std::cout << out.dump(2) << "\n";
    return 0;
  } catch (const CapError& e) {
    emit_error("cap", e.what());
    return 2;
  } catch (const CertificateError& e) {
    emit_error("certificate", e.what());
    return 3;
  } catch (const ValidationError& e) {
    emit_error("validation", e.what());
    return 1;
  } catch (const std::exception& e) {
    emit_error("internal", e.what());
    return 1;
  }
}

}  // namespace thermflow
