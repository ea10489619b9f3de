#pragma once

#include <fstream>

#include <json.hpp>

#include "thermflow/flow.hpp"

namespace thermflow {

using nlohmann::json;

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path + ": cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

inline void expect_schema(const json& j, const std::string& where, const std::string& want) {
  if (!j.is_object()) throw ValidationError(where + ": expected a JSON object");
  if (!j.contains("schema") || !j["schema"].is_string() || j["schema"] != want)
    throw ValidationError(where + ": schema must be \"" + want + "\"");
}

/// Code files: {"schema": "thermflow.code/1", "n": 3,
///              "terms": [{"pauli": "ZZI", "coupling": 1.0}, ...]}
inline StabilizerHamiltonian code_from_json(const json& j, const std::string& where = "code") {
  expect_schema(j, where, "thermflow.code/1");
  if (!j.contains("n") || !j["n"].is_number_integer() || j["n"].get<std::int64_t>() < 1)
    throw ValidationError(where + ".n: expected a positive integer");
  std::uint32_t n = j["n"].get<std::uint32_t>();
  if (!j.contains("terms") || !j["terms"].is_array() || j["terms"].empty())
    throw ValidationError(where + ".terms: expected a non-empty array");
  std::vector<HamiltonianTerm> terms;
  for (std::size_t i = 0; i < j["terms"].size(); ++i) {
    const json& t = j["terms"][i];
    std::string loc = where + ".terms[" + std::to_string(i) + "]";
    if (!t.is_object() || !t.contains("pauli") || !t["pauli"].is_string())
      throw ValidationError(loc + ".pauli: expected a Pauli string");
    if (!t.contains("coupling") || !t["coupling"].is_number())
      throw ValidationError(loc + ".coupling: expected a number");
    PauliOperator g;
    try {
      g = parse_pauli(t["pauli"].get<std::string>());
    } catch (const ValidationError& e) {
      throw ValidationError(loc + ".pauli: " + e.what());
    }
    terms.push_back(HamiltonianTerm{g, t["coupling"].get<double>()});
  }
  try {
    return StabilizerHamiltonian(n, std::move(terms));
  } catch (const ValidationError& e) {
    throw ValidationError(where + ": " + e.what());
  }
}

inline StabilizerHamiltonian load_code(const std::string& path) {
  return code_from_json(read_json_file(path), path);
}

inline json code_to_json(const StabilizerHamiltonian& H) {
  json terms = json::array();
  for (const auto& t : H.terms())
    terms.push_back({{"pauli", to_string(t.g)}, {"coupling", t.J}});
  return json{{"schema", "thermflow.code/1"}, {"n", H.n()}, {"terms", std::move(terms)}};
}

/// Flow files: {"schema": "thermflow.flow/1", "n": 2, "target": "XX",
///              "paths": [["II", "XI", "XX"], ...]}  (vertex lists, identity first)
inline PauliFlow flow_from_json(const json& j, const std::string& where = "flow") {
  expect_schema(j, where, "thermflow.flow/1");
  if (!j.contains("n") || !j["n"].is_number_integer() || j["n"].get<std::int64_t>() < 1)
    throw ValidationError(where + ".n: expected a positive integer");
  std::uint32_t n = j["n"].get<std::uint32_t>();
  if (!j.contains("target") || !j["target"].is_string())
    throw ValidationError(where + ".target: expected a Pauli string");
  PauliOperator target;
  try {
    target = parse_pauli(j["target"].get<std::string>());
  } catch (const ValidationError& e) {
    throw ValidationError(where + ".target: " + e.what());
  }
  if (target.n != n) throw ValidationError(where + ".target: length must match n");
  if (!j.contains("paths") || !j["paths"].is_array() || j["paths"].empty())
    throw ValidationError(where + ".paths: expected a non-empty array");
  std::vector<PauliPath> paths;
  for (std::size_t i = 0; i < j["paths"].size(); ++i) {
    const json& pj = j["paths"][i];
    std::string loc = where + ".paths[" + std::to_string(i) + "]";
    if (!pj.is_array() || pj.empty())
      throw ValidationError(loc + ": expected a non-empty array of Pauli strings");
    PauliPath p;
    for (std::size_t v = 0; v < pj.size(); ++v) {
      if (!pj[v].is_string())
        throw ValidationError(loc + "[" + std::to_string(v) + "]: expected a Pauli string");
      PauliOperator vert;
      try {
        vert = parse_pauli(pj[v].get<std::string>());
      } catch (const ValidationError& e) {
        throw ValidationError(loc + "[" + std::to_string(v) + "]: " + e.what());
      }
      if (vert.n != n)
        throw ValidationError(loc + "[" + std::to_string(v) + "]: length must match n");
      p.vertices.push_back(vert);
    }
    try {
      p.validate(target);
    } catch (const ValidationError& e) {
      throw ValidationError(loc + ": " + e.what());
    }
    paths.push_back(std::move(p));
  }
  try {
    return PauliFlow(target, std::move(paths));
  } catch (const ValidationError& e) {
    throw ValidationError(where + ": " + e.what());
  }
}

inline PauliFlow load_flow(const std::string& path) {
  return flow_from_json(read_json_file(path), path);
}

inline json flow_to_json(const PauliFlow& flow) {
  json paths = json::array();
  for (const auto& p : flow.paths()) {
    json verts = json::array();
    for (const auto& v : p.vertices) verts.push_back(to_string(v));
    paths.push_back(std::move(verts));
  }
  return json{{"schema", "thermflow.flow/1"},
              {"n", flow.target().n},
              {"target", to_string(flow.target())},
              {"paths", std::move(paths)}};
}

inline json certificate_to_json(const FreeEnergyCertificate& cert, bool with_edges = true) {
  auto edge_json = [](const CertificateEdge& e) {
    return json{{"target", to_string(e.target)},
                {"from", to_string(e.edge.from)},
                {"to", to_string(e.edge.to)},
                {"barrier", e.eps_bar},
                {"omega", {{"num", e.omega.num}, {"den", e.omega.den}}},
                {"value", e.value}};
  };
  json out{{"schema", "thermflow.certificate/1"},
           {"beta", cert.beta},
           {"f_bar", cert.f_bar},
           {"witness", edge_json(cert.witness)}};
  if (with_edges) {
    json edges = json::array();
    for (const auto& e : cert.edges) edges.push_back(edge_json(e));
    out["edges"] = std::move(edges);
  }
  return out;
}

}  // namespace thermflow
