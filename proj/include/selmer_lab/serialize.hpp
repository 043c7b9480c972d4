#pragma once

// JSON files for instances and systems.
//
// Instance: {format_version: 1, p, m, labels, epsilon, lagrangian}
//   lagrangian holds m rows of 2m residues in coordinate order
//   u_1, t_1, ..., u_m, t_m; rows are written in reduced echelon form and
//   re-canonicalized on read.
// System: {format_version: 1, bound, plus: [{primes, value}],
//   minus: [{primes, vector}]}; zero values are omitted.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "selmer_lab/bipartite.hpp"
#include "selmer_lab/error.hpp"
#include "selmer_lab/selmer.hpp"

namespace selmer_lab {

using json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

namespace serialize_detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::Format, what);
}

inline void check_version(const json& j) {
  require(j.is_object(), "expected a JSON object");
  require(j.contains("format_version") && j["format_version"].is_number_integer() &&
              j["format_version"].get<int>() == kFormatVersion,
          "unsupported or missing format_version");
}

template <typename T>
T field_as(const json& j, const char* key) {
  require(j.contains(key), std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::Format, std::string("field '") + key + "' has the wrong type");
  }
}

inline FpVector residues(const json& j, const FieldPrime& f) {
  require(j.is_array(), "expected an array of integers");
  FpVector out;
  for (const auto& x : j) {
    require(x.is_number_integer(), "expected an integer coordinate");
    out.push_back(f.reduce(x.get<std::int64_t>()));
  }
  return out;
}

}  // namespace serialize_detail

inline json instance_to_json(const SelmerInstance& inst) {
  json rows = json::array();
  for (const auto& r : inst.lagrangian().subspace().basis()) rows.push_back(r);
  return json{{"format_version", kFormatVersion},
              {"p", inst.field().value()},
              {"m", inst.m()},
              {"labels", inst.labels()},
              {"epsilon", inst.epsilon()},
              {"lagrangian", rows}};
}

inline SelmerInstance instance_from_json(const json& j) {
  using namespace serialize_detail;
  check_version(j);
  const FieldPrime f(field_as<std::uint32_t>(j, "p"));
  const auto m = field_as<std::size_t>(j, "m");
  require(m >= 1 && m <= kMaxPrimes, "m out of range");
  const auto labels = field_as<std::vector<std::string>>(j, "labels");
  const auto epsilon = field_as<int>(j, "epsilon");
  require(j.contains("lagrangian") && j["lagrangian"].is_array(), "missing lagrangian rows");
  std::vector<FpVector> rows;
  for (const auto& r : j["lagrangian"]) {
    rows.push_back(residues(r, f));
    require(rows.back().size() == 2 * m, "lagrangian row must have 2m entries");
  }
  HyperbolicSpace w(f, m);
  Lagrangian g(w, FpSubspace::span(f, w.ambient_dim(), rows));
  return SelmerInstance(w, labels, std::move(g), epsilon);
}

inline json system_to_json(const SelmerInstance& inst, const BipartiteSystem& z) {
  json plus = json::array();
  for (const auto& [l, value] : z.plus()) plus.push_back({{"primes", inst.product_labels(l)}, {"value", value}});
  json minus = json::array();
  for (const auto& [l, v] : z.minus()) minus.push_back({{"primes", inst.product_labels(l)}, {"vector", v}});
  return json{{"format_version", kFormatVersion}, {"bound", z.bound()}, {"plus", plus}, {"minus", minus}};
}

inline BipartiteSystem system_from_json(const SelmerInstance& inst, const json& j) {
  using namespace serialize_detail;
  check_version(j);
  BipartiteSystem z(field_as<std::size_t>(j, "bound"));
  const auto& f = inst.field();
  for (const char* key : {"plus", "minus"}) {
    require(j.contains(key) && j[key].is_array(), std::string("missing array '") + key + "'");
  }
  for (const auto& e : j["plus"]) {
    const auto l = inst.product(field_as<std::vector<std::string>>(e, "primes"));
    require(!z.nonzero(l), "duplicate index");
    z.set_plus(l, f.reduce(field_as<std::int64_t>(e, "value")));
  }
  for (const auto& e : j["minus"]) {
    const auto l = inst.product(field_as<std::vector<std::string>>(e, "primes"));
    require(!z.nonzero(l), "duplicate index");
    require(e.contains("vector"), "missing field 'vector'");
    auto v = residues(e["vector"], f);
    require(v.size() == inst.space().ambient_dim(), "class vector must have 2m entries");
    z.set_minus(l, std::move(v));
  }
  return z;
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Format, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Format, "'" + path + "': " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Format, "cannot write '" + path + "'");
  out << text;
}

}  // namespace selmer_lab
