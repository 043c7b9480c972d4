#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "selmer_lab/duality.hpp"
#include "selmer_lab/error.hpp"
#include "selmer_lab/selmer.hpp"

namespace selmer_lab {

enum class EpsilonMode { Match, Mismatch };

inline const char* to_string(EpsilonMode e) { return e == EpsilonMode::Match ? "match" : "mismatch"; }

inline EpsilonMode parse_epsilon_mode(const std::string& s) {
  if (s == "match") return EpsilonMode::Match;
  if (s == "mismatch") return EpsilonMode::Mismatch;
  throw Error(ErrorCode::InvalidArgument, "epsilon mode must be 'match' or 'mismatch', got '" + s + "'");
}

// The parity constant (dim Sel_(l) + j) mod 2 equals dim Sel mod 2, so the
// requested match status fixes epsilon.
inline int epsilon_for(const HyperbolicSpace& w, const Lagrangian& g, EpsilonMode mode) {
  const auto sel_dim = intersect(g.subspace(), w.standard_lagrangian()).dim();
  const int constant = static_cast<int>(sel_dim % 2);
  return mode == EpsilonMode::Match ? (constant + 1) % 2 : constant;
}

inline SelmerInstance generate_instance(std::uint32_t p, std::size_t m, EpsilonMode mode, std::uint64_t seed,
                                        std::optional<std::size_t> word_length = std::nullopt) {
  if (m == 0 || m > kMaxPrimes) throw Error(ErrorCode::InvalidArgument, "m must be in [1, 62]");
  HyperbolicSpace w(FieldPrime(p), m);
  Lagrangian g = random_lagrangian(w, seed, word_length);
  const int epsilon = epsilon_for(w, g, mode);
  return SelmerInstance(w, SelmerInstance::default_labels(m), std::move(g), epsilon);
}

// G = ⊕ span(u_l), for which dim Sel_(l) = m - j.
inline SelmerInstance standard_instance(std::uint32_t p, std::size_t m, int epsilon) {
  HyperbolicSpace w(FieldPrime(p), m);
  Lagrangian g(w, w.standard_lagrangian());
  return SelmerInstance(w, SelmerInstance::default_labels(m), std::move(g), epsilon);
}

inline SelmerInstance instance_from_rows(std::uint32_t p, std::size_t m, const std::vector<FpVector>& rows,
                                         int epsilon) {
  HyperbolicSpace w(FieldPrime(p), m);
  Lagrangian g(w, FpSubspace::span(w.field(), w.ambient_dim(), rows));
  return SelmerInstance(w, SelmerInstance::default_labels(m), std::move(g), epsilon);
}

}  // namespace selmer_lab
