#pragma once

// Local and global duality as linear algebra.
//
// Each modeled prime l contributes a hyperbolic plane with basis (u_l, t_l):
// u_l spans the unramified line, t_l the transverse line. The ambient space is
// the orthogonal sum of m planes in coordinate order (u_1, t_1, ..., u_m, t_m)
// with the split symmetric pairing
//
//     <a u + b t, a' u + b' t> = a b' + b a'
//
// whose quadratic form Q(v) = sum_l u_l(v) t_l(v) vanishes on a plane exactly
// along the two distinguished lines. The image of global cohomology is a
// Lagrangian G: dim G = m and <g, h> = 0 on G.
//
// Master identity. For any subspace C,
//
//     dim(G ∩ C) - dim(G ∩ C^perp) = dim C - m.
//
// Proof: G = G^perp, so G ∩ C^perp = (G + C)^perp has dimension
// 2m - dim(G + C) = 2m - (m + dim C - dim(G ∩ C)).
//
// Taking C = (a distinguished line at every prime but l) ⊕ (full plane at l)
// gives C^perp = (same lines) ⊕ 0, and the identity reads
// dim(relaxed) - dim(strict) = 1. Because G is totally singular for Q and
// the lines elsewhere are Q-singular, every relaxed class localizes at l to a
// Q-singular vector, i.e. into the unramified or the transverse line. The
// one-dimensional image therefore equals one of the two lines, which is the
// rhombus dichotomy.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "selmer_lab/error.hpp"
#include "selmer_lab/gf.hpp"
#include "selmer_lab/rng.hpp"

namespace selmer_lab {

class HyperbolicSpace {
 public:
  HyperbolicSpace(FieldPrime field, std::size_t planes) : field_(field), m_(planes) {
    if (planes == 0) throw Error(ErrorCode::InvalidArgument, "need at least one prime");
  }

  const FieldPrime& field() const noexcept { return field_; }
  std::size_t planes() const noexcept { return m_; }
  std::size_t ambient_dim() const noexcept { return 2 * m_; }

  static constexpr std::size_t u_index(std::size_t plane) noexcept { return 2 * plane; }
  static constexpr std::size_t t_index(std::size_t plane) noexcept { return 2 * plane + 1; }

  FpVector u(std::size_t plane) const { return unit_vector(ambient_dim(), u_index(check_plane(plane))); }
  FpVector t(std::size_t plane) const { return unit_vector(ambient_dim(), t_index(check_plane(plane))); }

  Residue pair(std::span<const Residue> v, std::span<const Residue> w) const {
    check_vector(v);
    check_vector(w);
    std::uint64_t acc = 0;
    for (std::size_t i = 0; i < m_; ++i) {
      acc += static_cast<std::uint64_t>(v[2 * i]) * w[2 * i + 1] % field_.value();
      acc += static_cast<std::uint64_t>(v[2 * i + 1]) * w[2 * i] % field_.value();
    }
    return static_cast<Residue>(acc % field_.value());
  }

  Residue quadratic(std::span<const Residue> v) const {
    check_vector(v);
    std::uint64_t acc = 0;
    for (std::size_t i = 0; i < m_; ++i) acc += static_cast<std::uint64_t>(v[2 * i]) * v[2 * i + 1] % field_.value();
    return static_cast<Residue>(acc % field_.value());
  }

  // {w : <w, s> = 0 for all s in S}
  FpSubspace orthogonal_complement(const FpSubspace& s) const {
    check_subspace(s);
    std::vector<FpVector> rows;
    rows.reserve(s.dim());
    for (const auto& b : s.basis()) rows.push_back(swap_planes(b));
    return kernel(field_, ambient_dim(), rows);
  }

  // ⊕_l span(u_l)
  FpSubspace standard_lagrangian() const {
    std::vector<FpVector> rows;
    for (std::size_t i = 0; i < m_; ++i) rows.push_back(u(i));
    return FpSubspace::span(field_, ambient_dim(), rows);
  }

  void check_vector(std::span<const Residue> v) const {
    if (v.size() != ambient_dim()) {
      throw Error(ErrorCode::AmbientMismatch, "vector of length " + std::to_string(v.size()) +
                                                  " in a space of dimension " + std::to_string(ambient_dim()));
    }
  }
  void check_subspace(const FpSubspace& s) const {
    if (s.ambient_dim() != ambient_dim() || !(s.field() == field_)) {
      throw Error(ErrorCode::AmbientMismatch, "subspace does not live in this space");
    }
  }

  friend bool operator==(const HyperbolicSpace&, const HyperbolicSpace&) = default;

 private:
  std::size_t check_plane(std::size_t plane) const {
    if (plane >= m_) throw Error(ErrorCode::UnknownPrime, "plane index " + std::to_string(plane));
    return plane;
  }

  FpVector swap_planes(std::span<const Residue> v) const {
    FpVector out(v.size());
    for (std::size_t i = 0; i < m_; ++i) {
      out[2 * i] = v[2 * i + 1];
      out[2 * i + 1] = v[2 * i];
    }
    return out;
  }

  FieldPrime field_;
  std::size_t m_;
};

inline bool is_lagrangian(const HyperbolicSpace& w, const FpSubspace& g) {
  if (g.ambient_dim() != w.ambient_dim() || !(g.field() == w.field())) return false;
  if (g.dim() != w.planes()) return false;
  const auto& b = g.basis();
  for (std::size_t i = 0; i < b.size(); ++i) {
    for (std::size_t j = i; j < b.size(); ++j) {
      if (w.pair(b[i], b[j]) != 0) return false;
    }
  }
  return true;
}

class Lagrangian {
 public:
  // Throws DualityViolation unless g is maximal isotropic in w.
  Lagrangian(const HyperbolicSpace& w, FpSubspace g) : g_(std::move(g)) {
    if (!is_lagrangian(w, g_)) throw Error(ErrorCode::DualityViolation, "subspace is not Lagrangian");
  }

  const FpSubspace& subspace() const noexcept { return g_; }
  std::size_t dim() const noexcept { return g_.dim(); }

  friend bool operator==(const Lagrangian&, const Lagrangian&) = default;

 private:
  FpSubspace g_;
};

inline std::size_t default_word_length(const HyperbolicSpace& w) { return 8 * w.planes(); }

// Standard Lagrangian moved by a seeded word of orthogonal reflections
// v -> v - <v,x> Q(x)^{-1} x with Q(x) != 0.
//
// Lagrangians come in two families, told apart by the parity of
// dim(G ∩ U) - m for the standard U, and each reflection swaps them. The
// default word length is 8m or 8m + 1 with equal odds so both families are
// reached; an explicit length is used as given.
inline Lagrangian random_lagrangian(const HyperbolicSpace& w, std::uint64_t seed,
                                    std::optional<std::size_t> word_length = std::nullopt) {
  const auto& f = w.field();
  const std::size_t n = w.ambient_dim();
  Rng rng(seed);
  const std::size_t steps = word_length ? *word_length : default_word_length(w) + rng.below(2);
  std::vector<FpVector> basis;
  for (std::size_t i = 0; i < w.planes(); ++i) basis.push_back(w.u(i));
  FpVector x(n);
  for (std::size_t step = 0; step < steps; ++step) {
    Residue q = 0;
    do {
      for (auto& c : x) c = static_cast<Residue>(rng.below(f.value()));
      q = w.quadratic(x);
    } while (q == 0);
    const Residue q_inv = f.inv(q);
    for (auto& v : basis) add_scaled(f, v, x, f.neg(f.mul(w.pair(v, x), q_inv)));
  }
  return Lagrangian(w, FpSubspace::span(f, n, basis));
}

// dim(G ∩ C) - dim(G ∩ C^perp); throws DualityViolation when this differs
// from dim C - m.
inline long duality_defect(const HyperbolicSpace& w, const Lagrangian& g, const FpSubspace& c) {
  w.check_subspace(c);
  const auto inside = static_cast<long>(intersect(g.subspace(), c).dim());
  const auto dual = static_cast<long>(intersect(g.subspace(), w.orthogonal_complement(c)).dim());
  const long defect = inside - dual;
  const long expected = static_cast<long>(c.dim()) - static_cast<long>(w.planes());
  if (defect != expected) {
    throw Error(ErrorCode::DualityViolation,
                "defect " + std::to_string(defect) + " but dim C - m = " + std::to_string(expected));
  }
  return defect;
}

}  // namespace selmer_lab
