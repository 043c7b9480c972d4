#pragma once

// Brute-force Selmer tables.
//
// Walks every vector of F_p^{2m}, keeps those orthogonal to the generators of
// G (for a Lagrangian this is G itself), and counts members that satisfy each
// condition profile coordinate by coordinate. Nothing here touches the
// row-reduction code in gf.hpp; the only shared pieces are plain data.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "selmer_lab/error.hpp"
#include "selmer_lab/selmer.hpp"

namespace selmer_lab {

inline constexpr std::uint64_t kDefaultOracleCeiling = 59049;  // 3^10

struct OracleInput {
  std::uint32_t p = 3;
  std::size_t m = 1;
  std::vector<std::vector<std::uint32_t>> rows;  // generators of G, coordinates u_1,t_1,...
};

inline OracleInput oracle_input(const SelmerInstance& inst) {
  return {inst.field().value(), inst.m(), inst.lagrangian().subspace().basis()};
}

struct OracleSelmerRow {
  SquarefreeProduct product;
  std::size_t selmer_dim = 0;
};

struct OracleRhombusRow {
  SquarefreeProduct product;
  std::size_t prime = 0;
  std::size_t selmer_dim = 0;
  std::size_t relaxed_dim = 0;
  std::size_t strict_dim = 0;
  std::size_t extended_dim = 0;
  std::optional<RhombusCase> dichotomy_case;  // empty when neither pattern holds
  bool duality_ok = false;                    // relaxed - strict = 1
  bool parity_change_ok = false;              // |extended - selmer| = 1
};

struct OracleTable {
  std::uint64_t vectors_enumerated = 0;
  std::vector<OracleSelmerRow> selmer;
  std::vector<OracleRhombusRow> rhombus;

  std::size_t violations() const {
    std::size_t n = 0;
    for (const auto& r : rhombus) n += (!r.duality_ok || !r.parity_change_ok || !r.dichotomy_case) ? 1 : 0;
    return n;
  }
};

namespace oracle_detail {

enum : std::uint8_t { kZero = 0, kU = 1, kT = 2, kBoth = 3 };

// Local shape of one plane of a vector.
using Shape = std::vector<std::uint8_t>;

inline bool allowed(std::uint8_t shape, LocalCondition c) {
  switch (c) {
    case LocalCondition::Unramified: return shape == kZero || shape == kU;
    case LocalCondition::Transverse: return shape == kZero || shape == kT;
    case LocalCondition::Strict: return shape == kZero;
    case LocalCondition::Relaxed: return true;
  }
  return false;
}

inline std::size_t log_count(std::uint64_t count, std::uint32_t p) {
  std::size_t d = 0;
  while (count > 1) {
    if (count % p != 0) throw Error(ErrorCode::DualityViolation, "oracle count is not a power of p");
    count /= p;
    ++d;
  }
  return d;
}

}  // namespace oracle_detail

inline OracleTable brute_oracle(const OracleInput& in, std::size_t bound,
                                std::uint64_t ceiling = kDefaultOracleCeiling) {
  using namespace oracle_detail;
  const std::size_t n = 2 * in.m;
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < n; ++i) {
    total *= in.p;
    if (total > ceiling) {
      throw Error(ErrorCode::CeilingExceeded, "p^(2m) exceeds the oracle ceiling " + std::to_string(ceiling));
    }
  }
  if (bound > in.m) throw Error(ErrorCode::BoundExceeded, "bound exceeds number of primes");
  for (const auto& g : in.rows) {
    if (g.size() != n) throw Error(ErrorCode::LengthMismatch, "generator has wrong length");
  }

  // Members of G^perp, recorded by their local shapes.
  std::vector<Shape> members;
  std::vector<std::uint32_t> v(n, 0);
  for (std::uint64_t idx = 0; idx < total; ++idx) {
    std::uint64_t rest = idx;
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = static_cast<std::uint32_t>(rest % in.p);
      rest /= in.p;
    }
    bool orthogonal = true;
    for (const auto& g : in.rows) {
      std::uint64_t acc = 0;
      for (std::size_t k = 0; k < in.m; ++k) {
        acc += std::uint64_t{v[2 * k]} * g[2 * k + 1] + std::uint64_t{v[2 * k + 1]} * g[2 * k];
      }
      if (acc % in.p != 0) {
        orthogonal = false;
        break;
      }
    }
    if (!orthogonal) continue;
    Shape shape(in.m);
    for (std::size_t k = 0; k < in.m; ++k) {
      shape[k] = static_cast<std::uint8_t>((v[2 * k] != 0 ? kU : 0) | (v[2 * k + 1] != 0 ? kT : 0));
    }
    members.push_back(std::move(shape));
  }

  auto dim_for = [&](const ConditionProfile& profile) {
    std::uint64_t count = 0;
    for (const auto& s : members) {
      bool ok = true;
      for (std::size_t k = 0; k < in.m && ok; ++k) ok = allowed(s[k], profile[k]);
      count += ok ? 1 : 0;
    }
    return log_count(count, in.p);
  };
  auto profile_for = [&](SquarefreeProduct l) {
    ConditionProfile prof(in.m, LocalCondition::Unramified);
    for (std::size_t k = 0; k < in.m; ++k) {
      if (l.divisible_by(k)) prof[k] = LocalCondition::Transverse;
    }
    return prof;
  };

  OracleTable table;
  table.vectors_enumerated = total;
  for (auto l : products_up_to(in.m, bound)) {
    const auto base = profile_for(l);
    table.selmer.push_back({l, dim_for(base)});
    for (std::size_t prime = 0; prime < in.m; ++prime) {
      if (l.divisible_by(prime)) continue;
      OracleRhombusRow row;
      row.product = l;
      row.prime = prime;
      row.selmer_dim = table.selmer.back().selmer_dim;
      auto prof = base;
      prof[prime] = LocalCondition::Relaxed;
      row.relaxed_dim = dim_for(prof);
      prof[prime] = LocalCondition::Strict;
      row.strict_dim = dim_for(prof);
      prof[prime] = LocalCondition::Transverse;
      row.extended_dim = dim_for(prof);
      row.duality_ok = row.relaxed_dim == row.strict_dim + 1;
      row.parity_change_ok = row.extended_dim + 1 == row.selmer_dim || row.selmer_dim + 1 == row.extended_dim;
      // Containments strict ⊆ {selmer, extended} ⊆ relaxed turn equal counts
      // into equal subspaces.
      if (row.extended_dim == row.strict_dim && row.selmer_dim == row.relaxed_dim) {
        row.dichotomy_case = RhombusCase::TransverseDrops;
      } else if (row.extended_dim == row.relaxed_dim && row.selmer_dim == row.strict_dim) {
        row.dichotomy_case = RhombusCase::UnramifiedDrops;
      }
      table.rhombus.push_back(row);
    }
  }
  return table;
}

inline OracleTable brute_oracle(const SelmerInstance& inst, std::size_t bound,
                                std::uint64_t ceiling = kDefaultOracleCeiling) {
  return brute_oracle(oracle_input(inst), bound, ceiling);
}

inline bool oracle_fits(std::uint32_t p, std::size_t m, std::uint64_t ceiling) {
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < 2 * m; ++i) {
    total *= p;
    if (total > ceiling) return false;
  }
  return true;
}

}  // namespace selmer_lab
