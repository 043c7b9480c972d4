#pragma once

// Selmer structures over a synthetic instance.
//
// A squarefree product is a set of prime indices. Sel_(l) is the set of
// global classes that are transverse at primes dividing l and unramified
// elsewhere; the strict / relaxed variants replace the condition at one
// extra prime by 0 / the full local plane.

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "selmer_lab/duality.hpp"
#include "selmer_lab/error.hpp"
#include "selmer_lab/gf.hpp"

namespace selmer_lab {

inline constexpr std::size_t kMaxPrimes = 62;

class SquarefreeProduct {
 public:
  constexpr SquarefreeProduct() = default;
  constexpr explicit SquarefreeProduct(std::uint64_t mask) : mask_(mask) {}

  static SquarefreeProduct of(std::initializer_list<std::size_t> primes) {
    SquarefreeProduct out;
    for (auto p : primes) out = out.with(p);
    return out;
  }

  constexpr std::uint64_t mask() const noexcept { return mask_; }
  constexpr std::size_t size() const noexcept { return static_cast<std::size_t>(std::popcount(mask_)); }
  constexpr bool empty() const noexcept { return mask_ == 0; }
  constexpr bool divisible_by(std::size_t prime) const noexcept { return (mask_ >> prime) & 1U; }
  constexpr bool divides(SquarefreeProduct other) const noexcept { return (mask_ & ~other.mask_) == 0; }

  constexpr SquarefreeProduct with(std::size_t prime) const noexcept {
    return SquarefreeProduct(mask_ | (std::uint64_t{1} << prime));
  }
  constexpr SquarefreeProduct without(std::size_t prime) const noexcept {
    return SquarefreeProduct(mask_ & ~(std::uint64_t{1} << prime));
  }
  constexpr SquarefreeProduct lcm(SquarefreeProduct other) const noexcept {
    return SquarefreeProduct(mask_ | other.mask_);
  }
  constexpr SquarefreeProduct quotient(SquarefreeProduct divisor) const noexcept {
    return SquarefreeProduct(mask_ & ~divisor.mask_);
  }

  // Prime indices in increasing order.
  std::vector<std::size_t> primes() const {
    std::vector<std::size_t> out;
    for (std::uint64_t m = mask_; m != 0; m &= m - 1) out.push_back(static_cast<std::size_t>(std::countr_zero(m)));
    return out;
  }

  friend constexpr bool operator==(SquarefreeProduct, SquarefreeProduct) = default;
  friend constexpr auto operator<=>(SquarefreeProduct a, SquarefreeProduct b) {
    if (a.size() != b.size()) return a.size() <=> b.size();
    return a.mask_ <=> b.mask_;
  }

 private:
  std::uint64_t mask_ = 0;
};

// All products of at most `bound` of the first m primes, ordered by size and
// then by mask.
inline std::vector<SquarefreeProduct> products_up_to(std::size_t m, std::size_t bound) {
  if (m > kMaxPrimes) throw Error(ErrorCode::InvalidArgument, "too many primes");
  std::vector<SquarefreeProduct> out;
  const std::uint64_t limit = std::uint64_t{1} << m;
  for (std::uint64_t mask = 0; mask < limit; ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) <= bound) out.emplace_back(mask);
  }
  std::sort(out.begin(), out.end());
  return out;
}

enum class Sign { Plus, Minus };

inline const char* to_string(Sign s) { return s == Sign::Plus ? "+" : "-"; }

enum class LocalCondition { Unramified, Transverse, Strict, Relaxed };

using ConditionProfile = std::vector<LocalCondition>;

enum class Variant { Strict, Relaxed };

struct LocalComponents {
  Residue u = 0;
  Residue t = 0;
  bool is_zero() const noexcept { return u == 0 && t == 0; }
  friend bool operator==(const LocalComponents&, const LocalComponents&) = default;
};

class SelmerInstance {
 public:
  SelmerInstance(HyperbolicSpace space, std::vector<std::string> labels, Lagrangian g, int epsilon)
      : space_(std::move(space)), labels_(std::move(labels)), g_(std::move(g)), epsilon_(epsilon) {
    if (space_.planes() > kMaxPrimes) throw Error(ErrorCode::InvalidArgument, "too many primes");
    if (labels_.size() != space_.planes()) {
      throw Error(ErrorCode::InvalidArgument, "need exactly one label per prime");
    }
    if (std::set<std::string>(labels_.begin(), labels_.end()).size() != labels_.size()) {
      throw Error(ErrorCode::InvalidArgument, "prime labels must be distinct");
    }
    if (epsilon_ != 0 && epsilon_ != 1) throw Error(ErrorCode::InvalidArgument, "epsilon must be 0 or 1");
  }

  static std::vector<std::string> default_labels(std::size_t m) {
    std::vector<std::string> out;
    for (std::size_t i = 1; i <= m; ++i) out.push_back("l" + std::to_string(i));
    return out;
  }

  const FieldPrime& field() const noexcept { return space_.field(); }
  std::size_t m() const noexcept { return space_.planes(); }
  const HyperbolicSpace& space() const noexcept { return space_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const Lagrangian& lagrangian() const noexcept { return g_; }
  int epsilon() const noexcept { return epsilon_; }

  // "+" iff epsilon and j have different parity.
  Sign sign(SquarefreeProduct l) const noexcept {
    return (static_cast<int>(l.size() % 2) != epsilon_) ? Sign::Plus : Sign::Minus;
  }

  std::size_t prime_index(const std::string& label) const {
    const auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) throw Error(ErrorCode::UnknownPrime, "no prime labelled '" + label + "'");
    return static_cast<std::size_t>(it - labels_.begin());
  }

  SquarefreeProduct product(const std::vector<std::string>& labels) const {
    SquarefreeProduct out;
    for (const auto& l : labels) {
      const auto i = prime_index(l);
      if (out.divisible_by(i)) throw Error(ErrorCode::InvalidArgument, "repeated prime '" + l + "'");
      out = out.with(i);
    }
    return out;
  }

  std::vector<std::string> product_labels(SquarefreeProduct l) const {
    check_product(l);
    std::vector<std::string> out;
    for (auto i : l.primes()) out.push_back(labels_[i]);
    return out;
  }

  void check_prime(std::size_t prime) const {
    if (prime >= m()) throw Error(ErrorCode::UnknownPrime, "prime index " + std::to_string(prime));
  }
  void check_product(SquarefreeProduct l) const {
    if (m() < 64 && (l.mask() >> m()) != 0) throw Error(ErrorCode::UnknownPrime, "product uses unknown primes");
  }

 private:
  HyperbolicSpace space_;
  std::vector<std::string> labels_;
  Lagrangian g_;
  int epsilon_;
};

inline ConditionProfile selmer_profile(const SelmerInstance& inst, SquarefreeProduct l) {
  inst.check_product(l);
  ConditionProfile out(inst.m(), LocalCondition::Unramified);
  for (auto i : l.primes()) out[i] = LocalCondition::Transverse;
  return out;
}

inline FpSubspace condition_subspace(const SelmerInstance& inst, const ConditionProfile& profile) {
  if (profile.size() != inst.m()) {
    throw Error(ErrorCode::ProfileIncomplete, "profile has " + std::to_string(profile.size()) +
                                                  " entries for " + std::to_string(inst.m()) + " primes");
  }
  const auto& w = inst.space();
  std::vector<FpVector> rows;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    switch (profile[i]) {
      case LocalCondition::Unramified: rows.push_back(w.u(i)); break;
      case LocalCondition::Transverse: rows.push_back(w.t(i)); break;
      case LocalCondition::Strict: break;
      case LocalCondition::Relaxed:
        rows.push_back(w.u(i));
        rows.push_back(w.t(i));
        break;
    }
  }
  return FpSubspace::span(inst.field(), w.ambient_dim(), rows);
}

inline FpSubspace selmer_for_profile(const SelmerInstance& inst, const ConditionProfile& profile) {
  return intersect(inst.lagrangian().subspace(), condition_subspace(inst, profile));
}

// Sel_(l); for the empty product this is Sel itself.
inline FpSubspace selmer_group(const SelmerInstance& inst, SquarefreeProduct l) {
  return selmer_for_profile(inst, selmer_profile(inst, l));
}

inline ConditionProfile variant_profile(const SelmerInstance& inst, SquarefreeProduct l, std::size_t prime,
                                        Variant which) {
  inst.check_prime(prime);
  if (l.divisible_by(prime)) {
    throw Error(ErrorCode::PrimeInProduct, inst.labels()[prime] + " divides the product");
  }
  auto profile = selmer_profile(inst, l);
  profile[prime] = which == Variant::Strict ? LocalCondition::Strict : LocalCondition::Relaxed;
  return profile;
}

inline FpSubspace selmer_variant(const SelmerInstance& inst, SquarefreeProduct l, std::size_t prime,
                                 Variant which) {
  return selmer_for_profile(inst, variant_profile(inst, l, prime, which));
}

inline LocalComponents loc(const SelmerInstance& inst, std::size_t prime, std::span<const Residue> v) {
  inst.check_prime(prime);
  inst.space().check_vector(v);
  return {v[HyperbolicSpace::u_index(prime)], v[HyperbolicSpace::t_index(prime)]};
}

// Which side of the rhombus collapses when l gains the prime.
enum class RhombusCase {
  TransverseDrops,  // Sel_(l.ell) = strict, Sel_(l) = relaxed
  UnramifiedDrops,  // Sel_(l.ell) = relaxed, Sel_(l) = strict
};

inline const char* to_string(RhombusCase c) {
  return c == RhombusCase::TransverseDrops ? "TransverseDrops" : "UnramifiedDrops";
}

struct RhombusReport {
  std::size_t selmer_dim = 0;    // Sel_(l)
  std::size_t relaxed_dim = 0;   // Sel_(l)^ell
  std::size_t strict_dim = 0;    // Sel_(l)ell
  std::size_t extended_dim = 0;  // Sel_(l.ell)
  RhombusCase dichotomy_case = RhombusCase::TransverseDrops;
  bool loc_surjective = false;  // loc_ell : Sel_(l) -> unramified line
};

inline bool unramified_surjective(const FpSubspace& s, std::size_t prime) {
  const auto idx = HyperbolicSpace::u_index(prime);
  return std::any_of(s.basis().begin(), s.basis().end(), [&](const FpVector& v) { return v[idx] != 0; });
}

inline RhombusReport rhombus(const SelmerInstance& inst, SquarefreeProduct l, std::size_t prime) {
  const auto relaxed_profile = variant_profile(inst, l, prime, Variant::Relaxed);
  const auto relaxed_cond = condition_subspace(inst, relaxed_profile);
  duality_defect(inst.space(), inst.lagrangian(), relaxed_cond);

  const auto sel = selmer_group(inst, l);
  const auto relaxed = intersect(inst.lagrangian().subspace(), relaxed_cond);
  const auto strict = selmer_variant(inst, l, prime, Variant::Strict);
  const auto extended = selmer_group(inst, l.with(prime));

  RhombusReport r;
  r.selmer_dim = sel.dim();
  r.relaxed_dim = relaxed.dim();
  r.strict_dim = strict.dim();
  r.extended_dim = extended.dim();
  r.loc_surjective = unramified_surjective(sel, prime);

  if (r.relaxed_dim != r.strict_dim + 1) {
    throw Error(ErrorCode::DualityViolation, "relaxed and strict Selmer groups differ by " +
                                                 std::to_string(long(r.relaxed_dim) - long(r.strict_dim)));
  }
  const bool transverse_drops = extended == strict && sel == relaxed;
  const bool unramified_drops = extended == relaxed && sel == strict;
  if (transverse_drops == unramified_drops) {
    throw Error(ErrorCode::DualityViolation, "rhombus matches neither pattern");
  }
  r.dichotomy_case = transverse_drops ? RhombusCase::TransverseDrops : RhombusCase::UnramifiedDrops;
  if (r.loc_surjective != (r.extended_dim + 1 == r.selmer_dim)) {
    throw Error(ErrorCode::DualityViolation, "surjectivity of loc does not match the dimension drop");
  }
  return r;
}

enum class FreshNeed { NonzeroOnSome, SurjectiveUr };

// Smallest prime not dividing l at which S localizes nontrivially
// (NonzeroOnSome) or onto the unramified line (SurjectiveUr).
inline std::size_t find_fresh_prime(const SelmerInstance& inst, SquarefreeProduct l, const FpSubspace& s,
                                    FreshNeed need) {
  inst.check_product(l);
  inst.space().check_subspace(s);
  for (std::size_t prime = 0; prime < inst.m(); ++prime) {
    if (l.divisible_by(prime)) continue;
    for (const auto& v : s.basis()) {
      const auto c = loc(inst, prime, v);
      if (need == FreshNeed::SurjectiveUr ? c.u != 0 : !c.is_zero()) return prime;
    }
  }
  throw Error(ErrorCode::PrimesExhausted,
              "no prime outside the product localizes a " + std::to_string(s.dim()) + "-dimensional space " +
                  (need == FreshNeed::SurjectiveUr ? "onto the unramified line" : "nontrivially"));
}

struct ParityRow {
  SquarefreeProduct product;
  std::size_t selmer_dim = 0;
  int value = 0;  // (dim + j) mod 2
};

struct ParityReport {
  int constant = 0;
  bool parity_match = false;  // constant == epsilon + 1 (mod 2)
  std::vector<ParityRow> table;
};

inline ParityReport parity_class(const SelmerInstance& inst, std::size_t bound) {
  if (bound > inst.m()) throw Error(ErrorCode::BoundExceeded, "bound exceeds number of primes");
  ParityReport out;
  for (auto l : products_up_to(inst.m(), bound)) {
    const auto d = selmer_group(inst, l).dim();
    out.table.push_back({l, d, static_cast<int>((d + l.size()) % 2)});
  }
  out.constant = out.table.front().value;
  for (const auto& row : out.table) {
    if (row.value != out.constant) throw Error(ErrorCode::DualityViolation, "Selmer parity is not constant");
  }
  out.parity_match = out.constant == (inst.epsilon() + 1) % 2;
  return out;
}

}  // namespace selmer_lab
