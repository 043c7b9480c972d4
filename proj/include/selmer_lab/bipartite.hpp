#pragma once

// Bipartite Kolyvagin systems over a Selmer instance.
//
// A system assigns a scalar to every "+" product and a Selmer class in
// Sel_(l) to every "-" product, up to a support bound. The two reciprocity
// laws tie the vanishing of a localization of a "-" value to the vanishing
// of the neighbouring "+" value:
//
//   RL1  l in A-, ell | l:   t-part of loc_ell(z_l) = 0  <=>  z_{l/ell} = 0
//   RL2  l in A-, ell ∤ l:   u-part of loc_ell(z_l) = 0  <=>  z_{l.ell} = 0
//
// Only pairs of indices that both lie within the bound are checked.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "selmer_lab/error.hpp"
#include "selmer_lab/gf.hpp"
#include "selmer_lab/rng.hpp"
#include "selmer_lab/selmer.hpp"

namespace selmer_lab {

// Memoized Selmer groups of one instance. Not for sharing across threads.
class SelmerCache {
 public:
  explicit SelmerCache(const SelmerInstance& inst) : inst_(&inst) {}

  const FpSubspace& group(SquarefreeProduct l) {
    auto it = memo_.find(l.mask());
    if (it == memo_.end()) it = memo_.emplace(l.mask(), selmer_group(*inst_, l)).first;
    return it->second;
  }
  std::size_t dim(SquarefreeProduct l) { return group(l).dim(); }
  const SelmerInstance& instance() const noexcept { return *inst_; }

 private:
  const SelmerInstance* inst_;
  std::unordered_map<std::uint64_t, FpSubspace> memo_;
};

class BipartiteSystem {
 public:
  explicit BipartiteSystem(std::size_t bound = 0) : bound_(bound) {}

  std::size_t bound() const noexcept { return bound_; }

  // Zero values are not stored.
  void set_plus(SquarefreeProduct l, Residue value) {
    if (value == 0) {
      plus_.erase(l);
    } else {
      plus_[l] = value;
    }
  }
  void set_minus(SquarefreeProduct l, FpVector value) {
    if (is_zero(value)) {
      minus_.erase(l);
    } else {
      minus_[l] = std::move(value);
    }
  }
  void clear(SquarefreeProduct l) {
    plus_.erase(l);
    minus_.erase(l);
  }

  Residue plus_value(SquarefreeProduct l) const {
    const auto it = plus_.find(l);
    return it == plus_.end() ? 0 : it->second;
  }
  // nullptr stands for the zero class.
  const FpVector* minus_value(SquarefreeProduct l) const {
    const auto it = minus_.find(l);
    return it == minus_.end() ? nullptr : &it->second;
  }
  bool nonzero(SquarefreeProduct l) const { return plus_.count(l) != 0 || minus_.count(l) != 0; }
  bool trivial() const noexcept { return plus_.empty() && minus_.empty(); }

  const std::map<SquarefreeProduct, Residue>& plus() const noexcept { return plus_; }
  const std::map<SquarefreeProduct, FpVector>& minus() const noexcept { return minus_; }

  friend bool operator==(const BipartiteSystem&, const BipartiteSystem&) = default;

 private:
  std::size_t bound_;
  std::map<SquarefreeProduct, Residue> plus_;
  std::map<SquarefreeProduct, FpVector> minus_;
};

// Throws MalformedSystem unless every stored value sits at an index of the
// right sign within the bound, and every "-" value lies in Sel_(l).
inline void validate_system(const SelmerInstance& inst, const BipartiteSystem& z) {
  if (z.bound() > inst.m()) throw Error(ErrorCode::MalformedSystem, "bound exceeds the number of primes");
  auto fail = [&](SquarefreeProduct l, const std::string& why) {
    std::string name = "{";
    for (const auto& s : inst.product_labels(l)) name += (name.size() > 1 ? "," : "") + s;
    throw Error(ErrorCode::MalformedSystem, "index " + name + "}: " + why);
  };
  for (const auto& [l, value] : z.plus()) {
    inst.check_product(l);
    if (l.size() > z.bound()) fail(l, "outside the bound");
    if (inst.sign(l) != Sign::Plus) fail(l, "scalar value at a '-' index");
    if (value >= inst.field().value()) fail(l, "scalar out of range");
  }
  for (const auto& [l, v] : z.minus()) {
    inst.check_product(l);
    if (l.size() > z.bound()) fail(l, "outside the bound");
    if (inst.sign(l) != Sign::Minus) fail(l, "class value at a '+' index");
    if (v.size() != inst.space().ambient_dim()) fail(l, "class has wrong length");
    if (std::any_of(v.begin(), v.end(), [&](Residue x) { return x >= inst.field().value(); })) {
      fail(l, "coordinate out of range");
    }
    if (!selmer_group(inst, l).contains(v)) fail(l, "class is not in Sel_(l)");
  }
}

// Indices with dim Sel_(l) <= 1.
inline std::vector<SquarefreeProduct> heart(const SelmerInstance& inst, std::size_t bound) {
  if (bound > inst.m()) throw Error(ErrorCode::BoundExceeded, "bound exceeds number of primes");
  std::vector<SquarefreeProduct> out;
  for (auto l : products_up_to(inst.m(), bound)) {
    if (selmer_group(inst, l).dim() <= 1) out.push_back(l);
  }
  return out;
}

// Nonzero exactly on the heart: a seeded unit scalar where Sel_(l) = 0, a
// seeded unit multiple of the canonical generator where dim Sel_(l) = 1.
inline BipartiteSystem canonical_system(const SelmerInstance& inst, std::size_t bound, std::uint64_t seed) {
  const auto parity = parity_class(inst, bound);
  if (!parity.parity_match) {
    throw Error(ErrorCode::ParityMismatch, "dim Sel + j is " + std::to_string(parity.constant) +
                                               " mod 2 but epsilon + 1 is " +
                                               std::to_string((inst.epsilon() + 1) % 2));
  }
  const auto& f = inst.field();
  Rng rng(seed);
  BipartiteSystem z(bound);
  for (auto l : products_up_to(inst.m(), bound)) {
    const auto sel = selmer_group(inst, l);
    if (sel.dim() > 1) continue;
    const auto unit = static_cast<Residue>(1 + rng.below(f.value() - 1));
    if (sel.dim() == 0) {
      z.set_plus(l, unit);
    } else {
      z.set_minus(l, scaled(f, sel.basis().front(), unit));
    }
  }
  return z;
}

enum class Law { RL1, RL2 };

inline const char* to_string(Law law) { return law == Law::RL1 ? "RL1" : "RL2"; }

// Disagreement of one reciprocity law at the "-" index `product` and prime
// `prime`: the neighbour is product/prime (RL1) or product*prime (RL2).
struct ViolationCertificate {
  Law law = Law::RL1;
  SquarefreeProduct product;
  std::size_t prime = 0;
  bool loc_zero = false;
  bool neighbour_zero = false;

  SquarefreeProduct neighbour() const { return law == Law::RL1 ? product.without(prime) : product.with(prime); }
  friend bool operator==(const ViolationCertificate&, const ViolationCertificate&) = default;
};

namespace detail {

inline LocalComponents value_loc(const SelmerInstance& inst, const BipartiteSystem& z, SquarefreeProduct l,
                                 std::size_t prime) {
  const FpVector* v = z.minus_value(l);
  return v == nullptr ? LocalComponents{} : loc(inst, prime, *v);
}

}  // namespace detail

inline std::vector<ViolationCertificate> verify_rl1(const SelmerInstance& inst, const BipartiteSystem& z,
                                                    std::size_t limit = std::numeric_limits<std::size_t>::max()) {
  std::vector<ViolationCertificate> out;
  for (auto l : products_up_to(inst.m(), z.bound())) {
    if (inst.sign(l) != Sign::Minus) continue;
    for (auto prime : l.primes()) {
      const bool loc_zero = detail::value_loc(inst, z, l, prime).t == 0;
      const bool neighbour_zero = !z.nonzero(l.without(prime));
      if (loc_zero != neighbour_zero) {
        out.push_back({Law::RL1, l, prime, loc_zero, neighbour_zero});
        if (out.size() >= limit) return out;
      }
    }
  }
  return out;
}

inline std::vector<ViolationCertificate> verify_rl2(const SelmerInstance& inst, const BipartiteSystem& z,
                                                    std::size_t limit = std::numeric_limits<std::size_t>::max()) {
  std::vector<ViolationCertificate> out;
  for (auto l : products_up_to(inst.m(), z.bound())) {
    if (inst.sign(l) != Sign::Minus || l.size() + 1 > z.bound()) continue;
    for (std::size_t prime = 0; prime < inst.m(); ++prime) {
      if (l.divisible_by(prime)) continue;
      const bool loc_zero = detail::value_loc(inst, z, l, prime).u == 0;
      const bool neighbour_zero = !z.nonzero(l.with(prime));
      if (loc_zero != neighbour_zero) {
        out.push_back({Law::RL2, l, prime, loc_zero, neighbour_zero});
        if (out.size() >= limit) return out;
      }
    }
  }
  return out;
}

inline bool satisfies_reciprocity(const SelmerInstance& inst, const BipartiteSystem& z) {
  return verify_rl1(inst, z, 1).empty() && verify_rl2(inst, z, 1).empty();
}

struct NontrivialityReport {
  bool trivial = true;
  std::optional<SquarefreeProduct> plus_witness;
  std::optional<SquarefreeProduct> minus_witness;
};

// For a nonzero system, produces a nonzero index of each sign by moving one
// prime across a reciprocity law from the first nonzero index found.
inline NontrivialityReport nontriviality(const SelmerInstance& inst, const BipartiteSystem& z) {
  NontrivialityReport out;
  if (z.trivial()) return out;
  out.trivial = false;

  auto confirm = [&](SquarefreeProduct l) {
    if (!z.nonzero(l)) throw Error(ErrorCode::MalformedSystem, "system violates the reciprocity laws");
    return l;
  };
  auto room = [&](SquarefreeProduct l) { return l.size() + 1 <= z.bound() && l.size() < inst.m(); };

  if (!z.plus().empty()) {
    const auto l = z.plus().begin()->first;
    out.plus_witness = l;
    if (room(l)) {
      // RL1 at (l.ell, ell) for any fresh ell.
      std::size_t prime = 0;
      while (l.divisible_by(prime)) ++prime;
      out.minus_witness = confirm(l.with(prime));
    } else if (!l.empty()) {
      // RL2 at (l/ell, ell).
      out.minus_witness = confirm(l.without(l.primes().front()));
    } else {
      throw Error(ErrorCode::PrimesExhausted, "no prime available to leave the empty product");
    }
    return out;
  }

  const auto& [l, value] = *z.minus().begin();
  out.minus_witness = l;
  if (room(l)) {
    try {
      const auto span = FpSubspace::span(inst.field(), inst.space().ambient_dim(), std::vector<FpVector>{value});
      const auto prime = find_fresh_prime(inst, l, span, FreshNeed::NonzeroOnSome);
      out.plus_witness = confirm(l.with(prime));
      return out;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::PrimesExhausted) throw;
    }
  }
  for (auto prime : l.primes()) {
    if (loc(inst, prime, value).t != 0) {
      out.plus_witness = confirm(l.without(prime));
      return out;
    }
  }
  throw Error(ErrorCode::PrimesExhausted, "no prime moves the '-' witness to a '+' index");
}

enum class Direction {
  ForwardPlus,   // z != 0 at a "+" index  =>  Sel = 0
  ForwardMinus,  // z != 0 at a "-" index  =>  dim Sel = 1
  ConverseZero,  // Sel = 0      =>  "+" index and z != 0
  ConverseOne,   // dim Sel = 1  =>  "-" index and z != 0
};

inline const char* to_string(Direction d) {
  switch (d) {
    case Direction::ForwardPlus: return "ForwardPlus";
    case Direction::ForwardMinus: return "ForwardMinus";
    case Direction::ConverseZero: return "ConverseZero";
    case Direction::ConverseOne: return "ConverseOne";
  }
  return "?";
}

struct EquivalenceFailure {
  Direction direction;
  SquarefreeProduct product;
  friend bool operator==(const EquivalenceFailure&, const EquivalenceFailure&) = default;
};

struct EquivalenceReport {
  bool nontrivial = false;
  bool converse_active = false;
  std::size_t indices_checked = 0;
  std::vector<EquivalenceFailure> failures;
  bool passed() const noexcept { return failures.empty(); }
};

inline EquivalenceReport check_equivalences(const SelmerInstance& inst, const BipartiteSystem& z,
                                            std::size_t bound) {
  if (bound > z.bound()) throw Error(ErrorCode::BoundExceeded, "bound exceeds the system's bound");
  EquivalenceReport out;
  out.nontrivial = !z.trivial();
  out.converse_active = out.nontrivial;
  for (auto l : products_up_to(inst.m(), bound)) {
    ++out.indices_checked;
    const auto d = selmer_group(inst, l).dim();
    const bool nz = z.nonzero(l);
    const Sign s = inst.sign(l);
    if (nz && s == Sign::Plus && d != 0) out.failures.push_back({Direction::ForwardPlus, l});
    if (nz && s == Sign::Minus && d != 1) out.failures.push_back({Direction::ForwardMinus, l});
    if (out.converse_active) {
      if (d == 0 && !(s == Sign::Plus && nz)) out.failures.push_back({Direction::ConverseZero, l});
      if (d == 1 && !(s == Sign::Minus && nz)) out.failures.push_back({Direction::ConverseOne, l});
    }
  }
  return out;
}

// Support-level comparison over the common bound.
inline bool uniqueness_check(const SelmerInstance& inst, const BipartiteSystem& a, const BipartiteSystem& b) {
  const auto bound = std::min(a.bound(), b.bound());
  for (auto l : products_up_to(inst.m(), bound)) {
    if (a.nonzero(l) != b.nonzero(l)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Paths through the heart

struct Path {
  std::vector<SquarefreeProduct> nodes;
  std::size_t length() const noexcept { return nodes.empty() ? 0 : nodes.size() - 1; }
};

namespace detail {

class PathBuilder {
 public:
  PathBuilder(const SelmerInstance& inst, std::size_t bound) : inst_(inst), cache_(inst), bound_(bound) {}

  SelmerCache& cache() { return cache_; }

  void require_bound(SquarefreeProduct l) const {
    if (l.size() > bound_) {
      throw Error(ErrorCode::BoundExceeded, "path needs a product of " + std::to_string(l.size()) +
                                                " primes, bound is " + std::to_string(bound_));
    }
  }

  // Adds primes to l until dim Sel drops to at most one.
  SquarefreeProduct lift_into_heart(SquarefreeProduct l) {
    while (cache_.dim(l) > 1) {
      const auto before = cache_.dim(l);
      const auto prime = find_fresh_prime(inst_, l, cache_.group(l), FreshNeed::SurjectiveUr);
      l = l.with(prime);
      require_bound(l);
      expect(cache_.dim(l) + 1 == before, "surjective localization did not drop the dimension");
    }
    return l;
  }

  // Path from `low` up to `high`; low | high, both in the heart.
  std::vector<SquarefreeProduct> ascend(SquarefreeProduct low, SquarefreeProduct high) {
    const auto gap = high.quotient(low);
    if (gap.empty()) return {low};
    if (gap.size() == 1) return {low, high};
    for (auto prime : gap.primes()) {
      const auto below = high.without(prime);
      if (cache_.dim(below) <= 1) {
        auto path = ascend(low, below);
        path.push_back(high);
        return path;
      }
    }
    // Every high/ell has dim 2 and Sel_(high) = Sel_(low) is a line; detour
    // through a fresh prime at which that line localizes nontrivially.
    expect(cache_.dim(high) == 1 && cache_.group(high) == cache_.group(low),
           "heart endpoints without heart neighbours must share their Selmer line");
    const auto fresh = find_fresh_prime(inst_, high, cache_.group(low), FreshNeed::SurjectiveUr);
    const auto first = gap.primes().front();
    const auto low_up = low.with(fresh);
    const auto high_up = high.with(fresh);
    require_bound(high_up);
    const auto middle = high_up.without(first);
    expect(cache_.dim(low_up) == 0 && cache_.dim(high_up) == 0 && cache_.dim(middle) == 1,
           "detour left the heart");
    std::vector<SquarefreeProduct> path{low};
    auto inner = ascend(low_up, middle);
    path.insert(path.end(), inner.begin(), inner.end());
    path.push_back(high_up);
    path.push_back(high);
    return path;
  }

 private:
  static void expect(bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::DualityViolation, what);
  }

  const SelmerInstance& inst_;
  SelmerCache cache_;
  std::size_t bound_;
};

// Drops any cycle so every node appears once.
inline std::vector<SquarefreeProduct> erase_loops(const std::vector<SquarefreeProduct>& nodes) {
  std::vector<SquarefreeProduct> out;
  for (auto l : nodes) {
    const auto seen = std::find(out.begin(), out.end(), l);
    if (seen != out.end()) {
      out.erase(seen + 1, out.end());
    } else {
      out.push_back(l);
    }
  }
  return out;
}

}  // namespace detail

// Connects two heart indices by single-prime steps inside the heart: lift
// lcm(start, end) into the heart, then descend to each endpoint.
inline Path connect_path(const SelmerInstance& inst, SquarefreeProduct start, SquarefreeProduct end,
                         std::size_t bound) {
  if (bound > inst.m()) throw Error(ErrorCode::BoundExceeded, "bound exceeds number of primes");
  inst.check_product(start);
  inst.check_product(end);
  detail::PathBuilder builder(inst, bound);
  for (auto l : {start, end}) {
    if (l.size() > bound || builder.cache().dim(l) > 1) {
      throw Error(ErrorCode::InvalidArgument, "path endpoints must lie in the heart");
    }
  }
  if (start == end) return Path{{start}};

  const auto top = builder.lift_into_heart(start.lcm(end));
  builder.require_bound(top);
  auto up = builder.ascend(start, top);
  auto down = builder.ascend(end, top);
  up.pop_back();
  up.insert(up.end(), down.rbegin(), down.rend());
  return Path{detail::erase_loops(up)};
}

// Independent re-validation: consecutive nodes differ by one prime and every
// node has dim Sel <= 1 within the bound.
inline bool path_is_valid(const SelmerInstance& inst, const Path& path, std::size_t bound) {
  if (path.nodes.empty()) return false;
  for (std::size_t i = 0; i < path.nodes.size(); ++i) {
    const auto l = path.nodes[i];
    if (l.size() > bound || selmer_group(inst, l).dim() > 1) return false;
    if (i > 0 && std::popcount(l.mask() ^ path.nodes[i - 1].mask()) != 1) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Basis extraction

struct BasisReport {
  SquarefreeProduct product;                     // l = ell_1 ... ell_r
  std::vector<std::size_t> primes;               // ell_1, ..., ell_r in selection order
  std::vector<FpVector> classes;                 // z_{l/ell_i}
  std::vector<std::vector<Residue>> loc_matrix;  // [i][j] = u-part of loc_{ell_j}(z_{l/ell_i})
};

inline BasisReport basis_extract(const SelmerInstance& inst, const BipartiteSystem& z) {
  SelmerCache cache(inst);
  const auto r = cache.dim(SquarefreeProduct{});
  BasisReport out;
  if (r == 0) return out;
  if (r > z.bound()) {
    throw Error(ErrorCode::BoundExceeded,
                "Selmer rank " + std::to_string(r) + " exceeds bound " + std::to_string(z.bound()));
  }
  if (z.trivial()) throw Error(ErrorCode::InvalidArgument, "basis extraction needs a nontrivial system");
  auto fail = [](const std::string& why) { throw Error(ErrorCode::MalformedSystem, "basis extraction: " + why); };

  SquarefreeProduct l;
  for (std::size_t i = 0; i < r; ++i) {
    const auto before = cache.dim(l);
    const auto prime = find_fresh_prime(inst, l, cache.group(l), FreshNeed::SurjectiveUr);
    l = l.with(prime);
    if (cache.dim(l) + 1 != before) fail("selected prime did not drop the Selmer rank by one");
    out.primes.push_back(prime);
  }
  out.product = l;

  const auto& sel = cache.group(SquarefreeProduct{});
  for (auto prime : out.primes) {
    const auto index = l.without(prime);
    if (inst.sign(index) != Sign::Minus) fail("l/ell has sign '+'");
    const FpVector* v = z.minus_value(index);
    if (v == nullptr) fail("z_{l/ell} vanishes");
    if (!sel.contains(*v)) fail("z_{l/ell} is not in Sel");
    out.classes.push_back(*v);
  }
  for (std::size_t i = 0; i < r; ++i) {
    std::vector<Residue> row;
    for (std::size_t j = 0; j < r; ++j) {
      const auto u = loc(inst, out.primes[j], out.classes[i]).u;
      if ((i == j) != (u != 0)) fail("localization matrix is not diagonal with unit entries");
      row.push_back(u);
    }
    out.loc_matrix.push_back(std::move(row));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Support enumeration on the heart

struct SupportSearch {
  std::size_t heart_size = 0;
  std::size_t free_indices = 0;  // heart indices whose value may be nonzero
  std::uint64_t patterns_checked = 0;
  std::vector<std::vector<SquarefreeProduct>> consistent_nonzero;  // supports passing RL1 and RL2
};

// Tries every zero/nonzero pattern on the heart (values elsewhere zero).
// A nonzero "+" value is 1; a nonzero "-" value generates Sel_(l), which
// requires dim Sel_(l) = 1. The reciprocity laws only see vanishing, so the
// choice of nonzero representative does not matter.
inline SupportSearch consistent_supports(const SelmerInstance& inst, std::size_t bound,
                                         std::size_t max_heart = 12) {
  const auto core = heart(inst, bound);
  SupportSearch out;
  out.heart_size = core.size();
  if (core.size() > max_heart) {
    throw Error(ErrorCode::InvalidArgument, "heart has " + std::to_string(core.size()) + " indices, limit is " +
                                                std::to_string(max_heart));
  }
  std::vector<std::pair<SquarefreeProduct, std::optional<FpVector>>> free;
  for (auto l : core) {
    if (inst.sign(l) == Sign::Plus) {
      free.emplace_back(l, std::nullopt);
    } else {
      const auto sel = selmer_group(inst, l);
      if (sel.dim() == 1) free.emplace_back(l, sel.basis().front());
    }
  }
  out.free_indices = free.size();
  const std::uint64_t patterns = std::uint64_t{1} << free.size();
  for (std::uint64_t pattern = 1; pattern < patterns; ++pattern) {
    BipartiteSystem z(bound);
    std::vector<SquarefreeProduct> support;
    for (std::size_t i = 0; i < free.size(); ++i) {
      if (((pattern >> i) & 1U) == 0) continue;
      support.push_back(free[i].first);
      if (free[i].second) {
        z.set_minus(free[i].first, *free[i].second);
      } else {
        z.set_plus(free[i].first, 1);
      }
    }
    ++out.patterns_checked;
    if (satisfies_reciprocity(inst, z)) out.consistent_nonzero.push_back(std::move(support));
  }
  return out;
}

}  // namespace selmer_lab
