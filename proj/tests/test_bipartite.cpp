#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <stdexcept>

#include "selmer_lab/bipartite.hpp"
#include "selmer_lab/generate.hpp"
#include "support.hpp"

using namespace selmer_lab;

namespace {

oracle::Rows rows_of(const SelmerInstance& inst) {
  const auto& b = inst.lagrangian().subspace().basis();
  return {b.begin(), b.end()};
}

int brute_dim(const SelmerInstance& inst, SquarefreeProduct l) {
  return oracle::selmer_dim(inst.field().value(), rows_of(inst), oracle::selmer_profile(inst.m(), l.mask()));
}

// Reciprocity violations recomputed from raw coordinates.
std::size_t naive_violations(const SelmerInstance& inst, const BipartiteSystem& z) {
  std::size_t bad = 0;
  for (auto l : products_up_to(inst.m(), z.bound())) {
    if (inst.sign(l) != Sign::Minus) continue;
    const FpVector* v = z.minus_value(l);
    for (std::size_t q = 0; q < inst.m(); ++q) {
      const Residue u = v ? (*v)[2 * q] : 0;
      const Residue t = v ? (*v)[2 * q + 1] : 0;
      if (l.divisible_by(q)) {
        bad += (t == 0) != !z.nonzero(l.without(q)) ? 1 : 0;
      } else if (l.size() + 1 <= z.bound()) {
        bad += (u == 0) != !z.nonzero(l.with(q)) ? 1 : 0;
      }
    }
  }
  return bad;
}

SelmerInstance match_instance(std::uint32_t p, std::size_t m, std::uint64_t seed) {
  return generate_instance(p, m, EpsilonMode::Match, seed);
}

// First generated instance whose Selmer rank is r.
SelmerInstance instance_with_rank(std::uint32_t p, std::size_t m, std::size_t r, std::uint64_t from = 0) {
  for (std::uint64_t seed = from; seed < from + 10000; ++seed) {
    auto inst = match_instance(p, m, seed);
    if (selmer_group(inst, {}).dim() == r) return inst;
  }
  throw std::runtime_error("no instance of the requested rank");
}

bool touches(const ViolationCertificate& c, SquarefreeProduct l) { return c.product == l || c.neighbour() == l; }

}  // namespace

TEST(Heart, StandardInstance) {
  const auto inst = standard_instance(3, 2, 1);
  const auto h = heart(inst, 2);
  EXPECT_EQ(h.size(), 3u);
  EXPECT_TRUE(std::none_of(h.begin(), h.end(), [](SquarefreeProduct l) { return l.empty(); }));
}

TEST(Heart, ContainsOneWhenSelmerVanishes) {
  const auto inst = instance_with_rank(5, 3, 0);
  const auto h = heart(inst, 3);
  EXPECT_EQ(h.front(), SquarefreeProduct{});
}

TEST(Heart, MatchesEnumeration) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = match_instance(3, 3, seed);
    std::vector<SquarefreeProduct> expected;
    for (auto l : products_up_to(3, 3)) {
      if (brute_dim(inst, l) <= 1) expected.push_back(l);
    }
    EXPECT_EQ(heart(inst, 3), expected);
  }
}

TEST(Canonical, StandardTwoPrimes) {
  const auto inst = standard_instance(3, 2, 1);
  const auto z = canonical_system(inst, 2, 0);
  EXPECT_FALSE(z.nonzero({}));
  for (std::size_t q = 0; q < 2; ++q) {
    const auto l = SquarefreeProduct::of({q});
    const FpVector* v = z.minus_value(l);
    ASSERT_NE(v, nullptr);
    // Sel_(l_q) is the u-line of the other prime.
    const std::size_t other = 1 - q;
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ((*v)[i] != 0, i == 2 * other);
  }
  EXPECT_NE(z.plus_value(SquarefreeProduct::of({0, 1})), 0u);
  EXPECT_TRUE(verify_rl1(inst, z).empty());
  EXPECT_TRUE(verify_rl2(inst, z).empty());
  EXPECT_EQ(naive_violations(inst, z), 0u);
}

TEST(Canonical, TrivialSelmerGroup) {
  const auto inst = instance_with_rank(5, 3, 0);
  const auto z = canonical_system(inst, 3, 1);
  EXPECT_NE(z.plus_value({}), 0u);
  for (std::size_t q = 0; q < 3; ++q) EXPECT_NE(z.minus_value(SquarefreeProduct::of({q})), nullptr);
  EXPECT_EQ(naive_violations(inst, z), 0u);
}

TEST(Canonical, RefusesOnParityMismatch) {
  const auto inst = standard_instance(3, 2, 0);
  try {
    canonical_system(inst, 2, 0);
    FAIL() << "expected ParityMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParityMismatch);
  }
}

TEST(Canonical, ValidOnRandomInstances) {
  for (std::uint32_t p : {3u, 5u, 7u}) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const auto inst = match_instance(p, 2 + seed % 4, seed);
      const auto z = canonical_system(inst, inst.m(), seed);
      EXPECT_NO_THROW(validate_system(inst, z));
      EXPECT_EQ(naive_violations(inst, z), 0u);
      EXPECT_TRUE(satisfies_reciprocity(inst, z));
      for (auto l : products_up_to(inst.m(), inst.m())) EXPECT_EQ(z.nonzero(l), selmer_group(inst, l).dim() <= 1);
    }
  }
}

TEST(Validate, RejectsMisplacedValues) {
  const auto inst = standard_instance(3, 2, 1);
  BipartiteSystem z(2);
  z.set_plus(SquarefreeProduct::of({0}), 1);  // "-" index
  EXPECT_THROW(validate_system(inst, z), Error);
  BipartiteSystem y(2);
  y.set_minus(SquarefreeProduct::of({0}), inst.space().u(0));  // not in Sel_(l1)
  EXPECT_THROW(validate_system(inst, y), Error);
  EXPECT_THROW(validate_system(inst, BipartiteSystem(3)), Error);
}

TEST(Reciprocity, ZeroSystemHasNoViolations) {
  const auto inst = match_instance(5, 4, 2);
  const BipartiteSystem z(4);
  EXPECT_TRUE(verify_rl1(inst, z).empty());
  EXPECT_TRUE(verify_rl2(inst, z).empty());
}

TEST(Reciprocity, ZeroedMinusValueIsCertified) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = match_instance(3, 4, seed);
    auto z = canonical_system(inst, 4, seed);
    if (z.minus().empty()) continue;
    const auto l = z.minus().begin()->first;
    z.clear(l);
    auto certs = verify_rl1(inst, z);
    const auto rl2 = verify_rl2(inst, z);
    certs.insert(certs.end(), rl2.begin(), rl2.end());
    ASSERT_FALSE(certs.empty());
    for (const auto& c : certs) EXPECT_TRUE(touches(c, l));
    EXPECT_EQ(naive_violations(inst, z), certs.size());
  }
}

TEST(Reciprocity, ZeroedScalarBehindNonzeroLocalization) {
  const auto inst = standard_instance(3, 2, 1);
  auto z = canonical_system(inst, 2, 0);
  // loc_{l2} of z_{l1} has a nonzero u-part, so RL2 ties it to z_{l1 l2}.
  z.clear(SquarefreeProduct::of({0, 1}));
  const auto certs = verify_rl2(inst, z);
  ASSERT_FALSE(certs.empty());
  EXPECT_TRUE(std::any_of(certs.begin(), certs.end(), [](const ViolationCertificate& c) {
    return c.product == SquarefreeProduct::of({0}) && c.prime == 1 && !c.loc_zero && c.neighbour_zero;
  }));
}

TEST(Nontriviality, ZeroSystem) {
  const auto inst = match_instance(3, 3, 0);
  EXPECT_TRUE(nontriviality(inst, BipartiteSystem(3)).trivial);
}

TEST(Nontriviality, CanonicalHasBothWitnesses) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto inst = match_instance(5, 3 + seed % 3, seed);
    const auto z = canonical_system(inst, inst.m(), seed);
    const auto r = nontriviality(inst, z);
    ASSERT_FALSE(r.trivial);
    ASSERT_TRUE(r.plus_witness && r.minus_witness);
    EXPECT_EQ(inst.sign(*r.plus_witness), Sign::Plus);
    EXPECT_EQ(inst.sign(*r.minus_witness), Sign::Minus);
    EXPECT_NE(z.plus_value(*r.plus_witness), 0u);
    EXPECT_NE(z.minus_value(*r.minus_witness), nullptr);
  }
}

TEST(Nontriviality, SingleMinusValuePointsAtForcedIndex) {
  // Nonzero only at l1; RL2 forces z_{l1 l2} != 0, which this system lacks.
  const auto inst = standard_instance(3, 2, 1);
  BipartiteSystem z(2);
  z.set_minus(SquarefreeProduct::of({0}), inst.space().u(1));
  const auto certs = verify_rl2(inst, z);
  ASSERT_EQ(certs.size(), 1u);
  EXPECT_EQ(certs.front().neighbour(), SquarefreeProduct::of({0, 1}));
  try {
    nontriviality(inst, z);
    FAIL() << "expected MalformedSystem";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedSystem);
  }
}

TEST(Equivalences, ZeroSystemPassesVacuously) {
  const auto inst = match_instance(3, 3, 4);
  const auto r = check_equivalences(inst, BipartiteSystem(3), 3);
  EXPECT_TRUE(r.passed());
  EXPECT_FALSE(r.converse_active);
  EXPECT_EQ(r.indices_checked, 8u);
}

TEST(Equivalences, CanonicalPassesAllDirections) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto inst = match_instance(seed % 2 ? 3 : 7, 2 + seed % 5, seed);
    const auto z = canonical_system(inst, inst.m(), seed);
    const auto r = check_equivalences(inst, z, inst.m());
    EXPECT_TRUE(r.converse_active);
    EXPECT_TRUE(r.passed());
  }
}

TEST(Equivalences, MutationFailsExactlyAtMutatedIndex) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = match_instance(5, 4, seed);
    auto z = canonical_system(inst, 4, seed);
    const auto core = heart(inst, 4);
    const auto l = core[seed % core.size()];
    z.clear(l);
    if (z.trivial()) continue;
    const auto r = check_equivalences(inst, z, 4);
    ASSERT_EQ(r.failures.size(), 1u);
    EXPECT_EQ(r.failures.front().product, l);
    EXPECT_EQ(r.failures.front().direction, inst.sign(l) == Sign::Plus ? Direction::ConverseZero : Direction::ConverseOne);
  }
}

TEST(Path, TrivialAndAdjacent) {
  const auto inst = standard_instance(3, 3, 0);
  const auto a = SquarefreeProduct::of({0, 1});
  EXPECT_EQ(connect_path(inst, a, a, 3).length(), 0u);
  const auto b = SquarefreeProduct::of({0, 1, 2});
  const auto p = connect_path(inst, a, b, 3);
  EXPECT_EQ(p.length(), 1u);
  EXPECT_TRUE(path_is_valid(inst, p, 3));
}

TEST(Path, RejectsEndpointsOutsideHeart) {
  const auto inst = standard_instance(3, 3, 0);
  EXPECT_THROW(connect_path(inst, {}, SquarefreeProduct::of({0, 1}), 3), Error);
  EXPECT_THROW(connect_path(inst, SquarefreeProduct::of({0, 1}), SquarefreeProduct::of({0, 1}), 4), Error);
}

TEST(Path, RandomHeartPairsRevalidate) {
  std::mt19937_64 rng(21);
  std::size_t successes = 0;
  for (std::size_t m = 4; m <= 6; ++m) {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      const auto inst = match_instance(3, m, seed);
      const auto core = heart(inst, m);
      for (int k = 0; k < 10; ++k) {
        const auto s = core[rng() % core.size()];
        const auto e = core[rng() % core.size()];
        Path path;
        try {
          path = connect_path(inst, s, e, m);
        } catch (const Error& err) {
          EXPECT_EQ(err.code(), ErrorCode::PrimesExhausted);
          continue;
        }
        ++successes;
        ASSERT_FALSE(path.nodes.empty());
        EXPECT_EQ(path.nodes.front(), s);
        EXPECT_EQ(path.nodes.back(), e);
        for (std::size_t i = 0; i < path.nodes.size(); ++i) {
          EXPECT_LE(brute_dim(inst, path.nodes[i]), 1);
          if (i > 0) {
            const auto diff = path.nodes[i].mask() ^ path.nodes[i - 1].mask();
            EXPECT_EQ(std::popcount(diff), 1);
          }
        }
      }
    }
  }
  EXPECT_GT(successes, 0u);
}

TEST(Uniqueness, ScalingPreservesSupport) {
  const auto inst = match_instance(5, 4, 9);
  const auto z = canonical_system(inst, 4, 0);
  BipartiteSystem doubled(4);
  for (const auto& [l, c] : z.plus()) doubled.set_plus(l, inst.field().mul(c, 2));
  for (const auto& [l, v] : z.minus()) doubled.set_minus(l, scaled(inst.field(), v, 2));
  EXPECT_TRUE(satisfies_reciprocity(inst, doubled));
  EXPECT_TRUE(uniqueness_check(inst, z, doubled));
}

TEST(Uniqueness, SeedsAgreeAndMutationDiffers) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = match_instance(7, 3 + seed % 3, seed);
    const auto a = canonical_system(inst, inst.m(), seed);
    const auto b = canonical_system(inst, inst.m(), seed + 1000);
    EXPECT_TRUE(uniqueness_check(inst, a, b));
    auto c = a;
    c.clear(heart(inst, inst.m()).front());
    EXPECT_FALSE(uniqueness_check(inst, a, c));
    EXPECT_FALSE(satisfies_reciprocity(inst, c));
  }
}

TEST(Basis, RankZero) {
  const auto inst = instance_with_rank(3, 3, 0);
  const auto b = basis_extract(inst, canonical_system(inst, 3, 0));
  EXPECT_TRUE(b.product.empty());
  EXPECT_TRUE(b.classes.empty());
  EXPECT_TRUE(b.loc_matrix.empty());
}

TEST(Basis, StandardTwoPrimes) {
  const auto inst = standard_instance(3, 2, 1);
  const auto b = basis_extract(inst, canonical_system(inst, 2, 0));
  EXPECT_EQ(b.product, SquarefreeProduct::of({0, 1}));
  ASSERT_EQ(b.classes.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto q = b.primes[i];
    for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(b.classes[i][k] != 0, k == 2 * q);
  }
  EXPECT_EQ(b.loc_matrix[0][1], 0u);
  EXPECT_EQ(b.loc_matrix[1][0], 0u);
  EXPECT_NE(b.loc_matrix[0][0], 0u);
  EXPECT_NE(b.loc_matrix[1][1], 0u);
  EXPECT_EQ(FpSubspace::span(inst.field(), 4, b.classes), selmer_group(inst, {}));
}

TEST(Basis, RandomInstancesRankOracle) {
  std::size_t checked = 0;
  for (std::size_t r = 1; r <= 3; ++r) {
    for (std::uint64_t from = 0; from < 400 && checked < 10 * r; from += 7) {
      const auto inst = instance_with_rank(3, 6, r, from);
      const auto z = canonical_system(inst, 6, from);
      BasisReport b;
      try {
        b = basis_extract(inst, z);
      } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::PrimesExhausted);
        continue;
      }
      ++checked;
      ASSERT_EQ(b.classes.size(), r);
      const oracle::Rows classes(b.classes.begin(), b.classes.end());
      EXPECT_EQ(oracle::log_p(oracle::span_set(3, 12, classes).size(), 3), static_cast<int>(r));
      const auto g = oracle::span_set(3, 12, rows_of(inst));
      for (const auto& v : classes) {
        EXPECT_TRUE(g.count(v));
        for (std::size_t q = 0; q < 6; ++q) EXPECT_TRUE(oracle::local_ok(v, q, oracle::Local::Unramified));
      }
    }
  }
  EXPECT_GT(checked, 0u);
}

TEST(Basis, RankAboveBound) {
  const auto inst = standard_instance(3, 3, 0);
  BipartiteSystem z(2);
  z.set_plus(SquarefreeProduct::of({0}), 1);
  EXPECT_THROW(basis_extract(inst, z), Error);
}

TEST(Supports, MismatchAdmitsOnlyTrivialSupport) {
  std::size_t searched = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto inst = generate_instance(3, 2 + seed % 3, EpsilonMode::Mismatch, seed);
    if (heart(inst, inst.m()).size() > 12) continue;
    const auto s = consistent_supports(inst, inst.m());
    ++searched;
    EXPECT_EQ(s.patterns_checked + 1, std::uint64_t{1} << s.free_indices);
    EXPECT_TRUE(s.consistent_nonzero.empty());
  }
  EXPECT_GE(searched, 20u);
}

TEST(Supports, MatchAdmitsCanonicalSupport) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = match_instance(5, 2 + seed % 3, seed);
    const auto core = heart(inst, inst.m());
    if (core.size() > 12) continue;
    const auto s = consistent_supports(inst, inst.m());
    EXPECT_TRUE(std::find(s.consistent_nonzero.begin(), s.consistent_nonzero.end(), core) !=
                s.consistent_nonzero.end());
  }
}
