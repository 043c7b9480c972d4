#include <gtest/gtest.h>

#include "selmer_lab/generate.hpp"
#include "selmer_lab/selmer.hpp"
#include "support.hpp"

using namespace selmer_lab;

namespace {

using LC = LocalCondition;

oracle::Rows rows_of(const SelmerInstance& inst) {
  const auto& b = inst.lagrangian().subspace().basis();
  return {b.begin(), b.end()};
}

// G = span{u1 + u2, t1 - t2} over F_3.
SelmerInstance twisted_instance() {
  return instance_from_rows(3, 2, {{1, 0, 1, 0}, {0, 1, 0, 2}}, 0);
}

}  // namespace

TEST(SquarefreeProduct, Arithmetic) {
  const auto a = SquarefreeProduct::of({0, 2});
  const auto b = SquarefreeProduct::of({2, 3});
  EXPECT_EQ(a.size(), 2u);
  EXPECT_TRUE(a.divisible_by(2));
  EXPECT_FALSE(a.divisible_by(1));
  EXPECT_EQ(a.lcm(b), SquarefreeProduct::of({0, 2, 3}));
  EXPECT_EQ(a.lcm(b).quotient(b), SquarefreeProduct::of({0}));
  EXPECT_TRUE(SquarefreeProduct::of({2}).divides(a));
  EXPECT_EQ(a.with(1).without(0), SquarefreeProduct::of({1, 2}));
  EXPECT_LT(SquarefreeProduct::of({5}), a);  // fewer primes first
}

TEST(SquarefreeProduct, EnumerationUpToBound) {
  EXPECT_EQ(products_up_to(4, 4).size(), 16u);
  EXPECT_EQ(products_up_to(4, 1).size(), 5u);
  EXPECT_EQ(products_up_to(5, 2).size(), 16u);
  EXPECT_TRUE(products_up_to(3, 0).front().empty());
}

TEST(Instance, LabelsAndSigns) {
  const auto inst = standard_instance(3, 3, 1);
  EXPECT_EQ(inst.labels(), (std::vector<std::string>{"l1", "l2", "l3"}));
  EXPECT_EQ(inst.product({"l3", "l1"}), SquarefreeProduct::of({0, 2}));
  EXPECT_THROW(inst.product({"l4"}), Error);
  EXPECT_EQ(inst.sign({}), Sign::Plus);
  EXPECT_EQ(inst.sign(SquarefreeProduct::of({1})), Sign::Minus);
  EXPECT_EQ(inst.sign(SquarefreeProduct::of({0, 1})), Sign::Plus);
  const auto other = standard_instance(3, 3, 0);
  EXPECT_EQ(other.sign({}), Sign::Minus);
}

TEST(ConditionSubspace, Profiles) {
  const auto inst = standard_instance(3, 2, 0);
  EXPECT_EQ(condition_subspace(inst, {LC::Unramified, LC::Unramified}), inst.space().standard_lagrangian());
  EXPECT_EQ(condition_subspace(inst, {LC::Relaxed, LC::Relaxed}).dim(), 4u);
  const auto mixed = condition_subspace(inst, {LC::Transverse, LC::Strict});
  EXPECT_EQ(mixed, FpSubspace::span(inst.field(), 4, std::vector<FpVector>{inst.space().t(0)}));
  EXPECT_THROW(condition_subspace(inst, {LC::Relaxed}), Error);
}

TEST(SelmerGroup, StandardLagrangian) {
  for (std::size_t m = 1; m <= 5; ++m) {
    const auto inst = standard_instance(5, m, 0);
    for (auto l : products_up_to(m, m)) EXPECT_EQ(selmer_group(inst, l).dim(), m - l.size());
  }
}

TEST(SelmerGroup, TwistedInstanceMatchesEnumeration) {
  const auto inst = twisted_instance();
  for (auto l : products_up_to(2, 2)) {
    const int expected = oracle::selmer_dim(3, rows_of(inst), oracle::selmer_profile(2, l.mask()));
    EXPECT_EQ(static_cast<int>(selmer_group(inst, l).dim()), expected);
  }
  // Neither generator has a pure u or t component at a single prime.
  EXPECT_EQ(selmer_group(inst, SquarefreeProduct::of({0})).dim(), 0u);
}

TEST(SelmerVariant, StrictInsideRelaxed) {
  const auto inst = generate_instance(5, 4, EpsilonMode::Match, 3);
  for (auto l : products_up_to(4, 3)) {
    for (std::size_t q = 0; q < 4; ++q) {
      if (l.divisible_by(q)) {
        EXPECT_THROW(selmer_variant(inst, l, q, Variant::Strict), Error);
        continue;
      }
      const auto strict = selmer_variant(inst, l, q, Variant::Strict);
      const auto relaxed = selmer_variant(inst, l, q, Variant::Relaxed);
      EXPECT_TRUE(relaxed.contains(strict));
      EXPECT_EQ(relaxed.dim(), strict.dim() + 1);
    }
  }
}

TEST(SelmerVariant, StandardCounts) {
  const auto inst = standard_instance(3, 4, 0);
  EXPECT_EQ(selmer_variant(inst, {}, 2, Variant::Relaxed).dim(), 4u);
  EXPECT_EQ(selmer_variant(inst, {}, 2, Variant::Strict).dim(), 3u);
}

TEST(Rhombus, StandardLagrangian) {
  for (std::size_t m = 1; m <= 4; ++m) {
    const auto inst = standard_instance(3, m, 0);
    for (std::size_t q = 0; q < m; ++q) {
      const auto r = rhombus(inst, {}, q);
      EXPECT_EQ(r.selmer_dim, m);
      EXPECT_EQ(r.relaxed_dim, m);
      EXPECT_EQ(r.strict_dim, m - 1);
      EXPECT_EQ(r.extended_dim, m - 1);
      EXPECT_EQ(r.dichotomy_case, RhombusCase::TransverseDrops);
      EXPECT_TRUE(r.loc_surjective);
    }
  }
}

TEST(Rhombus, ParityChangesAndMatchesEnumeration) {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    const auto inst = generate_instance(3, 3, EpsilonMode::Match, seed);
    const auto g = rows_of(inst);
    for (auto l : products_up_to(3, 3)) {
      for (std::size_t q = 0; q < 3; ++q) {
        if (l.divisible_by(q)) continue;
        const auto r = rhombus(inst, l, q);
        const auto d = [](std::size_t a, std::size_t b) { return a > b ? a - b : b - a; };
        EXPECT_EQ(d(r.extended_dim, r.selmer_dim), 1u);
        auto prof = oracle::selmer_profile(3, l.mask());
        EXPECT_EQ(static_cast<int>(r.selmer_dim), oracle::selmer_dim(3, g, prof));
        prof[q] = oracle::Local::Relaxed;
        EXPECT_EQ(static_cast<int>(r.relaxed_dim), oracle::selmer_dim(3, g, prof));
        prof[q] = oracle::Local::Strict;
        EXPECT_EQ(static_cast<int>(r.strict_dim), oracle::selmer_dim(3, g, prof));
        prof[q] = oracle::Local::Transverse;
        EXPECT_EQ(static_cast<int>(r.extended_dim), oracle::selmer_dim(3, g, prof));
      }
    }
  }
}

TEST(Rhombus, PrimeInProduct) {
  const auto inst = standard_instance(3, 2, 0);
  EXPECT_THROW(rhombus(inst, SquarefreeProduct::of({1}), 1), Error);
}

TEST(Loc, Projections) {
  const auto inst = standard_instance(7, 3, 0);
  const auto& w = inst.space();
  EXPECT_EQ(loc(inst, 1, w.u(1)), (LocalComponents{1, 0}));
  EXPECT_TRUE(loc(inst, 1, w.t(2)).is_zero());
  const FpVector a{1, 2, 3, 4, 5, 6};
  const FpVector b{6, 6, 6, 1, 1, 1};
  FpVector c = a;
  add_scaled(inst.field(), c, b, 1);
  const auto la = loc(inst, 2, a);
  const auto lb = loc(inst, 2, b);
  EXPECT_EQ(loc(inst, 2, c), (LocalComponents{inst.field().add(la.u, lb.u), inst.field().add(la.t, lb.t)}));
  EXPECT_THROW(loc(inst, 3, a), Error);
}

TEST(FreshPrime, ZeroSpaceExhausts) {
  const auto inst = standard_instance(3, 3, 0);
  EXPECT_THROW(find_fresh_prime(inst, {}, FpSubspace(inst.field(), 6), FreshNeed::NonzeroOnSome), Error);
}

TEST(FreshPrime, StandardPicksFirstPrime) {
  const auto inst = standard_instance(3, 3, 0);
  const auto g = inst.lagrangian().subspace();
  EXPECT_EQ(find_fresh_prime(inst, {}, g, FreshNeed::SurjectiveUr), 0u);
  EXPECT_EQ(find_fresh_prime(inst, SquarefreeProduct::of({0}), g, FreshNeed::SurjectiveUr), 1u);
}

TEST(FreshPrime, ResultLocalizesNontrivially) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto inst = generate_instance(5, 5, EpsilonMode::Match, seed);
    const auto sel = selmer_group(inst, {});
    if (sel.is_zero()) continue;
    for (auto need : {FreshNeed::NonzeroOnSome, FreshNeed::SurjectiveUr}) {
      try {
        const auto q = find_fresh_prime(inst, {}, sel, need);
        bool hit = false;
        for (const auto& v : sel.basis()) {
          hit = hit || (need == FreshNeed::SurjectiveUr ? v[2 * q] != 0 : (v[2 * q] != 0 || v[2 * q + 1] != 0));
        }
        EXPECT_TRUE(hit);
      } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::PrimesExhausted);
      }
    }
  }
}

TEST(Parity, StandardConstant) {
  for (std::size_t m = 1; m <= 5; ++m) {
    const auto report = parity_class(standard_instance(3, m, 0), m);
    EXPECT_EQ(report.constant, static_cast<int>(m % 2));
    EXPECT_EQ(report.parity_match, (m % 2) == 1);
  }
  EXPECT_THROW(parity_class(standard_instance(3, 2, 0), 3), Error);
}

TEST(Parity, ConstantAndMatchesEnumeration) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = generate_instance(3, 4, seed % 2 ? EpsilonMode::Match : EpsilonMode::Mismatch, seed);
    const auto report = parity_class(inst, 4);
    EXPECT_EQ(report.parity_match, seed % 2 == 1);
    for (const auto& row : report.table) {
      EXPECT_EQ(static_cast<int>(row.selmer_dim),
                oracle::selmer_dim(3, rows_of(inst), oracle::selmer_profile(4, row.product.mask())));
      EXPECT_EQ(row.value, report.constant);
    }
  }
}

TEST(Selmer, LowerBoundUnderAddedPrimes) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto inst = generate_instance(7, 5, EpsilonMode::Match, seed);
    const auto r = selmer_group(inst, {}).dim();
    for (auto l : products_up_to(5, 5)) EXPECT_GE(selmer_group(inst, l).dim() + l.size(), r);
  }
}
