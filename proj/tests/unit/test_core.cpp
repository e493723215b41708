#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "ergolab/action.hpp"
#include "ergolab/error.hpp"
#include "ergolab/group.hpp"
#include "ergolab/parallel.hpp"
#include "ergolab/rational.hpp"
#include "ergolab/rng.hpp"

using namespace ergolab;

// ---- rational ----

TEST(Rational, DecimalsRoundTrip) {
  EXPECT_EQ(rational_from_decimal(0.1), Rational(1, 10));
  EXPECT_EQ(rational_from_decimal(0.25), Rational(1, 4));
  EXPECT_EQ(rational_from_decimal(3.0), Rational(3));
  EXPECT_EQ(parse_rational("3/7"), Rational(3, 7));
  EXPECT_EQ(parse_rational("0.125"), Rational(1, 8));
  EXPECT_EQ(to_string(Rational(6, 4)), "3/2");
  EXPECT_THROW(parse_rational("1/0"), UsageError);
  EXPECT_THROW(parse_rational("abc"), UsageError);
}

TEST(Rational, DeviationIsStrictAtTheBoundary) {
  // |count/size - 1/2| >= 1/10 counts as a deviation, equality included.
  EXPECT_TRUE(deviates(6, 10, 2, Rational(1, 10)));
  EXPECT_FALSE(deviates(59, 100, 2, Rational(1, 10)));
  EXPECT_TRUE(deviates(60, 100, 2, Rational(1, 10)));
  EXPECT_TRUE(deviates(40, 100, 2, Rational(1, 10)));
  EXPECT_EQ(deviation(3, 4, 2), Rational(1, 4));
}

TEST(Rational, DeviationMatchesRationalArithmetic) {
  std::mt19937_64 gen(5);
  for (int i = 0; i < 2000; ++i) {
    const std::int64_t size = 1 + static_cast<std::int64_t>(gen() % 5000);
    const std::int64_t count = static_cast<std::int64_t>(gen() % (size + 1));
    const std::int64_t kp = std::int64_t{1} << (1 + gen() % 4);
    const Rational eps(1 + static_cast<std::int64_t>(gen() % 50), 100);
    const Rational dev = abs(Rational(count, size) - Rational(1, kp));
    EXPECT_EQ(deviation(count, size, kp), dev);
    EXPECT_EQ(deviates(count, size, kp, eps), dev >= eps);
  }
}

// ---- rng ----

TEST(Philox, KnownAnswerVectors) {
  using C = std::array<std::uint32_t, 4>;
  EXPECT_EQ(philox4x32({0, 0, 0, 0}, {0, 0}), (C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
            (C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
            (C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Rng, StreamsAreDeterministicAndDistinct) {
  StreamRng a(7, 3), b(7, 3), c(7, 4), d(8, 3);
  std::vector<std::uint64_t> va, vb, vc, vd;
  for (int i = 0; i < 16; ++i) {
    va.push_back(a());
    vb.push_back(b());
    vc.push_back(c());
    vd.push_back(d());
  }
  EXPECT_EQ(va, vb);
  EXPECT_NE(va, vc);
  EXPECT_NE(va, vd);
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
}

TEST(Rng, TapeSymbolsArePureFunctions) {
  const TapeSpace tape(11, 3);
  for (std::uint32_t p = 0; p < 50; ++p) {
    for (std::uint64_t t = 0; t < 5; ++t) {
      EXPECT_EQ(tape.symbol(p, t), TapeSpace(11, 3).symbol(p, t));
      EXPECT_LT(tape.symbol(p, t), 3u);
    }
  }
}

// Chi-square goodness of fit for uniform colors; 99.9% critical values.
double chi_square(const std::vector<std::uint64_t>& counts, double expected) {
  double x = 0;
  for (const auto c : counts) x += (static_cast<double>(c) - expected) * (static_cast<double>(c) - expected) / expected;
  return x;
}

TEST(Rng, TapeSymbolsAreUniformAcrossPointsAndDepths) {
  const TapeSpace tape(2024, 5);
  std::vector<std::uint64_t> by_point(5), by_depth(5), pairs(25);
  const std::uint32_t n = 100000;
  for (std::uint32_t p = 0; p < n; ++p) {
    const auto s0 = tape.symbol(p, 0);
    const auto s1 = tape.symbol(p, 1);
    ++by_point[s0];
    ++by_depth[s1];
    ++pairs[s0 * 5 + s1];
  }
  EXPECT_LT(chi_square(by_point, n / 5.0), 18.47);  // 4 dof
  EXPECT_LT(chi_square(by_depth, n / 5.0), 18.47);
  EXPECT_LT(chi_square(pairs, n / 25.0), 51.18);  // 24 dof, independence of depths
}

TEST(Rng, BelowIsUniform) {
  StreamRng r(99, 0);
  std::vector<std::uint64_t> counts(7);
  for (int i = 0; i < 70000; ++i) ++counts[r.below(7)];
  EXPECT_LT(chi_square(counts, 10000), 22.46);  // 6 dof
  double sum = 0;
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 0.005);
}

// ---- groups ----

TEST(Group, SpecExamples) {
  const auto z = GroupCtx::integers();
  EXPECT_EQ(z.op(z.integer(3), z.integer(-5)), z.integer(-2));
  const auto f2 = GroupCtx::free_group(2);
  EXPECT_EQ(f2.op(f2.word("ab"), f2.word("B")), f2.word("a"));
  const auto c7 = GroupCtx::cyclic(7);
  EXPECT_EQ(c7.inv(c7.integer(3)), c7.integer(4));
  EXPECT_TRUE(z.identity().is_identity());
  EXPECT_TRUE(f2.word("").is_identity());
  EXPECT_TRUE(f2.word("aA").is_identity());
}

TEST(Group, ContextMismatchIsAUsageError) {
  const auto z = GroupCtx::integers();
  const auto c5 = GroupCtx::cyclic(5);
  EXPECT_THROW(z.op(z.integer(1), c5.integer(1)), UsageError);
  EXPECT_THROW(GroupCtx::cyclic(3).op(c5.integer(4), c5.integer(2)), UsageError);
  EXPECT_THROW(set_product(GroupSet::interval(z, 0, 2), GroupSet::interval(c5, 0, 2)), UsageError);
  EXPECT_THROW(GroupCtx::lattice(4), UsageError);
}

GroupElem random_elem(const GroupCtx& ctx, std::mt19937_64& gen) {
  auto r = [&] { return static_cast<std::int64_t>(gen() % 21) - 10; };
  switch (ctx.kind()) {
    case GroupKind::Integers:
    case GroupKind::Cyclic:
      return ctx.integer(r());
    case GroupKind::IntegerLattice: {
      std::vector<std::int64_t> v(ctx.arity());
      for (auto& x : v) x = r();
      return ctx.vec(v);
    }
    case GroupKind::CyclicProduct:
      return ctx.vec({r(), r()});
    case GroupKind::FreeGroup: {
      std::string w;
      const auto len = gen() % 7;
      for (std::size_t i = 0; i < len; ++i) {
        const char letter = static_cast<char>('a' + gen() % ctx.arity());
        w += gen() % 2 ? letter : static_cast<char>(letter - 'a' + 'A');
      }
      return ctx.word(w);
    }
  }
  return ctx.identity();
}

TEST(Group, AxiomsOnRandomTriples) {
  std::mt19937_64 gen(17);
  for (const auto& ctx : {GroupCtx::integers(), GroupCtx::lattice(2), GroupCtx::lattice(3), GroupCtx::free_group(2),
                          GroupCtx::free_group(3), GroupCtx::cyclic(7), GroupCtx::cyclic_product(4, 6)}) {
    for (int i = 0; i < 300; ++i) {
      const auto a = random_elem(ctx, gen);
      const auto b = random_elem(ctx, gen);
      const auto c = random_elem(ctx, gen);
      EXPECT_EQ(ctx.op(ctx.op(a, b), c), ctx.op(a, ctx.op(b, c))) << ctx.name();
      EXPECT_TRUE(ctx.op(a, ctx.inv(a)).is_identity()) << ctx.name();
      EXPECT_TRUE(ctx.op(ctx.inv(a), a).is_identity()) << ctx.name();
      EXPECT_EQ(ctx.op(a, ctx.identity()), a);
      EXPECT_EQ(ctx.normalize(a.normal_form()), a) << ctx.name();
    }
  }
}

TEST(Group, FreeWordsReduce) {
  const auto f2 = GroupCtx::free_group(2);
  EXPECT_EQ(f2.word("abBA"), f2.identity());
  EXPECT_EQ(f2.word("aabBb"), f2.word("aab"));
  EXPECT_NE(f2.word("ab"), f2.word("ba"));
  EXPECT_THROW(f2.word("c"), UsageError);
}

TEST(GroupSet, SetProductExamples) {
  const auto z = GroupCtx::integers();
  EXPECT_EQ(set_product(GroupSet::of_integers(z, {0, 1}), GroupSet::of_integers(z, {0, 10})),
            GroupSet::of_integers(z, {0, 1, 10, 11}));
  const auto d = GroupSet::of_integers(z, {4, -3, 17});
  EXPECT_EQ(set_product(GroupSet::of_integers(z, {0}), d), d);
  const auto f2 = GroupCtx::free_group(2);
  EXPECT_EQ(set_product(GroupSet(f2, {f2.word("a"), f2.word("A")}), GroupSet(f2, {f2.word("a")})),
            GroupSet(f2, {f2.word("aa"), f2.identity()}));
}

TEST(GroupSet, DeduplicatesAndSorts) {
  const auto z = GroupCtx::integers();
  const GroupSet s(z, {z.integer(3), z.integer(1), z.integer(3)});
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0], z.integer(1));
  EXPECT_EQ(s.index_of(z.integer(3)), 1);
  EXPECT_EQ(s.index_of(z.integer(2)), -1);
}

TEST(GroupSet, ProductCardinality) {
  std::mt19937_64 gen(3);
  const auto z = GroupCtx::integers();
  for (int trial = 0; trial < 50; ++trial) {
    // Sparse sets with distinct pairwise sums: powers of a large base.
    std::vector<std::int64_t> s, d;
    for (int i = 0; i < 1 + static_cast<int>(gen() % 5); ++i) s.push_back(static_cast<std::int64_t>(i) * 1000003);
    for (int i = 0; i < 1 + static_cast<int>(gen() % 7); ++i) d.push_back(static_cast<std::int64_t>(gen() % 1000));
    const auto ss = GroupSet::of_integers(z, s);
    const auto dd = GroupSet::of_integers(z, d);
    EXPECT_EQ(set_product(ss, dd).size(), ss.size() * dd.size());
    std::vector<std::int64_t> r;
    for (int i = 0; i < 6; ++i) r.push_back(static_cast<std::int64_t>(gen() % 20));
    const auto rr = GroupSet::of_integers(z, r);
    EXPECT_LE(set_product(rr, dd).size(), rr.size() * dd.size());
  }
}

TEST(GroupSet, BallExamples) {
  const auto z = GroupCtx::integers();
  EXPECT_EQ(ball(GroupSet::of_integers(z, {-1, 1}), 2), GroupSet::of_integers(z, {-2, 0, 2}));
  const auto s = GroupSet::of_integers(z, {2, 7});
  EXPECT_EQ(ball(s, 1), s);
  const auto f2 = GroupCtx::free_group(2);
  const GroupSet gens(f2, {f2.word("a"), f2.word("b"), f2.word("A"), f2.word("B")});
  EXPECT_EQ(ball(gens, 2).size(), 13u);
  EXPECT_THROW(ball(gens, 0), UsageError);
}

// ---- actions ----

TEST(Action, CompositionAndIdentity) {
  const auto z = GroupCtx::integers();
  const auto act = FiniteAction::cyclic(z, 13);
  for (Point x = 0; x < 13; ++x) {
    EXPECT_EQ(act.act_defined(z.identity(), x), x);
    for (std::int64_t g = -20; g <= 20; g += 7) {
      for (std::int64_t h = -9; h <= 9; h += 4) {
        EXPECT_EQ(act.act_defined(z.op(z.integer(g), z.integer(h)), x),
                  act.act_defined(z.integer(g), act.act_defined(z.integer(h), x)));
      }
    }
  }
  const auto t = FiniteAction::torus(5, 7);
  const auto l2 = GroupCtx::lattice(2);
  EXPECT_EQ(t.size(), 35u);
  EXPECT_EQ(t.act_defined(l2.vec({1, 2}), 0), Point{1 * 7 + 2});
  EXPECT_EQ(t.act_defined(l2.vec({-1, -1}), 0), Point{4 * 7 + 6});
}

TEST(Action, WindowsNeverWrap) {
  const auto z = GroupCtx::integers();
  const auto w = FiniteAction::window(GroupSet::interval(z, 0, 5));
  EXPECT_FALSE(w.is_total());
  EXPECT_TRUE(w.act(z.integer(1), 3).has_value());
  EXPECT_FALSE(w.act(z.integer(1), 4).has_value());
  EXPECT_THROW(w.act_defined(z.integer(1), 4), BoundaryError);
}

TEST(Action, FreenessExamples) {
  const auto z = GroupCtx::integers();
  EXPECT_EQ(is_sd_free(FiniteAction::cyclic(100), {GroupSet::interval(z, 0, 10)}), Freeness::Free);
  EXPECT_EQ(is_sd_free(FiniteAction::cyclic(10), {GroupSet::of_integers(z, {0, 10})}), Freeness::NotFree);
  std::mt19937_64 gen(8);
  for (int i = 0; i < 30; ++i) {
    const std::int64_t m = 2 + static_cast<std::int64_t>(gen() % 40);
    std::vector<std::int64_t> d;
    for (int j = 0; j < 5; ++j) d.push_back(static_cast<std::int64_t>(gen() % 120) - 60);
    std::set<std::int64_t> residues;
    for (const auto v : GroupSet::of_integers(z, d)) residues.insert(((v.value() % m) + m) % m);
    const bool distinct = residues.size() == GroupSet::of_integers(z, d).size();
    EXPECT_EQ(is_sd_free(FiniteAction::cyclic(m), {GroupSet::of_integers(z, d)}) == Freeness::Free, distinct);
  }
  // A window reaches its edge before any collision can be ruled out.
  const auto w = FiniteAction::window(GroupSet::interval(z, 0, 5));
  EXPECT_EQ(is_sd_free(w, {GroupSet::of_integers(z, {0, 1})}), Freeness::Indeterminate);
}

TEST(Action, GrowthProfiles) {
  const auto z = GroupCtx::integers();
  const auto prof = growth_profile(FiniteAction::cyclic(1000), GroupSet::of_integers(z, {-1, 0, 1}), 600);
  for (int n = 1; n <= 600; ++n) EXPECT_EQ(prof[n - 1], std::min<std::size_t>(2 * n + 1, 1000));
  const auto ones = growth_profile(FiniteAction::cyclic(50), GroupSet::of_integers(z, {0}), 10);
  EXPECT_TRUE(std::all_of(ones.begin(), ones.end(), [](auto v) { return v == 1; }));
  const auto l2 = GroupCtx::lattice(2);
  const GroupSet plus(l2, {l2.vec({0, 0}), l2.vec({1, 0}), l2.vec({-1, 0}), l2.vec({0, 1}), l2.vec({0, -1})});
  const auto torus = growth_profile(FiniteAction::torus(50, 50), plus, 40);
  for (std::size_t i = 1; i < torus.size(); ++i) {
    EXPECT_LE(torus[i - 1], torus[i]);
    EXPECT_LE(torus[i], 2500u);
  }
  // L1 balls: 2n^2 + 2n + 1 until they wrap.
  for (int n = 1; n <= 10; ++n) EXPECT_EQ(torus[n - 1], static_cast<std::size_t>(2 * n * n + 2 * n + 1));
}

TEST(Parallel, RethrowsWorkerExceptions) {
  EXPECT_THROW(parallel_for(100, 4, [](std::size_t i) {
                 if (i == 77) throw std::runtime_error("boom");
               }),
               std::runtime_error);
  std::vector<int> out(1000);
  parallel_for(out.size(), 8, [&](std::size_t i) { out[i] = static_cast<int>(i); });
  EXPECT_EQ(std::accumulate(out.begin(), out.end(), 0), 999 * 1000 / 2);
}
