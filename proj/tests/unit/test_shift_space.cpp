#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "ergolab/error.hpp"
#include "ergolab/shift_space.hpp"

using namespace ergolab;

namespace {

const GroupCtx Z = GroupCtx::integers();

GroupSet ints(std::vector<std::int64_t> v) { return GroupSet::of_integers(Z, v); }

Config window_config(std::int64_t lo, std::vector<Color> values) {
  return {GroupSet::interval(Z, lo, lo + static_cast<std::int64_t>(values.size())), std::move(values)};
}

// Oracle: occurrence test straight from the definition c(s + gamma) = phi(s).
bool occurs_at(const Pattern& phi, const Config& c, std::int64_t gamma) {
  for (std::size_t j = 0; j < phi.size(); ++j) {
    const auto v = c.at(Z.integer(phi.domain()[j].value() + gamma));
    if (!v || *v != phi.values()[j]) return false;
  }
  return true;
}

}  // namespace

TEST(Pattern, Validation) {
  EXPECT_THROW(Pattern(GroupSet(Z), {}, 2), UsageError);
  EXPECT_THROW(Pattern(ints({0, 1}), {0, 2}, 2), UsageError);
  EXPECT_THROW(Pattern(ints({0, 1}), {0}, 2), UsageError);
  const Pattern p(ints({3, 5}), {1, 0}, 2);
  EXPECT_EQ(p.code(), 1u);
  EXPECT_EQ(Pattern::from_code(ints({3, 5}), 2, 1).values(), p.values());
  EXPECT_EQ(p.at(Z.integer(5)), Color{0});
  EXPECT_FALSE(p.at(Z.integer(4)).has_value());
}

TEST(Occurrences, SpecExamples) {
  const auto c = window_config(0, {0, 1, 0, 1, 0});
  const Pattern phi(ints({0, 1}), {0, 1}, 2);
  EXPECT_EQ(occurrences(phi, c), ints({0, 2}));
  EXPECT_EQ(empirical_freq(phi, c, ints({0, 1, 2, 3})), Rational(2, 4));

  const auto zero = window_config(0, std::vector<Color>(10, 0));
  EXPECT_EQ(occurrences(Pattern::constant(ints({0, 1}), 2, 0), zero), GroupSet::interval(Z, 0, 9));
  EXPECT_EQ(empirical_freq(Pattern::constant(ints({0, 1}), 2, 0), zero, ints({0, 4})), Rational(1));
  EXPECT_EQ(empirical_freq(Pattern(ints({0, 1}), {0, 1}, 2), zero, ints({0, 4})), Rational(0));
}

TEST(Occurrences, BoundaryErrorNamesTheTranslate) {
  const auto c = window_config(0, {0, 1, 0, 1, 0});
  const Pattern phi(ints({0, 1}), {0, 1}, 2);
  try {
    empirical_freq(phi, c, ints({0, 4}));
    FAIL() << "expected BoundaryError";
  } catch (const BoundaryError& e) {
    EXPECT_NE(std::string(e.what()).find("5"), std::string::npos) << e.what();
  }
}

TEST(Occurrences, MatchBruteForceAndFrequencies) {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Color> vals(30);
    for (auto& v : vals) v = static_cast<Color>(gen() % 2);
    const auto c = window_config(-5, vals);
    std::vector<std::int64_t> sites{0};
    for (int j = 0; j < static_cast<int>(gen() % 3); ++j) sites.push_back(1 + static_cast<std::int64_t>(gen() % 4));
    const auto s = ints(sites);
    const auto phi = Pattern::from_code(s, 2, gen() % (1u << s.size()));
    std::vector<std::int64_t> expected;
    for (std::int64_t g = -12; g <= 30; ++g) {
      if (occurs_at(phi, c, g)) expected.push_back(g);
    }
    const auto occ = occurrences(phi, c);
    EXPECT_EQ(occ, ints(expected));
    const auto d = GroupSet::interval(Z, -5, 15);
    std::int64_t hits = 0;
    for (const auto& g : d) hits += occ.contains(g);
    const auto freq = empirical_freq(phi, c, d);
    EXPECT_EQ(freq * static_cast<std::int64_t>(d.size()), Rational(hits));
  }
}

TEST(Occurrences, PartitionIdentity) {
  std::mt19937_64 gen(4);
  for (const auto& s : {ints({0}), ints({0, 1}), ints({0, 2}), ints({0, 1, 3})}) {
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<Color> vals(40);
      for (auto& v : vals) v = static_cast<Color>(gen() % 2);
      const auto c = window_config(0, vals);
      const auto d = GroupSet::interval(Z, 0, 30);
      Rational total = 0;
      for (std::uint64_t code = 0; code < (1u << s.size()); ++code) {
        total += empirical_freq(Pattern::from_code(s, 2, code), c, d);
      }
      EXPECT_EQ(total, Rational(1));
      const auto stats = pattern_stats(s, 2, c, d);
      Rational sum = 0;
      for (const auto& r : stats.rows) {
        EXPECT_EQ(r.freq, empirical_freq(Pattern::from_code(s, 2, r.pattern_id), c, d));
        EXPECT_EQ(r.deviation, abs(r.freq - r.target));
        sum += r.freq;
      }
      EXPECT_EQ(sum, Rational(1));
    }
  }
}

TEST(Occurrences, Equivariance) {
  // occurrences(phi, gamma . c) = occurrences(phi, c) gamma^-1, where
  // (gamma . c)(delta) = c(delta + gamma) lives on the window shifted by -gamma.
  std::mt19937_64 gen(9);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Color> vals(25);
    for (auto& v : vals) v = static_cast<Color>(gen() % 3);
    const auto c = window_config(0, vals);
    const std::int64_t gamma = static_cast<std::int64_t>(gen() % 11) - 5;
    const auto shifted = window_config(-gamma, vals);
    const auto phi = Pattern::from_code(ints({0, 2}), 3, gen() % 9);
    std::vector<std::int64_t> moved;
    for (const auto& g : occurrences(phi, c)) moved.push_back(g.value() - gamma);
    EXPECT_EQ(occurrences(phi, shifted), ints(moved));
  }
}

TEST(ShiftPattern, ContainmentIsEquivariant) {
  const auto c = window_config(0, {0, 1, 1, 0, 1, 0, 0, 1});
  const Pattern phi(ints({0, 1}), {1, 1}, 2);
  for (std::int64_t gamma = -2; gamma <= 2; ++gamma) {
    const auto psi = shift_pattern(phi, Z.integer(gamma));
    // gamma . c contains psi iff c contains phi.
    const auto shifted = window_config(-gamma, c.values());
    EXPECT_EQ(shifted.contains(psi), c.contains(phi)) << gamma;
  }
}

TEST(Averages, PointwiseExamples) {
  const auto act = FiniteAction::cyclic(4);
  const std::vector<double> ones(4, 1.0);
  EXPECT_DOUBLE_EQ(pointwise_average(ones, 2, ints({0, 3, 7}), act), 1.0);
  const std::vector<double> ind0{1, 0, 0, 0};
  EXPECT_DOUBLE_EQ(pointwise_average(ind0, 0, GroupSet::interval(Z, 0, 4), act), 0.25);
  const auto w = FiniteAction::window(GroupSet::interval(Z, 0, 4));
  EXPECT_THROW(pointwise_average(ones, 3, ints({0, 1}), w), BoundaryError);
}

TEST(Averages, EmpiricalMeasureMultiplicities) {
  const auto act = FiniteAction::cyclic(5);
  const auto m = empirical_measure(2, ints({0, 5, 1}), act);
  ASSERT_EQ(m.atoms.size(), 2u);
  EXPECT_EQ(m.atoms[0], (std::pair<Point, Rational>{2, Rational(2, 3)}));
  EXPECT_EQ(m.atoms[1], (std::pair<Point, Rational>{3, Rational(1, 3)}));
  const auto free = empirical_measure(1, ints({0, 1, 2}), FiniteAction::cyclic(10));
  for (const auto& [p, w] : free.atoms) EXPECT_EQ(w, Rational(1, 3));
  EXPECT_EQ(empirical_measure(4, ints({7}), act).atoms.size(), 1u);
}

TEST(Averages, IndicatorAverageEqualsMeasureMass) {
  std::mt19937_64 gen(12);
  const auto act = FiniteAction::cyclic(37);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> f(37);
    for (auto& v : f) v = static_cast<double>(gen() % 2);
    std::vector<std::int64_t> d;
    for (int i = 0; i < 8; ++i) d.push_back(static_cast<std::int64_t>(gen() % 100));
    const auto set = ints(d);
    const Point x = static_cast<Point>(gen() % 37);
    const auto mass = empirical_measure(x, set, act).mass([&](Point p) { return f[p] == 1.0; });
    EXPECT_NEAR(pointwise_average(f, x, set, act), to_double(mass), 1e-12);
  }
}

TEST(Averages, Discrepancy) {
  const auto act = FiniteAction::cyclic(10);
  EXPECT_DOUBLE_EQ(discrepancy(std::vector<double>(10, 3.0), 3.0, ints({0, 1}), act), 0.0);
  // f = -1 + 2 x(0) with the points colored 1 on even residues: a single
  // translate sees +1 or -1 while the global mean is 0.
  std::vector<double> f(10);
  for (int i = 0; i < 10; ++i) f[i] = i % 2 == 0 ? 1.0 : -1.0;
  EXPECT_DOUBLE_EQ(discrepancy(f, 0.0, ints({4}), act), 1.0);
  std::mt19937_64 gen(1);
  std::vector<double> r(10);
  double mean = 0;
  for (auto& v : r) mean += (v = static_cast<double>(gen() % 100)) / 10.0;
  EXPECT_NEAR(discrepancy(r, mean, GroupSet::interval(Z, 0, 10), act), 0.0, 1e-12);
}

TEST(Cylinders, UniformLawAndDistances) {
  // Binomial check of u_2(Omega(phi)) = 1/4 over 1e5 samples.
  const auto s = ints({0, 1});
  const Pattern phi(s, {1, 0}, 2);
  int hits = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) hits += sample_uniform_config(s, 2, 77, static_cast<std::uint64_t>(i)).contains(phi);
  const double sigma = std::sqrt(0.25 * 0.75 / n);
  EXPECT_NEAR(hits / static_cast<double>(n), 0.25, 3 * sigma);

  const auto u = uniform_cylinders(2);
  EXPECT_EQ(u(Pattern(ints({0, 4, 9}), {0, 0, 1}, 2)), Rational(1, 8));
  EXPECT_DOUBLE_EQ(cylinder_distance(u, u, {phi}), 0.0);
  AtomMeasure point_mass{{{window_config(0, std::vector<Color>(5, 0)), Rational(1)}}};
  EXPECT_DOUBLE_EQ(cylinder_distance(point_mass.as_fn(), u, {Pattern(ints({0}), {0}, 2)}), 0.5);
  EXPECT_THROW(point_mass.cylinder(Pattern(ints({7}), {0}, 2)), BoundaryError);
}

TEST(CodedStatistics, AnchorCountsMatchDirectCounting) {
  std::mt19937_64 gen(31);
  for (const auto& action : {FiniteAction::cyclic(23), FiniteAction::torus(5, 6)}) {
    const auto& ctx = action.ctx();
    std::vector<Color> g(action.size());
    for (auto& v : g) v = static_cast<Color>(gen() % 2);
    const GroupSet s = ctx.kind() == GroupKind::Integers ? ints({0, 2})
                                                         : GroupSet(ctx, {ctx.vec({0, 0}), ctx.vec({1, 0})});
    const GroupSet d = ctx.kind() == GroupKind::Integers
                           ? ints({0, 1, 2, 3, 5, 8})
                           : GroupSet(ctx, {ctx.vec({0, 0}), ctx.vec({0, 1}), ctx.vec({2, 3}), ctx.vec({1, 1})});
    const auto codes = pattern_codes(action, s, g, 2);
    for (Point y = 0; y < action.size(); ++y) {
      std::uint32_t code = 0;
      for (std::size_t j = 0; j < s.size(); ++j) code += g[action.act_defined(s[j], y)] << j;
      ASSERT_EQ(codes[y], code);
    }
    const auto counts = anchor_counts(action, d, codes, 4);
    for (Point x = 0; x < action.size(); ++x) {
      std::vector<std::uint32_t> direct(4);
      for (const auto& delta : d) ++direct[codes[action.act_defined(delta, x)]];
      for (std::uint32_t c = 0; c < 4; ++c) ASSERT_EQ(counts[x * 4 + c], direct[c]);
    }
  }
}

TEST(PatternStats, CsvHeader) {
  const auto c = window_config(0, {0, 1, 1, 0});
  std::ostringstream out;
  pattern_stats(ints({0}), 2, c, ints({0, 1, 2, 3})).write_csv(out);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "pattern_id,freq,target,deviation");
}
