#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "ergolab/error.hpp"
#include "ergolab/lll.hpp"

using namespace ergolab;

namespace {

const GroupCtx Z = GroupCtx::integers();

GroupSet ints(std::vector<std::int64_t> v) { return GroupSet::of_integers(Z, v); }

// Oracle for the frequency-deviation predicate on a coloring of F = SD,
// written from the definition with Rational arithmetic.
bool deviates_oracle(std::uint32_t k, const GroupSet& s, const Rational& eps, const GroupSet& d, const Config& c) {
  const Rational target(1, static_cast<std::int64_t>(std::pow(k, s.size())));
  for (std::uint64_t code = 0; code < static_cast<std::uint64_t>(std::pow(k, s.size())); ++code) {
    const auto phi = Pattern::from_code(s, k, code);
    std::int64_t hits = 0;
    for (const auto& delta : d) {
      bool match = true;
      for (std::size_t j = 0; j < s.size(); ++j) {
        match = match && *c.at(Z.integer(s[j].value() + delta.value())) == phi.values()[j];
      }
      hits += match;
    }
    if (abs(Rational(hits, static_cast<std::int64_t>(d.size())) - target) >= eps) return true;
  }
  return false;
}

// ln of e p (d+1) with p = 2 k^s exp(-eps^2 m / (2 s^3)).
double log_margin_oracle(double k, double s, double eps, double m, double d_plus_one) {
  return 1.0 + std::log(2.0) + s * std::log(k) - eps * eps * m / (2 * s * s * s) + std::log(d_plus_one);
}

}  // namespace

TEST(BadEvent, HoldsExamples) {
  const Pattern phi(ints({0, 1}), {1, 0}, 2);
  const auto b = GroupBadEvent::explicit_set(ints({0, 1}), 2, {phi});
  EXPECT_TRUE(event_holds(b, Config(ints({0, 1, 2}), {1, 0, 1})));
  EXPECT_FALSE(event_holds(b, Config(ints({0, 1, 2}), {0, 0, 1})));

  const auto freq = GroupBadEvent::frequency_deviation({2, ints({0}), Rational(1, 10), GroupSet::interval(Z, 0, 10)});
  EXPECT_EQ(freq.domain(), GroupSet::interval(Z, 0, 10));
  EXPECT_FALSE(event_holds(freq, Config(GroupSet::interval(Z, 0, 10), {0, 1, 1, 0, 0, 1, 0, 1, 1, 0})));
  EXPECT_TRUE(event_holds(freq, Config(GroupSet::interval(Z, 0, 10), std::vector<Color>(10, 1))));
  EXPECT_THROW(event_holds(freq, Config(GroupSet::interval(Z, 0, 9), std::vector<Color>(9, 1))), BoundaryError);
}

TEST(BadEvent, ConstantColoringsAlwaysDeviate) {
  // A constant coloring gives frequency 1 to one pattern.
  for (const std::uint32_t k : {2u, 3u}) {
    const auto s = ints({0, 2});
    const auto d = GroupSet::interval(Z, 0, 6);
    const double target = 1.0 / (k * k);
    const auto eps = rational_from_decimal(std::floor((1 - target) * 100 - 1) / 100);
    const auto b = GroupBadEvent::frequency_deviation({k, s, eps, d});
    for (Color c = 0; c < k; ++c) {
      EXPECT_TRUE(event_holds(b, Config(b.domain(), std::vector<Color>(b.domain().size(), c))));
    }
  }
}

TEST(BadEvent, PredicateMatchesExpansionAndProbability) {
  std::mt19937_64 gen(6);
  for (const auto& [s, d, eps] : {std::tuple{ints({0}), ints({0, 1, 2, 3}), Rational(1, 4)},
                                  std::tuple{ints({0}), ints({0, 2, 5}), Rational(1, 10)},
                                  std::tuple{ints({0, 1}), ints({0, 1, 2}), Rational(1, 3)},
                                  std::tuple{ints({0, 1}), ints({0, 2}), Rational(1, 5)}}) {
    const auto b = GroupBadEvent::frequency_deviation({2, s, eps, d});
    const auto& f = b.domain();
    ASSERT_LE(f.size(), 4u);
    const auto members = b.expand();
    std::set<std::uint64_t> member_codes;
    for (const auto& p : members) member_codes.insert(p.code());
    for (std::uint64_t code = 0; code < (1u << f.size()); ++code) {
      const auto phi = Pattern::from_code(f, 2, code);
      const Config c(f, phi.values());
      EXPECT_EQ(b.holds(phi.values()), deviates_oracle(2, s, eps, d, c));
      EXPECT_EQ(member_codes.contains(code), b.holds(phi.values()));
    }
    EXPECT_EQ(event_probability_exhaustive(b),
              Rational(static_cast<std::int64_t>(members.size()), std::int64_t{1} << f.size()));
    const auto ex = GroupBadEvent::explicit_set(f, 2, members);
    EXPECT_EQ(event_probability_exhaustive(ex), event_probability_exhaustive(b));
  }
}

TEST(InducedEvent, Examples) {
  const auto b = GroupBadEvent::explicit_set(ints({0, 1}), 2, {Pattern(ints({0, 1}), {1, 1}, 2)});
  const auto e = induced_event(b, FiniteAction::cyclic(20), 5);
  EXPECT_EQ(e.domain(), (std::vector<Point>{5, 6}));
  std::vector<Color> g(20, 0);
  EXPECT_FALSE(e.holds(g));
  g[5] = g[6] = 1;
  EXPECT_TRUE(e.holds(g));

  // F = {0, 10} collapses on Z/10: only the constant patterns survive.
  const auto f = ints({0, 10});
  const auto mixed = GroupBadEvent::explicit_set(f, 2, {Pattern(f, {0, 1}, 2)});
  const auto collapsed = induced_event(mixed, FiniteAction::cyclic(10), 3);
  EXPECT_EQ(collapsed.domain(), (std::vector<Point>{3}));
  EXPECT_EQ(collapsed.probability_exhaustive(), Rational(0));
  const auto constant = GroupBadEvent::explicit_set(f, 2, {Pattern(f, {1, 1}, 2)});
  EXPECT_EQ(induced_event(constant, FiniteAction::cyclic(10), 3).probability_exhaustive(), Rational(1, 2));

  const auto w = FiniteAction::window(GroupSet::interval(Z, 0, 6));
  EXPECT_THROW(induced_event(b, w, 5), BoundaryError);
}

TEST(SlllStats, IntervalExample) {
  const auto st = slll_stats(2, ints({0}), Rational(1, 10), GroupSet::interval(Z, 0, 4000));
  EXPECT_NEAR(st.p_bound, 4 * std::exp(-20.0), 1e-20);
  EXPECT_TRUE(st.d_exact);
  EXPECT_EQ(st.d_bound, 7998u);  // |D - D| = 7999 differences, one of them 0
  EXPECT_NEAR(st.slll_margin, std::numbers::e * 4 * std::exp(-20.0) * 7999, 1e-12);
  EXPECT_NEAR(st.slll_margin, 1.79e-4, 5e-7);
  const auto generic = slll_stats_generic(2, 1, Rational(1, 10), 4000);
  EXPECT_EQ(generic.d_bound, 4000u * 4000u - 1);
  EXPECT_FALSE(generic.d_exact);
}

TEST(SlllStats, SmallEpsilonNeverCertifies) {
  for (const std::int64_t m : {10, 1000, 4000}) {
    const auto st = slll_stats(2, ints({0, 1}), Rational(1, 100000), GroupSet::interval(Z, 0, m));
    EXPECT_GT(st.slll_margin, 1.0);
  }
}

TEST(SlllStats, DifferenceSetLawForIntervals) {
  for (std::int64_t s = 1; s <= 4; ++s) {
    for (std::int64_t d = 1; d <= 60; d += 7) {
      const auto sd = set_product(GroupSet::interval(Z, 0, s), GroupSet::interval(Z, 3, 3 + d));
      std::vector<std::int64_t> v;
      for (const auto& g : sd) v.push_back(g.value());
      EXPECT_EQ(difference_set_size(v), 2 * sd.size() - 1);
    }
  }
}

TEST(SlllStats, ExactDegreeBelowTheCap) {
  std::mt19937_64 gen(14);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<std::int64_t> d, s{0};
    for (int i = 0; i < 30; ++i) d.push_back(static_cast<std::int64_t>(gen() % 5000));
    s.push_back(1 + static_cast<std::int64_t>(gen() % 9));
    const auto sd = set_product(ints(s), ints(d));
    // Oracle: explicit set of differences.
    std::set<std::int64_t> diffs;
    for (const auto& a : sd) {
      for (const auto& b : sd) diffs.insert(b.value() - a.value());
    }
    std::vector<std::int64_t> v;
    for (const auto& g : sd) v.push_back(g.value());
    EXPECT_EQ(difference_set_size(v), diffs.size());
    const auto st = slll_stats(2, ints(s), Rational(1, 10), ints(d));
    EXPECT_LE(st.d_bound, s.size() * s.size() * d.size() * d.size() - 1);
    EXPECT_EQ(st.d_bound, std::min<std::uint64_t>(diffs.size(), s.size() * s.size() * d.size() * d.size()) - 1);
  }
  // Non-integer group: exact through set products.
  const auto l2 = GroupCtx::lattice(2);
  const GroupSet s2(l2, {l2.vec({0, 0}), l2.vec({1, 0})});
  const GroupSet d2(l2, {l2.vec({0, 0}), l2.vec({0, 1}), l2.vec({5, 5})});
  const auto st = slll_stats(2, s2, Rational(1, 10), d2);
  EXPECT_TRUE(st.d_exact);
  const auto sd = set_product(s2, d2);
  EXPECT_EQ(st.d_bound + 1, set_product(sd.inverse(), sd).size());
}

TEST(Threshold, GenericCapBracket) {
  const auto r = find_slll_threshold(2, ints({0}), Rational(1, 10), ThresholdShape::GenericCap, 100000);
  ASSERT_TRUE(r.found);
  EXPECT_GT(r.m, 3000u);
  EXPECT_LE(r.m, 4000u);
  const auto g = [](double m) { return 1 + std::log(4.0) + 2 * std::log(m) - 0.005 * m; };
  EXPECT_NEAR(g(3000), 3.40, 0.01);
  EXPECT_NEAR(g(4000), -1.02, 0.01);
  EXPECT_LT(g(static_cast<double>(r.m)), 0);
  EXPECT_GE(g(static_cast<double>(r.m - 1)), 0);
  EXPECT_DOUBLE_EQ(r.stationary, 400.0);
  EXPECT_FALSE(r.left_of_stationary);
}

TEST(Threshold, AgreesWithAScanOracle) {
  for (const auto& eps : {Rational(1, 10), Rational(1, 5), Rational(1, 2)}) {
    for (const auto shape : {ThresholdShape::GenericCap, ThresholdShape::Interval}) {
      const auto r = find_slll_threshold(2, ints({0}), eps, shape, 50000);
      ASSERT_TRUE(r.found);
      const double e = to_double(eps);
      auto lm = [&](std::uint64_t m) {
        const double md = static_cast<double>(m);
        return log_margin_oracle(2, 1, e, md, shape == ThresholdShape::GenericCap ? md * md : 2 * md - 1);
      };
      // Least m past the stationary point with a negative log margin.
      std::uint64_t m = static_cast<std::uint64_t>(std::ceil(4 / (e * e)));
      while (lm(m) >= 0) ++m;
      EXPECT_EQ(r.m, m) << to_string(eps) << ' ' << to_string(shape);
      EXPECT_LT(r.margin_at_m, 1.0);
      EXPECT_TRUE(r.margin_below >= 1.0 || r.left_of_stationary);
    }
  }
}

TEST(Threshold, HalfEpsilonBracket) {
  // ln margin = 1 + ln 4 + 2 ln m - m/8 changes sign between 80 and 100.
  const auto r = find_slll_threshold(2, ints({0}), Rational(1, 2), ThresholdShape::GenericCap, 10000);
  ASSERT_TRUE(r.found);
  const auto g = [](double m) { return 1 + std::log(4.0) + 2 * std::log(m) - m / 8; };
  EXPECT_GT(g(80), 0);
  EXPECT_LT(g(100), 0);
  EXPECT_GT(r.m, 80u);
  EXPECT_LE(r.m, 100u);
  EXPECT_LT(g(400), 0);
}

TEST(Threshold, MonotoneInEpsilonAndNotFound) {
  std::uint64_t prev = std::numeric_limits<std::uint64_t>::max();
  for (const auto& eps : {Rational(1, 20), Rational(1, 10), Rational(1, 5), Rational(2, 5), Rational(4, 5)}) {
    const auto r = find_slll_threshold(3, ints({0, 1}), eps, ThresholdShape::GenericCap, 10000000);
    ASSERT_TRUE(r.found);
    EXPECT_LE(r.m, prev);
    prev = r.m;
  }
  EXPECT_FALSE(find_slll_threshold(2, ints({0}), Rational(1, 10), ThresholdShape::GenericCap, 3000).found);
  const auto random = find_slll_threshold(2, ints({0, 3}), Rational(1, 5), ThresholdShape::Random, 20000, 5);
  EXPECT_TRUE(random.found);
}

TEST(Glll, ToyExample) {
  const GLLLWitnessSpec spec{0.05};
  const auto rep = glll_check_sizes(2, 1, Rational(1, 2), {100, 200}, {100, 200}, spec, 1.0);
  const double w0 = std::exp(-5.0), w1 = std::exp(-10.0);
  EXPECT_NEAR(rep.small_sum, 100 * w0 / (1 - w0) + 200 * w1 / (1 - w1), 1e-12);
  EXPECT_NEAR(rep.small_sum, 0.687, 0.001);
  const auto* small = &rep.rows.front();
  for (const auto& r : rep.rows) {
    if (r.inequality == "small_sum") small = &r;
  }
  EXPECT_EQ(small->inequality, "small_sum");
  EXPECT_TRUE(small->verdict);
  EXPECT_FALSE(glll_check_sizes(2, 1, Rational(1, 2), {100, 200}, {100, 200}, spec, 0.5).ok());
}

TEST(Glll, EmptySequenceAndInvalidRates) {
  const auto rep = glll_check(2, ints({0}), Rational(1, 2), {}, GLLLWitnessSpec{0.05}, 0.1);
  EXPECT_TRUE(rep.ok());
  EXPECT_EQ(rep.small_sum, 0.0);
  EXPECT_THROW(glll_check(2, ints({0}), Rational(1, 2), {}, GLLLWitnessSpec{0.125}, 0.1), PreconditionError);
  EXPECT_THROW(glll_check(2, ints({0}), Rational(1, 2), {}, GLLLWitnessSpec{0.0}, 0.1), PreconditionError);
  EXPECT_THROW(find_glll_constant(2, 1, Rational(1, 10), 0.006, 0.1), PreconditionError);
}

TEST(Glll, LogSeriesBound) {
  // sum_{m >= 2} ln m / m^2 = -zeta'(2) = 0.93754825431584375...
  const double b = log_series_bound(2.0, 0);
  EXPECT_GE(b, 0.9375482543158437);
  EXPECT_LT(b, 0.9375482543158437 + 1e-6);
  EXPECT_TRUE(std::isinf(log_series_bound(1.0, 0)));
  EXPECT_LT(log_series_bound(3.0, 100), log_series_bound(3.0, 0));
}

TEST(Glll, ConstantSearch) {
  const double a = 0.02;
  const auto eps = Rational(3, 10);
  const double c = find_glll_constant(2, 1, eps, a, 0.1);
  EXPECT_GT(c * a, 1.0);
  EXPECT_GE(c, find_glll_constant(2, 1, eps, a, 0.5));
  EXPECT_GE(find_glll_constant(2, 1, eps, a, 0.05), c);
  std::vector<GroupSet> seq;
  for (int n = 0; n < 50; ++n) {
    seq.push_back(GroupSet::interval(Z, 0, static_cast<std::int64_t>(std::ceil(c * std::log(n + 2.0)))));
  }
  const auto rep = glll_check(2, ints({0}), eps, seq, GLLLWitnessSpec{a, c}, 0.1);
  EXPECT_TRUE(rep.ok()) << (rep.first_failure() ? rep.first_failure()->inequality + " " + rep.first_failure()->n : "");
  bool has_tail = false;
  for (const auto& r : rep.rows) has_tail = has_tail || r.n == "tail";
  EXPECT_TRUE(has_tail);
  EXPECT_GT(rep.tail_bound, 0.0);
}

TEST(Glll, StandardWitnessFollowsFromSlll) {
  std::mt19937_64 gen(2);
  int certified = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::uint32_t k = 2 + static_cast<std::uint32_t>(gen() % 2);
    const std::size_t s = 1 + gen() % 3;
    const Rational eps(1 + static_cast<std::int64_t>(gen() % 40), 100);
    const std::uint64_t d = 10 + gen() % 100000;
    const auto st = slll_stats_generic(k, s, eps, d);
    const auto w = standard_witness_check(st);
    if (st.slll_margin < 1) {
      ++certified;
      EXPECT_TRUE(w.holds);
      // The single-event GLLL check with omega = 1/(d+1) agrees.
      EXPECT_LE(w.lhs, w.rhs);
    }
  }
  EXPECT_GT(certified, 10);
}
