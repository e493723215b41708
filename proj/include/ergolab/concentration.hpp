#pragma once

// Closed-form concentration bounds for pattern frequencies and their Monte
// Carlo check on finite actions.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "ergolab/action.hpp"
#include "ergolab/group.hpp"
#include "ergolab/rational.hpp"
#include "ergolab/shift_space.hpp"

namespace ergolab {

struct ConcentrationBoundInput {
  std::uint32_t k;
  GroupSet s;
  Rational eps;
  GroupSet d;

  void validate() const;
};

/// 2 exp(-t^2 / (2 b^2 s)) for a function of s independent trials, each
/// moving the value by at most b.
double scb_bound(double s, double b, double t);

/// 2 exp(-eps^2 |D| / (2 |S|^3)); uncapped.
double concentration_bound(const ConcentrationBoundInput& in);

struct WilsonInterval {
  double lower;
  double upper;
};

/// Wilson score interval for hits/trials (z = 1.96 by default).
WilsonInterval wilson(std::uint64_t hits, std::uint64_t trials, double z = 1.96);

struct McEstimate {
  std::uint64_t trials = 0;
  std::uint64_t hits = 0;
  double estimate() const { return trials ? static_cast<double>(hits) / static_cast<double>(trials) : 0.0; }
  WilsonInterval interval() const { return wilson(hits, trials); }
  double wilson_95_upper() const { return interval().upper; }
};

/// Sample mean of |D n O_phi| against its exact expectation |D| / k^|S|.
struct ExpectationCheck {
  double mean;
  double expected;
  double sigma;  // standard error of the mean
  bool within_3_sigma() const;
};

struct DeviationReport {
  std::vector<McEstimate> per_pattern;  // indexed by pattern code
  std::vector<ExpectationCheck> expectation;
  std::size_t worst = 0;  // pattern code with the most hits

  const McEstimate& worst_estimate() const { return per_pattern[worst]; }
  bool expectation_ok() const;
};

/// Monte Carlo over uniform colorings of SD.x for every pattern on S at
/// once. Trial i uses RNG stream (seed, i). Requires (S,D)-freeness at x.
DeviationReport mc_deviation_all(const ConcentrationBoundInput& in, const FiniteAction& action, Point x,
                                 std::uint64_t trials, std::uint64_t seed, unsigned jobs = 1);

/// Fraction of trials where |D n O_phi| / |D| deviates from k^-|S| by >= eps.
McEstimate mc_deviation_prob(const ConcentrationBoundInput& in, const FiniteAction& action, Point x,
                             const Pattern& phi, std::uint64_t trials, std::uint64_t seed, unsigned jobs = 1);

struct SweepRow {
  std::uint32_t k;
  std::size_t s_size;
  Rational eps;
  std::size_t d_size;
  double bound;
  McEstimate estimate;  // worst pattern
  bool expectation_ok;
  bool checked;          // bound < 0.9
  bool upper_within;     // Wilson upper <= bound
  bool lower_within;     // Wilson lower <= bound

  double reported_bound() const { return bound < 1.0 ? bound : 1.0; }
};

struct SweepSpec {
  std::vector<std::uint32_t> ks{2, 3};
  std::vector<std::size_t> s_sizes{1, 2};
  std::vector<Rational> epsilons{Rational(1, 10), Rational(1, 5)};
  std::vector<std::size_t> d_sizes{500, 2000};
  std::int64_t modulus = 100000;
  std::uint64_t trials = 10000;
  std::uint64_t seed = 1;
};

/// S = {0..|S|-1}, D = {0..|D|-1}, x = 0 on the cyclic action of the given
/// modulus. Sweep point i draws from seed derive_seed(seed, i).
std::vector<SweepRow> concentration_sweep(const SweepSpec& spec, unsigned jobs = 1);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace ergolab
