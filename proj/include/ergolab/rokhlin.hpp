#pragma once

// Tower systems on Z/M and the interval sequences that defeat ergodic
// averaging: a set of small measure that still swallows D_n . x for some n
// from almost every x.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "ergolab/rational.hpp"

namespace ergolab {

struct BadIntervalPlan {
  Rational eps;
  std::uint64_t n;     // N
  std::uint64_t ell;   // max h over the N indices
  /// D_i = {i ell, ..., i ell + ell - 1} for i < N.
  std::int64_t interval_lo(std::uint64_t i) const { return static_cast<std::int64_t>(i * ell); }
  /// Tower levels [a_lo, a_hi) form A, [0, b_hi) form B.
  std::uint64_t a_lo() const { return (n - 1) * ell; }
  std::uint64_t a_hi() const { return (n + 1) * ell; }
  std::uint64_t b_hi() const { return n * ell; }
  std::uint64_t height() const { return (n + 1) * ell; }
  /// eps - 2/(N+1) and (1 - eps/2) N/(N+1) - (1 - eps), both > 0.
  Rational slack_a;
  Rational slack_b;
};

/// Least N with 2/(N+1) < eps and (1 - eps/2) N/(N+1) > 1 - eps.
std::uint64_t minimal_tower_count(const Rational& eps);

/// Plan for indices 0..N-1; `h` is a table with at least N entries.
BadIntervalPlan plan_intervals(const std::vector<std::uint64_t>& h, const Rational& eps);
BadIntervalPlan plan_intervals(const std::function<std::uint64_t(std::uint64_t)>& h, const Rational& eps);

struct TowerSystem {
  std::int64_t m;
  std::int64_t height;   // H
  std::int64_t copies;   // |R| = floor(M / H)
  std::int64_t offset;   // R = {offset + j H mod M}
  std::int64_t residual;  // M - H |R|

  /// Tower level of x, or -1 for residual points.
  std::int64_t level(std::int64_t x) const;
  Rational base_measure() const { return {copies, m}; }
  /// R, R+1, ..., R+H-1 pairwise disjoint, checked by marking.
  bool translates_disjoint() const;
};

struct TowerBuild {
  TowerSystem tower;
  std::vector<char> in_a;
  std::vector<char> in_b;
  Rational mu_a;
  Rational mu_b;

  void write_level_csv(std::ostream& out, const BadIntervalPlan& plan) const;
};

/// Requires M >= H ceil(2/eps), so the residual has measure <= eps/2.
TowerBuild build_tower(const BadIntervalPlan& plan, std::int64_t m, std::int64_t offset = 0);

struct CaptureReport {
  std::vector<std::int32_t> witness;  // least n < N with D_n . x in A, or -1
  std::int64_t captured = 0;
  Rational fraction;
  bool all_b_captured = false;
  bool reverified = false;  // every witness rechecked pointwise
};

CaptureReport verify_capture(const TowerBuild& build, const BadIntervalPlan& plan);

struct BandReport {
  std::uint64_t i;
  Rational eps;
  std::uint64_t n_lo;   // band covers sequence indices [n_lo, n_lo + N_i)
  std::uint64_t n_count;
  std::uint64_t ell;
  std::int64_t offset;
  Rational mu_a;
  Rational mu_b;
  Rational capture_own;   // D_n . x in A_i for some n in the band
  Rational limsup_hit;    // average of 1_{A_{>=k}} equals 1 for some n in the band
  Rational liminf_hit;    // average of 1_{L_k} equals 0 for some n in the band
};

struct BadSequenceReport {
  std::int64_t m;
  std::uint64_t k_probe;
  std::vector<BandReport> bands;
  std::vector<Rational> mu_a_geq;  // mu(A_{>=k}) for k = 0..i_max
  Rational all_bands_limsup;       // points hit in every band i >= k_probe
  Rational last_band_limsup;

  nlohmann::json to_json() const;
};

struct BadSequenceSpec {
  std::uint64_t i_max = 6;
  std::uint64_t k_probe = 0;
  std::int64_t m = 0;  // 0: 2 max_i H_i ceil(2/eps_i) + 1
  std::uint64_t seed = 1;
  /// h(n) for the global sequence index n; default ceil(log2(n+2)).
  std::function<std::uint64_t(std::uint64_t)> h;
};

/// Bands i = 0..i_max with eps_i = 2^-(i+1), towers sharing one Z/M with
/// seeded base offsets. L_k is the complement of A_{>=k}.
BadSequenceReport bad_sequence_experiment(const BadSequenceSpec& spec, unsigned jobs = 1);

}  // namespace ergolab
