#pragma once

// Configurations, patterns and their statistics. Conventions: a pattern
// phi: S -> {0..k-1} occurs in c at gamma iff c(s gamma) = phi(s) for every
// s in S, matching the shift (gamma . x)(delta) = x(delta gamma). Frequencies
// and measures are exact rationals.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "ergolab/action.hpp"
#include "ergolab/group.hpp"
#include "ergolab/rational.hpp"

namespace ergolab {

using Color = std::uint32_t;

/// k^e, throwing UsageError past 2^40 (pattern tables would not fit).
std::uint64_t int_pow(std::uint64_t k, std::size_t e);

class Pattern {
 public:
  /// `values` follow the sorted order of `domain`.
  Pattern(GroupSet domain, std::vector<Color> values, std::uint32_t k);

  /// The pattern whose base-k digits (least significant = first domain
  /// element) spell `code`.
  static Pattern from_code(const GroupSet& domain, std::uint32_t k, std::uint64_t code);
  static Pattern constant(const GroupSet& domain, std::uint32_t k, Color c);

  const GroupSet& domain() const { return domain_; }
  const std::vector<Color>& values() const { return values_; }
  std::uint32_t k() const { return k_; }
  std::size_t size() const { return values_.size(); }
  std::uint64_t code() const;
  std::optional<Color> at(const GroupElem& g) const;

 private:
  GroupSet domain_;
  std::vector<Color> values_;
  std::uint32_t k_;
};

/// gamma . phi: the pattern psi with psi(s gamma^-1) = phi(s), so that
/// gamma . x contains psi exactly when x contains phi.
Pattern shift_pattern(const Pattern& phi, const GroupElem& gamma);

/// A coloring of a finite window of the group.
class Config {
 public:
  Config(GroupSet domain, std::vector<Color> values);

  const GroupSet& domain() const { return domain_; }
  const std::vector<Color>& values() const { return values_; }
  std::optional<Color> at(const GroupElem& g) const;
  bool contains(const Pattern& phi) const;

 private:
  GroupSet domain_;
  std::vector<Color> values_;
};

/// Finitely supported probability measure on the points of a finite action.
struct EmpiricalMeasure {
  std::vector<std::pair<Point, Rational>> atoms;  // sorted by point, positive weights
  Rational mass(const std::function<bool(Point)>& indicator) const;
};

struct PatternStatRow {
  std::uint64_t pattern_id;
  Rational freq;
  Rational target;
  Rational deviation;
};

struct PatternStats {
  std::vector<PatternStatRow> rows;  // indexed by pattern code
  std::size_t worst = 0;

  const Rational& worst_deviation() const { return rows[worst].deviation; }
  void write_csv(std::ostream& out, bool header = true) const;
};

/// {gamma : s gamma in dom(c) and c(s gamma) = phi(s) for all s}.
GroupSet occurrences(const Pattern& phi, const Config& c);

/// |D n O_phi(c)| / |D|; BoundaryError names the first translate outside dom(c).
Rational empirical_freq(const Pattern& phi, const Config& c, const GroupSet& d);

/// Frequencies of all k^|S| patterns on S over D in one pass.
PatternStats pattern_stats(const GroupSet& s, std::uint32_t k, const Config& c, const GroupSet& d);

/// (1/|D|) sum_{delta in D} f(delta . x), summed in sorted-D order.
double pointwise_average(std::span<const double> f, Point x, const GroupSet& d, const FiniteAction& action);

EmpiricalMeasure empirical_measure(Point x, const GroupSet& d, const FiniteAction& action);

/// max_x |pointwise_average(f, x, D) - global_mean| over a total action.
double discrepancy(std::span<const double> f, double global_mean, const GroupSet& d, const FiniteAction& action);

/// i.i.d. uniform colors on W drawn from stream (seed, stream).
Config sample_uniform_config(const GroupSet& w, std::uint32_t k, std::uint64_t seed, std::uint64_t stream = 0);

/// A measure on configurations, seen through its cylinder values nu(Omega(phi)).
using CylinderFn = std::function<Rational(const Pattern&)>;

/// Bernoulli measure u_k: cylinder value k^-|phi|.
CylinderFn uniform_cylinders(std::uint32_t k);

/// Finite combination of window configurations.
struct AtomMeasure {
  std::vector<std::pair<Config, Rational>> atoms;
  /// BoundaryError when phi reaches outside an atom's window.
  Rational cylinder(const Pattern& phi) const;
  CylinderFn as_fn() const;
};

/// max over the supplied patterns of |nu1(Omega(phi)) - nu2(Omega(phi))|.
double cylinder_distance(const CylinderFn& nu1, const CylinderFn& nu2, const std::vector<Pattern>& patterns);

// Coded statistics on finite actions. For a coloring g of the points and a
// pattern domain S = {s_0 < s_1 < ...}, the code of point y is
// sum_j g(s_j . y) k^j, i.e. the code of the pattern seen at y.

std::vector<std::uint32_t> pattern_codes(const FiniteAction& action, const GroupSet& s,
                                         std::span<const Color> coloring, std::uint32_t k);

/// counts[x * k^|S| + code] = |{delta in D : code(delta . x) = code}| for
/// every point x of a total action.
std::vector<std::uint32_t> anchor_counts(const FiniteAction& action, const GroupSet& d,
                                         std::span<const std::uint32_t> codes, std::uint64_t patterns);

}  // namespace ergolab
