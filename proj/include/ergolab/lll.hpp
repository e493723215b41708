#pragma once

// Bad events over a group, the events they induce on a finite action, and
// numeric certification of the symmetric (SLLL) and general (GLLL) local
// lemma conditions for frequency-deviation instances.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "ergolab/action.hpp"
#include "ergolab/group.hpp"
#include "ergolab/rational.hpp"
#include "ergolab/shift_space.hpp"

namespace ergolab {

/// Colorings c of SD with |D n O_phi(c)| / |D| at distance >= eps from
/// k^-|S| for some phi: S -> k.
struct FrequencyDeviation {
  std::uint32_t k;
  GroupSet s;
  Rational eps;
  GroupSet d;
};

class GroupBadEvent {
 public:
  enum class Kind { ExplicitSet, FrequencyDeviation };

  /// Every pattern must have domain F.
  static GroupBadEvent explicit_set(GroupSet f, std::uint32_t k, std::vector<Pattern> patterns);
  static GroupBadEvent frequency_deviation(FrequencyDeviation spec);

  Kind kind() const { return kind_; }
  const GroupSet& domain() const { return domain_; }
  std::uint32_t k() const { return k_; }
  const std::vector<Pattern>& patterns() const { return patterns_; }
  const FrequencyDeviation& frequency() const;

  /// Membership of the F-coloring whose values follow the sorted order of F.
  bool holds(std::span<const Color> values) const;

  /// Every member pattern, by enumerating k^|F| colorings (|F| <= 16).
  std::vector<Pattern> expand() const;

 private:
  GroupBadEvent(Kind kind, GroupSet domain, std::uint32_t k) : kind_(kind), domain_(std::move(domain)), k_(k) {}

  Kind kind_;
  GroupSet domain_;
  std::uint32_t k_;
  std::vector<Pattern> patterns_;                 // ExplicitSet
  std::shared_ptr<const FrequencyDeviation> freq_;  // FrequencyDeviation
  std::vector<std::uint32_t> slots_;              // [i*|S|+j] = index of s_j d_i in F
  std::int64_t k_pow_s_ = 1;
};

/// B is not avoided by c at the identity placement. BoundaryError when c
/// does not cover F.
bool event_holds(const GroupBadEvent& b, const Config& c);

/// |B| / k^|F| by enumeration (|F| <= 16).
Rational event_probability_exhaustive(const GroupBadEvent& b);

/// B_x(Phi): the event on the points F.x of a finite action.
/// Keeps a pointer to `phi`, which must outlive the induced event.
class InducedEvent {
 public:
  InducedEvent(const GroupBadEvent& phi, const FiniteAction& action, Point x);

  Point anchor() const { return anchor_; }
  /// Distinct points of F.x, sorted.
  const std::vector<Point>& domain() const { return domain_; }
  /// pullback()[i] = position in domain() of f_i . x.
  const std::vector<std::uint32_t>& pullback() const { return pullback_; }

  /// Evaluated on a coloring of all points of the action.
  bool holds(std::span<const Color> coloring) const;

  /// Probability under uniform colorings of domain() by enumeration
  /// (|domain| <= 16). Below |Phi| / k^|F| when the action collapses F.x.
  Rational probability_exhaustive() const;

 private:
  const GroupBadEvent* phi_;
  Point anchor_;
  std::vector<Point> domain_;
  std::vector<std::uint32_t> pullback_;
};

InducedEvent induced_event(const GroupBadEvent& phi, const FiniteAction& action, Point x);

struct InstanceStats {
  double p_bound;
  std::uint64_t d_bound;
  bool d_exact;  // d from the exact difference set rather than the cap
  double slll_margin;
};

/// e * p * (d + 1) from the concentration bound p = 2 k^|S| exp(-eps^2 |D| / (2|S|^3)).
double slll_margin(double p_bound, double d_plus_one);

/// d = min(|(SD)^-1 SD| - 1, |S|^2 |D|^2 - 1), exact when affordable.
InstanceStats slll_stats(std::uint32_t k, const GroupSet& s, const Rational& eps, const GroupSet& d);

/// Stats with the closed-form degree cap only; depends on |S| and |D| alone.
InstanceStats slll_stats_generic(std::uint32_t k, std::size_t s_size, const Rational& eps, std::uint64_t d_size);

/// |(SD)^-1 SD| for sets of integers, by bitset.
std::uint64_t difference_set_size(const std::vector<std::int64_t>& sd);

enum class ThresholdShape { GenericCap, Interval, Random };

const char* to_string(ThresholdShape shape);

struct ThresholdResult {
  bool found = false;
  std::uint64_t m = 0;
  double stationary = 0;  // 4|S|^3 / eps^2
  double margin_at_m = 0;
  double margin_below = 0;  // margin at m - 1
  bool left_of_stationary = false;  // m - 1 lies left of the search start
};

/// Least m <= search_cap with slll_margin < 1 on the decreasing branch.
/// Interval: D = {0..m-1}; Random: D a seeded m-subset of {0..2m-1};
/// GenericCap: d = |S|^2 m^2 - 1. S must be a set of integers except for
/// GenericCap.
ThresholdResult find_slll_threshold(std::uint32_t k, const GroupSet& s, const Rational& eps, ThresholdShape shape,
                                    std::uint64_t search_cap, std::uint64_t seed = 1);

struct GLLLWitnessSpec {
  double a;
  double c = 0;  // 0: no tail certificate, the sequence is taken as finite

  static double default_rate(const Rational& eps, std::size_t s_size);
};

struct GlllRow {
  std::string inequality;  // small_sum | correct1 | correct2
  std::string n;  // index, "all" for sums, "tail" past the finite prefix
  double lhs;
  double rhs;
  double slack;  // >= 0 iff the inequality holds
  bool verdict;
};

struct GlllReport {
  std::vector<GlllRow> rows;
  double small_sum = 0;  // finite part
  double tail_bound = 0;  // sum_{m >= N} |D_m| omega_m / (1 - omega_m) upper bound

  bool ok() const;
  const GlllRow* first_failure() const;
  nlohmann::json to_json() const;
};

/// Upper bound on sum_{n >= start} ln(n+2) / (n+2)^q: exact prefix plus an
/// integral tail. Infinite when q <= 1.
double log_series_bound(double q, std::uint64_t start = 0);

/// Checks the GLLL witness omega(n) = exp(-a |D_n|) on the given sequence.
/// With spec.c > 0 the sequence continues past its end with
/// |D_n| >= C ln(n+2), and tail rows certify that continuation.
GlllReport glll_check(std::uint32_t k, const GroupSet& s, const Rational& eps, const std::vector<GroupSet>& d_seq,
                      const GLLLWitnessSpec& spec, double eps_sum);

/// Same with |D_n| and |SD_n| given as numbers.
GlllReport glll_check_sizes(std::uint32_t k, std::size_t s_size, const Rational& eps,
                            const std::vector<std::uint64_t>& d_sizes, const std::vector<std::uint64_t>& sd_sizes,
                            const GLLLWitnessSpec& spec, double eps_sum);

/// Smallest C (doubling, then bisection) meeting the sizing conditions for
/// D_n with |D_n| >= C ln(n+2).
double find_glll_constant(std::uint32_t k, std::size_t s_size, const Rational& eps, double a, double eps_sum);

/// p <= omega (1 - omega)^d for the standard witness omega = 1 / (d + 1).
struct StandardWitnessCheck {
  double lhs;
  double rhs;
  bool holds;
};
StandardWitnessCheck standard_witness_check(const InstanceStats& stats);

}  // namespace ergolab
