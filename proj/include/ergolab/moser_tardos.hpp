#pragma once

// Moser-Tardos resampling of bad events induced on a finite total action,
// driven by virtual per-point tapes.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "json.hpp"

#include "ergolab/action.hpp"
#include "ergolab/concentration.hpp"
#include "ergolab/lll.hpp"
#include "ergolab/rng.hpp"

namespace ergolab {

struct FamilyMember {
  std::uint64_t n;
  GroupBadEvent phi;
};

class EventFamily {
 public:
  EventFamily() = default;

  /// Indices must be distinct.
  void add(std::uint64_t n, GroupBadEvent phi);

  const std::vector<FamilyMember>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }

 private:
  std::vector<FamilyMember> members_;
};

struct EventRef {
  std::uint32_t member;  // position in the family
  Point anchor;
  friend auto operator<=>(const EventRef&, const EventRef&) = default;
};

struct TranscriptStep {
  std::uint64_t step;
  std::vector<EventRef> selected;
  std::size_t resampled_points;
};

struct MTOptions {
  std::uint64_t max_steps = 0;  // 0: 1000 x number of induced events
  bool check_maximality = false;
  bool transcript = false;
};

struct MTResult {
  std::vector<Color> g;
  std::vector<std::uint32_t> t;
  std::vector<std::vector<std::uint32_t>> ind;  // [member][anchor]
  std::uint64_t steps = 0;
  bool converged = false;
  std::vector<EventRef> defect;  // violated events left when not converged
  std::vector<TranscriptStep> transcript;

  nlohmann::json summary(const EventFamily& family) const;
};

/// Runs the resampling process until no induced event is violated or
/// max_steps rounds have run. Throws PreconditionError when the action is
/// not total or some F_n (and S, D for frequency events) is not free.
MTResult run_mt(const FiniteAction& action, const EventFamily& family, const TapeSpace& tape,
                const MTOptions& options = {});

void write_transcript(std::ostream& out, const MTResult& result, const EventFamily& family);

/// Anchors x whose pulled-back coloring lies in Phi, sorted.
std::vector<Point> defect(std::span<const Color> g, const GroupBadEvent& phi, const FiniteAction& action);

/// F . Def(g, Phi): the union of the domains of the violated induced events.
std::vector<Point> translated_defect(std::span<const Color> g, const GroupBadEvent& phi, const FiniteAction& action);

/// Compares translated_defect with a pointwise evaluation of every induced
/// event through each of its points.
bool check_two_defects(std::span<const Color> g, const GroupBadEvent& phi, const FiniteAction& action);

struct IndexRow {
  std::uint64_t n;
  std::uint64_t total_ind;
  std::uint64_t anchors;
  std::uint32_t max_ind;
  double omega;

  double mean() const { return anchors ? static_cast<double>(total_ind) / static_cast<double>(anchors) : 0.0; }
  double bound() const { return omega / (1.0 - omega); }
  /// 95% upper confidence bound on the mean index: Wilson when every index
  /// is 0 or 1, normal otherwise.
  double upper(double sum_sq = 0) const;
};

/// Per-member index totals of one run; omegas follow the family order.
std::vector<IndexRow> index_report(const MTResult& result, const EventFamily& family, std::span<const double> omegas);

/// Sums the rows of several runs of the same family.
std::vector<IndexRow> aggregate_index(const std::vector<std::vector<IndexRow>>& runs);

struct ResampleFraction {
  double t_positive;    // fraction of points with t(p) >= 1
  double g_changed;     // fraction with g(p) != symbol(p, 0)
  std::uint64_t t_positive_count;
  std::uint64_t points;
};

ResampleFraction resample_fraction(const MTResult& result, const TapeSpace& tape);

/// sum_n |F_n| omega_n / (1 - omega_n).
double resample_bound(const EventFamily& family, std::span<const double> omegas);

/// t(p) == sum_n sum_{f in F_n} Ind(n, f^-1 . p) for every point; returns
/// the number of points where it fails.
std::uint64_t ledger_mismatches(const MTResult& result, const EventFamily& family, const FiniteAction& action);

}  // namespace ergolab
