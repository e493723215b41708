#pragma once

// Experiments on pattern frequencies along averaging sequences: almost-sure
// convergence for random configurations, uniform frequencies for resampled
// colorings of finite actions, periodic measures from finite quotients of Z
// and approximately invariant measures built from orbits.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ergolab/action.hpp"
#include "ergolab/group.hpp"
#include "ergolab/lll.hpp"
#include "ergolab/moser_tardos.hpp"
#include "ergolab/rational.hpp"
#include "ergolab/shift_space.hpp"

namespace ergolab {

class AveragingSequence {
 public:
  /// D_n = {0, ..., ceil(C ln(n+2)) - 1} in Z.
  static AveragingSequence log_growth(double c);
  static AveragingSequence explicit_sets(std::vector<GroupSet> sets);

  bool is_log_growth() const { return explicit_.empty(); }
  double growth_constant() const { return c_; }
  std::size_t size(std::uint64_t n) const;
  GroupSet realize(std::uint64_t n) const;
  /// Explicit sequences end; log-growth ones do not.
  std::uint64_t length() const;

 private:
  double c_ = 0;
  std::vector<GroupSet> explicit_;
};

struct ConvergenceRow {
  std::uint64_t n;
  std::size_t d_size;
  Rational worst_dev;         // over samples and patterns at this n
  double exceed_frac;         // max over phi of P(phi deviates at some m in [n, n_max])
  double exceed_frac_union;   // P(some phi deviates at some m in [n, n_max])
  double bc_tail;             // sum_{m=n}^{n_max} 2 exp(-eps^2 |D_m| / (2|S|^3))
  double sigma;               // sqrt(b (1 - b) / samples), b = min(bc_tail, 1)

  bool within() const { return exceed_frac <= bc_tail + 3.0 * sigma; }
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  std::uint64_t samples = 0;
  std::uint64_t patterns = 0;
  /// Least n from which no sample deviates again (n_max + 1 if none).
  std::uint64_t first_quiet_n = 0;

  bool all_within() const;
  void write_csv(std::ostream& out) const;
};

/// Samples i.i.d. uniform configurations on the window S D_0 u ... u S D_nmax
/// (sample i from stream (seed, i)) and tracks pattern frequencies along
/// the sequence. S and every D_n must be sets of integers.
ConvergenceReport ergodic_convergence_experiment(std::uint32_t k, const GroupSet& s, const Rational& eps,
                                                 const AveragingSequence& seq, std::uint64_t n_max,
                                                 std::uint64_t samples, std::uint64_t seed, unsigned jobs = 1);

/// Worst |freq - k^-|S|| over all points of a total action and all patterns,
/// and whether every point stays strictly within eps.
struct PointwiseDeviation {
  Rational worst;
  std::uint64_t violating_points;
};
PointwiseDeviation pointwise_deviation(std::span<const Color> g, std::uint32_t k, const GroupSet& s,
                                       const Rational& eps, const GroupSet& d, const FiniteAction& action);

struct DiscrepancyOptions {
  double a = 0;         // witness rate; 0 picks eps^2 / (4|S|^3)
  double eps_sum = 0;   // resample budget; 0 picks eps
  std::uint64_t max_steps = 0;
  bool transcript = false;
};

struct UniformDiscrepancyResult {
  EventFamily family;
  MTResult run;
  InstanceStats slll;            // of the single event when the family has one member
  GlllReport glll;               // truncated family, no tail
  bool certified = false;
  std::string certificate;       // "slll", "glll" or "none"
  std::string warning;
  std::vector<PointwiseDeviation> per_n;  // empty unless converged
  ResampleFraction fraction{};
  double resample_budget = 0;    // sum_n |SD_n| omega_n / (1 - omega_n)
  std::vector<double> omegas;

  bool all_within() const;
};

/// Resamples the family (Phi(k, S, eps, D_n))_{n <= n_max} on a total action
/// and checks every point afterwards. Without a certificate it still runs
/// and sets `warning`.
UniformDiscrepancyResult uniform_discrepancy_experiment(std::uint32_t k, const GroupSet& s, const Rational& eps,
                                                        const AveragingSequence& seq, std::uint64_t n_max,
                                                        const FiniteAction& action, std::uint64_t seed,
                                                        const DiscrepancyOptions& options = {});

struct ResfinRow {
  Pattern phi;
  Rational value;     // nu_{k,n}(Omega(phi))
  std::size_t residues;  // distinct residues mod n hit by dom(phi)
  bool shift_invariant;
};

struct ResfinReport {
  std::uint32_t k;
  std::int64_t n;
  std::vector<ResfinRow> rows;
  bool all_invariant() const;
};

/// Cylinder values of the uniform measure on n-periodic configurations of Z.
Rational resfin_cylinder(std::uint32_t k, std::int64_t n, const Pattern& phi);
ResfinReport resfin_measure(std::uint32_t k, std::int64_t n, const std::vector<Pattern>& patterns);

struct ApproxInvariantResult {
  MTResult run;
  std::size_t support_size;
  Rational worst_shift_dev;       // over shifts and patterns
  std::int64_t worst_shift;
  bool within() const;
  Rational eps;
};

/// Resamples the single event Phi(k, S, eps, D) on Z/M, takes
/// nu = M_D pi_g(0) and checks the cylinder values of its shifts by
/// 0..shift_range-1. PreconditionError without an SLLL certificate.
ApproxInvariantResult approx_invariant_measure(std::uint32_t k, const GroupSet& s, const Rational& eps,
                                               const GroupSet& d, std::int64_t m, std::uint64_t seed,
                                               std::int64_t shift_range);

}  // namespace ergolab
