#include "ergolab/ergodic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <ostream>

#include "ergolab/concentration.hpp"
#include "ergolab/error.hpp"
#include "ergolab/parallel.hpp"
#include "ergolab/rng.hpp"

namespace ergolab {

namespace {

std::vector<std::int64_t> integer_values(const GroupSet& set) {
  if (set.ctx().kind() != GroupKind::Integers) throw UsageError("expected a set of integers, got " + set.ctx().name());
  std::vector<std::int64_t> out;
  out.reserve(set.size());
  for (const auto& g : set) out.push_back(g.value());
  return out;
}

std::int64_t abs_diff(std::int64_t count, std::int64_t size, std::int64_t k_pow_s) {
  const std::int64_t v = count * k_pow_s - size;
  return v < 0 ? -v : v;
}

}  // namespace

AveragingSequence AveragingSequence::log_growth(double c) {
  if (!(c > 0)) throw UsageError("growth constant must be positive");
  AveragingSequence seq;
  seq.c_ = c;
  return seq;
}

AveragingSequence AveragingSequence::explicit_sets(std::vector<GroupSet> sets) {
  if (sets.empty()) throw UsageError("explicit averaging sequence is empty");
  for (const auto& d : sets) {
    if (d.empty()) throw UsageError("averaging sets must be nonempty");
  }
  AveragingSequence seq;
  seq.explicit_ = std::move(sets);
  return seq;
}

std::size_t AveragingSequence::size(std::uint64_t n) const {
  if (is_log_growth()) {
    return static_cast<std::size_t>(std::ceil(c_ * std::log(static_cast<double>(n) + 2.0)));
  }
  return realize(n).size();
}

GroupSet AveragingSequence::realize(std::uint64_t n) const {
  if (is_log_growth()) return GroupSet::interval(GroupCtx::integers(), 0, static_cast<std::int64_t>(size(n)));
  if (n >= explicit_.size()) throw UsageError("averaging sequence has only " + std::to_string(explicit_.size()) + " sets");
  return explicit_[n];
}

std::uint64_t AveragingSequence::length() const {
  return is_log_growth() ? std::numeric_limits<std::uint64_t>::max() : explicit_.size();
}

bool ConvergenceReport::all_within() const {
  return std::all_of(rows.begin(), rows.end(), [](const ConvergenceRow& r) { return r.within(); });
}

void ConvergenceReport::write_csv(std::ostream& out) const {
  out << "n,d_size,worst_dev,exceed_frac,bc_tail,sigma,exceed_frac_union,bc_tail_union,within\n";
  for (const auto& r : rows) {
    out << r.n << ',' << r.d_size << ',' << to_double(r.worst_dev) << ',' << r.exceed_frac << ',' << r.bc_tail << ','
        << r.sigma << ',' << r.exceed_frac_union << ',' << r.bc_tail * static_cast<double>(patterns) << ','
        << (r.within() ? 1 : 0) << '\n';
  }
}

ConvergenceReport ergodic_convergence_experiment(std::uint32_t k, const GroupSet& s, const Rational& eps,
                                                 const AveragingSequence& seq, std::uint64_t n_max,
                                                 std::uint64_t samples, std::uint64_t seed, unsigned jobs) {
  if (k < 1) throw UsageError("alphabet size must be >= 1");
  if (eps <= 0) throw UsageError("eps must be positive");
  if (samples == 0) throw UsageError("samples must be >= 1");
  if (n_max >= seq.length()) throw UsageError("n_max runs past the end of the averaging sequence");
  const auto s_vals = integer_values(s);
  if (s_vals.empty()) throw UsageError("S must be nonempty");
  const std::size_t s_size = s_vals.size();
  const std::uint64_t patterns = int_pow(k, s_size);
  const auto k_pow_s = static_cast<std::int64_t>(patterns);

  std::vector<std::vector<std::int64_t>> d_vals(n_max + 1);
  std::int64_t lo = std::numeric_limits<std::int64_t>::max();
  std::int64_t hi = std::numeric_limits<std::int64_t>::min();
  for (std::uint64_t n = 0; n <= n_max; ++n) {
    d_vals[n] = integer_values(seq.realize(n));
    lo = std::min(lo, s_vals.front() + d_vals[n].front());
    hi = std::max(hi, s_vals.back() + d_vals[n].back());
  }
  const auto width = static_cast<std::size_t>(hi - lo + 1);
  if (width > (std::size_t{1} << 28)) throw UsageError("sampling window too large");

  // Per sample: the last n at which each pattern deviated (-1: never) and
  // the largest |count k^s - |D_n|| at every n.
  std::vector<std::vector<std::int64_t>> last(samples, std::vector<std::int64_t>(patterns, -1));
  std::vector<std::vector<std::int64_t>> worst(samples, std::vector<std::int64_t>(n_max + 1, 0));
  parallel_for(samples, jobs, [&](std::size_t i) {
    StreamRng rng(seed, i);
    std::vector<Color> colors(width);
    for (auto& c : colors) c = rng.below(k);
    std::vector<std::int64_t> counts(patterns);
    for (std::uint64_t n = 0; n <= n_max; ++n) {
      std::fill(counts.begin(), counts.end(), 0);
      for (const auto delta : d_vals[n]) {
        std::uint64_t code = 0;
        for (std::size_t j = s_size; j-- > 0;) code = code * k + colors[static_cast<std::size_t>(s_vals[j] + delta - lo)];
        ++counts[code];
      }
      const auto d_size = static_cast<std::int64_t>(d_vals[n].size());
      for (std::uint64_t p = 0; p < patterns; ++p) {
        worst[i][n] = std::max(worst[i][n], abs_diff(counts[p], d_size, k_pow_s));
        if (deviates(counts[p], d_size, k_pow_s, eps)) last[i][p] = static_cast<std::int64_t>(n);
      }
    }
  });

  ConvergenceReport report;
  report.samples = samples;
  report.patterns = patterns;
  const double e = to_double(eps);
  const double s3 = std::pow(static_cast<double>(s_size), 3);
  std::vector<double> tail(n_max + 2, 0.0);
  for (std::uint64_t n = n_max + 1; n-- > 0;) {
    tail[n] = tail[n + 1] + 2.0 * std::exp(-e * e * static_cast<double>(d_vals[n].size()) / (2.0 * s3));
  }
  std::int64_t last_any = -1;
  for (std::uint64_t i = 0; i < samples; ++i) {
    for (const auto v : last[i]) last_any = std::max(last_any, v);
  }
  report.first_quiet_n = static_cast<std::uint64_t>(last_any + 1);
  const double ns = static_cast<double>(samples);
  for (std::uint64_t n = 0; n <= n_max; ++n) {
    const auto signed_n = static_cast<std::int64_t>(n);
    std::int64_t max_diff = 0;
    std::uint64_t any = 0;
    std::vector<std::uint64_t> per_phi(patterns, 0);
    for (std::uint64_t i = 0; i < samples; ++i) {
      max_diff = std::max(max_diff, worst[i][n]);
      bool hit = false;
      for (std::uint64_t p = 0; p < patterns; ++p) {
        if (last[i][p] >= signed_n) {
          ++per_phi[p];
          hit = true;
        }
      }
      any += hit;
    }
    const auto d_size = static_cast<std::int64_t>(d_vals[n].size());
    const double b = std::min(tail[n], 1.0);
    report.rows.push_back({n, d_vals[n].size(), Rational(max_diff, d_size * k_pow_s),
                           static_cast<double>(*std::max_element(per_phi.begin(), per_phi.end())) / ns,
                           static_cast<double>(any) / ns, tail[n], std::sqrt(b * (1 - b) / ns)});
  }
  return report;
}

PointwiseDeviation pointwise_deviation(std::span<const Color> g, std::uint32_t k, const GroupSet& s,
                                       const Rational& eps, const GroupSet& d, const FiniteAction& action) {
  const std::uint64_t patterns = int_pow(k, s.size());
  const auto k_pow_s = static_cast<std::int64_t>(patterns);
  const auto codes = pattern_codes(action, s, g, k);
  const auto counts = anchor_counts(action, d, codes, patterns);
  const auto d_size = static_cast<std::int64_t>(d.size());
  std::int64_t max_diff = 0;
  std::uint64_t violating = 0;
  for (std::size_t x = 0; x < action.size(); ++x) {
    bool bad = false;
    for (std::uint64_t p = 0; p < patterns; ++p) {
      const std::int64_t c = counts[x * patterns + p];
      max_diff = std::max(max_diff, abs_diff(c, d_size, k_pow_s));
      bad = bad || deviates(c, d_size, k_pow_s, eps);
    }
    violating += bad;
  }
  return {Rational(max_diff, d_size * k_pow_s), violating};
}

bool UniformDiscrepancyResult::all_within() const {
  return run.converged && !per_n.empty() &&
         std::all_of(per_n.begin(), per_n.end(), [](const PointwiseDeviation& p) { return p.violating_points == 0; });
}

UniformDiscrepancyResult uniform_discrepancy_experiment(std::uint32_t k, const GroupSet& s, const Rational& eps,
                                                        const AveragingSequence& seq, std::uint64_t n_max,
                                                        const FiniteAction& action, std::uint64_t seed,
                                                        const DiscrepancyOptions& options) {
  if (n_max >= seq.length()) throw UsageError("n_max runs past the end of the averaging sequence");
  UniformDiscrepancyResult r;
  std::vector<GroupSet> ds;
  for (std::uint64_t n = 0; n <= n_max; ++n) {
    ds.push_back(seq.realize(n));
    r.family.add(n, GroupBadEvent::frequency_deviation({k, s, eps, ds.back()}));
  }
  const double a = options.a > 0 ? options.a : GLLLWitnessSpec::default_rate(eps, s.size());
  const double eps_sum = options.eps_sum > 0 ? options.eps_sum : to_double(eps);
  for (const auto& d : ds) r.omegas.push_back(std::exp(-a * static_cast<double>(d.size())));

  r.slll = slll_stats(k, s, eps, ds.front());
  r.glll = glll_check(k, s, eps, ds, {a, 0}, eps_sum);
  if (ds.size() == 1 && r.slll.slll_margin < 1) {
    r.certified = true;
    r.certificate = "slll";
  } else if (r.glll.ok()) {
    r.certified = true;
    r.certificate = "glll";
  } else {
    r.certificate = "none";
    const auto* f = r.glll.first_failure();
    r.warning = "no local lemma certificate (" + f->inequality + " at n=" + f->n + ", slack " +
                std::to_string(f->slack) + "); results are not covered by the theorem";
  }

  r.run = run_mt(action, r.family, TapeSpace(seed, k), {options.max_steps, false, options.transcript});
  if (r.run.converged) {
    for (const auto& d : ds) r.per_n.push_back(pointwise_deviation(r.run.g, k, s, eps, d, action));
  }
  r.fraction = resample_fraction(r.run, TapeSpace(seed, k));
  r.resample_budget = resample_bound(r.family, r.omegas);
  return r;
}

bool ResfinReport::all_invariant() const {
  return std::all_of(rows.begin(), rows.end(), [](const ResfinRow& r) { return r.shift_invariant; });
}

Rational resfin_cylinder(std::uint32_t k, std::int64_t n, const Pattern& phi) {
  if (phi.domain().ctx().kind() != GroupKind::Integers) throw UsageError("periodic measures are defined on Z only");
  if (n < 1) throw UsageError("period must be >= 1");
  std::map<std::int64_t, Color> by_residue;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const std::int64_t r = ((phi.domain()[i].value() % n) + n) % n;
    const auto [it, fresh] = by_residue.emplace(r, phi.values()[i]);
    if (!fresh && it->second != phi.values()[i]) return 0;
  }
  return {1, static_cast<std::int64_t>(int_pow(k, by_residue.size()))};
}

ResfinReport resfin_measure(std::uint32_t k, std::int64_t n, const std::vector<Pattern>& patterns) {
  ResfinReport report{k, n, {}};
  const auto ctx = GroupCtx::integers();
  for (const auto& phi : patterns) {
    if (phi.k() != k) throw UsageError("pattern alphabet differs from k");
    const Rational v = resfin_cylinder(k, n, phi);
    std::set<std::int64_t> residues;
    for (const auto& g : phi.domain()) residues.insert(((g.value() % n) + n) % n);
    const bool invariant = resfin_cylinder(k, n, shift_pattern(phi, ctx.integer(1))) == v &&
                           resfin_cylinder(k, n, shift_pattern(phi, ctx.integer(-1))) == v;
    report.rows.push_back({phi, v, residues.size(), invariant});
  }
  return report;
}

bool ApproxInvariantResult::within() const { return run.converged && worst_shift_dev < eps; }

ApproxInvariantResult approx_invariant_measure(std::uint32_t k, const GroupSet& s, const Rational& eps,
                                               const GroupSet& d, std::int64_t m, std::uint64_t seed,
                                               std::int64_t shift_range) {
  if (shift_range < 1) throw UsageError("shift range must be >= 1");
  const auto stats = slll_stats(k, s, eps, d);
  if (!(stats.slll_margin < 1)) {
    throw PreconditionError("no SLLL certificate: slll_margin = " + std::to_string(stats.slll_margin) + " >= 1");
  }
  const auto action = FiniteAction::cyclic(s.ctx(), m);
  EventFamily family;
  family.add(0, GroupBadEvent::frequency_deviation({k, s, eps, d}));
  ApproxInvariantResult r{run_mt(action, family, TapeSpace(seed, k)), 0, 0, 0, eps};
  r.support_size = empirical_measure(0, d, action).atoms.size();

  const std::uint64_t patterns = int_pow(k, s.size());
  const auto k_pow_s = static_cast<std::int64_t>(patterns);
  const auto codes = pattern_codes(action, s, r.run.g, k);
  const auto counts = anchor_counts(action, d, codes, patterns);
  const auto d_size = static_cast<std::int64_t>(d.size());
  std::int64_t max_diff = -1;
  for (std::int64_t gamma = 0; gamma < shift_range; ++gamma) {
    const auto x = static_cast<std::size_t>(gamma % m);
    for (std::uint64_t p = 0; p < patterns; ++p) {
      const auto diff = abs_diff(counts[x * patterns + p], d_size, k_pow_s);
      if (diff > max_diff) {
        max_diff = diff;
        r.worst_shift = gamma;
      }
    }
  }
  r.worst_shift_dev = Rational(max_diff, d_size * k_pow_s);
  return r;
}

}  // namespace ergolab
