#include "ergolab/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "ergolab/error.hpp"
#include "ergolab/parallel.hpp"
#include "ergolab/rng.hpp"

namespace ergolab {

void ConcentrationBoundInput::validate() const {
  if (k < 1) throw UsageError("alphabet size must be >= 1");
  if (eps <= 0) throw UsageError("eps must be positive");
  if (s.empty() || d.empty()) throw UsageError("S and D must be nonempty");
  if (!(s.ctx() == d.ctx())) throw UsageError("S and D use different groups");
}

double scb_bound(double s, double b, double t) {
  if (s < 1 || b <= 0 || t < 0) throw UsageError("scb_bound needs s >= 1, b > 0, t >= 0");
  return 2.0 * std::exp(-t * t / (2.0 * b * b * s));
}

double concentration_bound(const ConcentrationBoundInput& in) {
  in.validate();
  const double e = to_double(in.eps);
  const double s = static_cast<double>(in.s.size());
  return 2.0 * std::exp(-e * e * static_cast<double>(in.d.size()) / (2.0 * s * s * s));
}

WilsonInterval wilson(std::uint64_t hits, std::uint64_t trials, double z) {
  if (hits > trials) throw UsageError("hits exceed trials");
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(hits) / n;
  const double z2 = z * z;
  const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n);
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

bool ExpectationCheck::within_3_sigma() const {
  // A zero-variance sample (e.g. every trial saw the same count) must hit
  // the expectation exactly, up to rounding.
  return std::abs(mean - expected) <= 3.0 * sigma + 1e-9 * std::max(1.0, expected);
}

bool DeviationReport::expectation_ok() const {
  return std::all_of(expectation.begin(), expectation.end(),
                     [](const ExpectationCheck& c) { return c.within_3_sigma(); });
}

namespace {

struct Accumulator {
  std::vector<std::uint64_t> hits;
  std::vector<std::uint64_t> sum;
  std::vector<std::uint64_t> sum_sq;
};

}  // namespace

DeviationReport mc_deviation_all(const ConcentrationBoundInput& in, const FiniteAction& action, Point x,
                                 std::uint64_t trials, std::uint64_t seed, unsigned jobs) {
  in.validate();
  if (!(in.s.ctx() == action.ctx())) throw UsageError("sets and action use different groups");
  if (trials == 0) throw UsageError("trials must be >= 1");
  for (const auto* set : {&in.s, &in.d}) {
    if (is_free_at(action, *set, x) == Freeness::NotFree) {
      throw PreconditionError("action is not (S,D)-free at the chosen point");
    }
  }
  const std::size_t s_size = in.s.size();
  const std::size_t d_size = in.d.size();
  const std::uint64_t patterns = int_pow(in.k, s_size);

  // slot[i * |S| + j] = local index of s_j delta_i . x within SD.x
  std::vector<Point> raw(d_size * s_size);
  const auto& ctx = action.ctx();
  for (std::size_t i = 0; i < d_size; ++i) {
    for (std::size_t j = 0; j < s_size; ++j) raw[i * s_size + j] = action.act_defined(ctx.op(in.s[j], in.d[i]), x);
  }
  std::vector<Point> support(raw);
  std::sort(support.begin(), support.end());
  support.erase(std::unique(support.begin(), support.end()), support.end());
  std::vector<std::uint32_t> slot(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    slot[i] = static_cast<std::uint32_t>(std::lower_bound(support.begin(), support.end(), raw[i]) - support.begin());
  }

  std::vector<char> bad(d_size + 1);
  for (std::size_t c = 0; c <= d_size; ++c) {
    bad[c] = deviates(static_cast<std::int64_t>(c), static_cast<std::int64_t>(d_size),
                      static_cast<std::int64_t>(patterns), in.eps);
  }

  // Fixed block count so the merge is independent of the thread count.
  const std::size_t blocks = std::min<std::uint64_t>(trials, 64);
  std::vector<Accumulator> acc(blocks, {std::vector<std::uint64_t>(patterns), std::vector<std::uint64_t>(patterns),
                                        std::vector<std::uint64_t>(patterns)});
  parallel_for(blocks, jobs, [&](std::size_t b) {
    auto& a = acc[b];
    std::vector<std::uint32_t> colors(support.size());
    std::vector<std::uint32_t> counts(patterns);
    const std::uint64_t lo = trials * b / blocks;
    const std::uint64_t hi = trials * (b + 1) / blocks;
    for (std::uint64_t t = lo; t < hi; ++t) {
      StreamRng rng(seed, t);
      for (auto& c : colors) c = rng.below(in.k);
      std::fill(counts.begin(), counts.end(), 0);
      for (std::size_t i = 0; i < d_size; ++i) {
        std::uint64_t code = 0;
        for (std::size_t j = s_size; j-- > 0;) code = code * in.k + colors[slot[i * s_size + j]];
        ++counts[code];
      }
      for (std::uint64_t p = 0; p < patterns; ++p) {
        a.hits[p] += bad[counts[p]];
        a.sum[p] += counts[p];
        a.sum_sq[p] += static_cast<std::uint64_t>(counts[p]) * counts[p];
      }
    }
  });

  DeviationReport report;
  const double n = static_cast<double>(trials);
  const double expected = static_cast<double>(d_size) / static_cast<double>(patterns);
  for (std::uint64_t p = 0; p < patterns; ++p) {
    McEstimate est{trials, 0};
    std::uint64_t sum = 0;
    std::uint64_t sum_sq = 0;
    for (const auto& a : acc) {
      est.hits += a.hits[p];
      sum += a.sum[p];
      sum_sq += a.sum_sq[p];
    }
    const double mean = static_cast<double>(sum) / n;
    const double var = trials > 1 ? std::max(0.0, (static_cast<double>(sum_sq) - n * mean * mean) / (n - 1)) : 0.0;
    report.per_pattern.push_back(est);
    report.expectation.push_back({mean, expected, std::sqrt(var / n)});
    if (est.hits > report.per_pattern[report.worst].hits) report.worst = p;
  }
  return report;
}

McEstimate mc_deviation_prob(const ConcentrationBoundInput& in, const FiniteAction& action, Point x,
                             const Pattern& phi, std::uint64_t trials, std::uint64_t seed, unsigned jobs) {
  if (!(phi.domain() == in.s)) throw UsageError("pattern domain must equal S");
  if (phi.k() != in.k) throw UsageError("pattern alphabet must equal k");
  return mc_deviation_all(in, action, x, trials, seed, jobs).per_pattern[phi.code()];
}

std::vector<SweepRow> concentration_sweep(const SweepSpec& spec, unsigned jobs) {
  const auto ctx = GroupCtx::integers();
  const auto action = FiniteAction::cyclic(ctx, spec.modulus);
  std::vector<SweepRow> rows;
  std::uint64_t index = 0;
  for (const auto k : spec.ks) {
    for (const auto s_size : spec.s_sizes) {
      for (const auto& eps : spec.epsilons) {
        for (const auto d_size : spec.d_sizes) {
          const ConcentrationBoundInput in{k, GroupSet::interval(ctx, 0, static_cast<std::int64_t>(s_size)), eps,
                                           GroupSet::interval(ctx, 0, static_cast<std::int64_t>(d_size))};
          const double bound = concentration_bound(in);
          const auto report = mc_deviation_all(in, action, 0, spec.trials, derive_seed(spec.seed, index++), jobs);
          const auto& est = report.worst_estimate();
          const auto ci = est.interval();
          rows.push_back({k, s_size, eps, d_size, bound, est, report.expectation_ok(), bound < 0.9,
                          ci.upper <= bound, ci.lower <= bound});
        }
      }
    }
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "k,s_size,eps,d_size,bound,estimate,wilson_lower,wilson_upper,expectation_ok,checked,"
         "upper_within_bound,verdict\n";
  for (const auto& r : rows) {
    const auto ci = r.estimate.interval();
    const char* verdict = !r.checked ? "vacuous" : (r.lower_within ? "pass" : "fail");
    out << r.k << ',' << r.s_size << ',' << to_double(r.eps) << ',' << r.d_size << ',' << r.reported_bound() << ','
        << r.estimate.estimate() << ',' << ci.lower << ',' << ci.upper << ',' << (r.expectation_ok ? 1 : 0) << ','
        << (r.checked ? 1 : 0) << ',' << (r.upper_within ? 1 : 0) << ',' << verdict << '\n';
  }
}

}  // namespace ergolab
