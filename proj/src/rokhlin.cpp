#include "ergolab/rokhlin.hpp"

#include <algorithm>
#include <bit>
#include <ostream>

#include "ergolab/error.hpp"
#include "ergolab/parallel.hpp"
#include "ergolab/rng.hpp"

namespace ergolab {

namespace {

bool plan_inequalities_hold(const Rational& eps, std::int64_t n) {
  const Rational first(2, n + 1);
  const Rational second = (Rational(1) - eps / 2) * Rational(n, n + 1);
  return first < eps && second > Rational(1) - eps;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

std::int64_t ceil_two_over(const Rational& eps) {
  // ceil(2 / eps) for eps = p / q is ceil(2q / p).
  return ceil_div(2 * eps.denominator(), eps.numerator());
}

// run[y] = length (capped at cap) of the run of members starting at y on Z/M.
std::vector<std::uint32_t> run_lengths(const std::vector<char>& member, std::uint32_t cap) {
  const std::size_t m = member.size();
  std::vector<std::uint32_t> run(m, 0);
  std::uint32_t cur = 0;
  // Two backward passes so runs wrap around the end of Z/M.
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t y = m; y-- > 0;) {
      cur = member[y] ? std::min(cap, cur + 1) : 0;
      run[y] = cur;
    }
  }
  return run;
}

}  // namespace

std::uint64_t minimal_tower_count(const Rational& eps) {
  if (eps <= 0 || eps >= 1) throw UsageError("tower plans need 0 < eps < 1");
  // Both inequalities only get easier as N grows.
  std::int64_t hi = 1;
  while (!plan_inequalities_hold(eps, hi)) {
    hi *= 2;
    if (hi > (std::int64_t{1} << 40)) throw UsageError("eps too small for a tower plan");
  }
  std::int64_t lo = hi / 2;  // fails, or 0
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    (plan_inequalities_hold(eps, mid) ? hi : lo) = mid;
  }
  return static_cast<std::uint64_t>(hi);
}

BadIntervalPlan plan_intervals(const std::function<std::uint64_t(std::uint64_t)>& h, const Rational& eps) {
  const std::uint64_t n = minimal_tower_count(eps);
  std::uint64_t ell = 0;
  for (std::uint64_t i = 0; i < n; ++i) ell = std::max(ell, h(i));
  if (ell == 0) throw UsageError("h must be positive");
  const auto sn = static_cast<std::int64_t>(n);
  return {eps, n, ell, eps - Rational(2, sn + 1), (Rational(1) - eps / 2) * Rational(sn, sn + 1) - (Rational(1) - eps)};
}

BadIntervalPlan plan_intervals(const std::vector<std::uint64_t>& h, const Rational& eps) {
  const std::uint64_t n = minimal_tower_count(eps);
  if (h.size() < n) {
    throw UsageError("h table has " + std::to_string(h.size()) + " entries, the plan needs " + std::to_string(n));
  }
  return plan_intervals([&](std::uint64_t i) { return h[i]; }, eps);
}

std::int64_t TowerSystem::level(std::int64_t x) const {
  const std::int64_t y = ((x - offset) % m + m) % m;
  return y < copies * height ? y % height : -1;
}

bool TowerSystem::translates_disjoint() const {
  std::vector<char> seen(static_cast<std::size_t>(m), 0);
  for (std::int64_t j = 0; j < copies; ++j) {
    for (std::int64_t i = 0; i < height; ++i) {
      auto& s = seen[static_cast<std::size_t>((offset + j * height + i) % m)];
      if (s) return false;
      s = 1;
    }
  }
  return true;
}

TowerBuild build_tower(const BadIntervalPlan& plan, std::int64_t m, std::int64_t offset) {
  const auto height = static_cast<std::int64_t>(plan.height());
  const std::int64_t needed = height * ceil_two_over(plan.eps);
  if (m < needed) throw UsageError("M = " + std::to_string(m) + " is too small, the tower needs M >= " + std::to_string(needed));
  TowerBuild b{{m, height, m / height, ((offset % m) + m) % m, m - (m / height) * height}, {}, {}, 0, 0};
  b.in_a.assign(static_cast<std::size_t>(m), 0);
  b.in_b.assign(static_cast<std::size_t>(m), 0);
  std::int64_t count_a = 0;
  std::int64_t count_b = 0;
  for (std::int64_t x = 0; x < m; ++x) {
    const std::int64_t lev = b.tower.level(x);
    if (lev < 0) continue;
    const auto ul = static_cast<std::uint64_t>(lev);
    if (ul >= plan.a_lo() && ul < plan.a_hi()) {
      b.in_a[static_cast<std::size_t>(x)] = 1;
      ++count_a;
    }
    if (ul < plan.b_hi()) {
      b.in_b[static_cast<std::size_t>(x)] = 1;
      ++count_b;
    }
  }
  b.mu_a = Rational(count_a, m);
  b.mu_b = Rational(count_b, m);
  return b;
}

void TowerBuild::write_level_csv(std::ostream& out, const BadIntervalPlan& plan) const {
  out << "level,in_a,in_b,points\n";
  for (std::uint64_t lev = 0; lev < plan.height(); ++lev) {
    out << lev << ',' << (lev >= plan.a_lo() && lev < plan.a_hi() ? 1 : 0) << ',' << (lev < plan.b_hi() ? 1 : 0) << ','
        << tower.copies << '\n';
  }
  out << "residual,0,0," << tower.residual << '\n';
}

CaptureReport verify_capture(const TowerBuild& build, const BadIntervalPlan& plan) {
  const std::int64_t m = build.tower.m;
  const auto ell = static_cast<std::uint32_t>(plan.ell);
  const auto run = run_lengths(build.in_a, ell);
  CaptureReport r;
  r.witness.assign(static_cast<std::size_t>(m), -1);
  r.all_b_captured = true;
  r.reverified = true;
  for (std::int64_t x = 0; x < m; ++x) {
    for (std::uint64_t n = 0; n < plan.n; ++n) {
      if (run[static_cast<std::size_t>((x + plan.interval_lo(n)) % m)] >= ell) {
        r.witness[static_cast<std::size_t>(x)] = static_cast<std::int32_t>(n);
        break;
      }
    }
    const auto w = r.witness[static_cast<std::size_t>(x)];
    if (w >= 0) {
      ++r.captured;
      for (std::uint64_t t = 0; t < plan.ell; ++t) {
        const auto y = static_cast<std::size_t>((x + plan.interval_lo(static_cast<std::uint64_t>(w)) + static_cast<std::int64_t>(t)) % m);
        if (!build.in_a[y]) r.reverified = false;
      }
    } else if (build.in_b[static_cast<std::size_t>(x)]) {
      r.all_b_captured = false;
    }
  }
  r.fraction = Rational(r.captured, m);
  return r;
}

nlohmann::json BadSequenceReport::to_json() const {
  nlohmann::json bands_json = nlohmann::json::array();
  for (const auto& b : bands) {
    bands_json.push_back({{"i", b.i},
                          {"eps", to_string(b.eps)},
                          {"n_lo", b.n_lo},
                          {"n_count", b.n_count},
                          {"ell", b.ell},
                          {"offset", b.offset},
                          {"mu_a", to_string(b.mu_a)},
                          {"mu_b", to_string(b.mu_b)},
                          {"capture_own", to_double(b.capture_own)},
                          {"limsup_hit", to_double(b.limsup_hit)},
                          {"liminf_hit", to_double(b.liminf_hit)}});
  }
  nlohmann::json mu = nlohmann::json::array();
  for (const auto& v : mu_a_geq) mu.push_back(to_string(v));
  return {{"m", m},
          {"k_probe", k_probe},
          {"bands", bands_json},
          {"mu_a_geq", mu},
          {"all_bands_limsup", to_double(all_bands_limsup)},
          {"last_band_limsup", to_double(last_band_limsup)},
          {"liminf_construction", "interpretation: L_k is the complement of A_{>=k}"}};
}

BadSequenceReport bad_sequence_experiment(const BadSequenceSpec& spec, unsigned jobs) {
  if (spec.i_max > 30) throw UsageError("i_max must be <= 30");
  if (spec.k_probe > spec.i_max) throw UsageError("k_probe must be <= i_max");
  const auto h = spec.h ? spec.h : [](std::uint64_t n) { return static_cast<std::uint64_t>(std::bit_width(n + 1)); };
  const std::size_t bands = spec.i_max + 1;

  std::vector<BadIntervalPlan> plans;
  std::vector<std::uint64_t> n_lo;
  std::uint64_t next = 0;
  std::int64_t needed = 0;
  for (std::uint64_t i = 0; i < bands; ++i) {
    const Rational eps(1, std::int64_t{1} << (i + 1));
    const std::uint64_t start = next;
    plans.push_back(plan_intervals([&](std::uint64_t n) { return h(start + n); }, eps));
    n_lo.push_back(start);
    next += plans.back().n;
    needed = std::max(needed, static_cast<std::int64_t>(plans.back().height()) * ceil_two_over(eps));
  }
  const std::int64_t m = spec.m ? spec.m : 2 * needed + 1;

  BadSequenceReport report;
  report.m = m;
  report.k_probe = spec.k_probe;
  StreamRng rng(spec.seed, 0);
  std::vector<TowerBuild> builds;
  std::vector<std::uint32_t> mask(static_cast<std::size_t>(m), 0);
  for (std::uint64_t i = 0; i < bands; ++i) {
    const auto offset = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(m));
    builds.push_back(build_tower(plans[i], m, offset));
    for (std::size_t x = 0; x < mask.size(); ++x) {
      if (builds.back().in_a[x]) mask[x] |= std::uint32_t{1} << i;
    }
  }
  for (std::uint64_t k = 0; k < bands; ++k) {
    const auto count = std::count_if(mask.begin(), mask.end(), [k](std::uint32_t v) { return (v >> k) != 0; });
    report.mu_a_geq.emplace_back(static_cast<std::int64_t>(count), m);
  }

  std::vector<char> in_geq(mask.size());
  for (std::size_t x = 0; x < mask.size(); ++x) in_geq[x] = (mask[x] >> spec.k_probe) != 0;
  std::vector<char> hit_all(mask.size(), 1);
  std::vector<char> hit_last(mask.size(), 0);
  for (std::uint64_t i = 0; i < bands; ++i) {
    const auto& plan = plans[i];
    const auto ell = static_cast<std::uint32_t>(plan.ell);
    const auto run_own = run_lengths(builds[i].in_a, ell);
    const auto run_geq = run_lengths(in_geq, ell);
    std::vector<char> own(mask.size(), 0);
    std::vector<char> geq(mask.size(), 0);
    parallel_for(mask.size(), jobs, [&](std::size_t x) {
      for (std::uint64_t n = 0; n < plan.n && !(own[x] && geq[x]); ++n) {
        const auto y = static_cast<std::size_t>((static_cast<std::int64_t>(x) + plan.interval_lo(n)) % m);
        if (run_own[y] >= ell) own[x] = 1;
        if (run_geq[y] >= ell) geq[x] = 1;
      }
    });
    const auto own_count = std::count(own.begin(), own.end(), 1);
    const auto geq_count = std::count(geq.begin(), geq.end(), 1);
    if (i >= spec.k_probe) {
      for (std::size_t x = 0; x < mask.size(); ++x) hit_all[x] &= geq[x];
    }
    if (i + 1 == bands) hit_last = geq;
    // The average of 1_{L_k} over D_n . x is 0 exactly when D_n . x lies in
    // A_{>=k}, so the liminf count coincides with the limsup count.
    report.bands.push_back({i, plan.eps, n_lo[i], plan.n, plan.ell, builds[i].tower.offset, builds[i].mu_a,
                            builds[i].mu_b, Rational(static_cast<std::int64_t>(own_count), m),
                            Rational(static_cast<std::int64_t>(geq_count), m),
                            Rational(static_cast<std::int64_t>(geq_count), m)});
  }
  report.all_bands_limsup = Rational(static_cast<std::int64_t>(std::count(hit_all.begin(), hit_all.end(), 1)), m);
  report.last_band_limsup = Rational(static_cast<std::int64_t>(std::count(hit_last.begin(), hit_last.end(), 1)), m);
  return report;
}

}  // namespace ergolab
