#include "ergolab/lll.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ergolab/error.hpp"
#include "ergolab/rng.hpp"

namespace ergolab {

namespace {

constexpr std::uint64_t kEnumerationCap = std::uint64_t{1} << 24;

std::vector<std::int64_t> integer_values(const GroupSet& set) {
  if (set.ctx().kind() != GroupKind::Integers) throw UsageError("expected a set of integers, got " + set.ctx().name());
  std::vector<std::int64_t> out;
  out.reserve(set.size());
  for (const auto& g : set) out.push_back(g.value());
  return out;
}

double log_concentration(std::uint32_t k, std::size_t s_size, const Rational& eps, double d_size) {
  const double e = to_double(eps);
  const double s = static_cast<double>(s_size);
  return std::log(2.0) + s * std::log(static_cast<double>(k)) - e * e * d_size / (2.0 * s * s * s);
}

// Calls fn(values) for every coloring of n sites by k colors.
template <class Fn>
void for_each_coloring(std::size_t n, std::uint32_t k, Fn&& fn) {
  if (n > 16 || int_pow(k, n) > kEnumerationCap) throw UsageError("domain too large to enumerate");
  std::vector<Color> values(n, 0);
  while (true) {
    fn(std::span<const Color>(values));
    std::size_t i = 0;
    while (i < n && ++values[i] == k) values[i++] = 0;
    if (i == n) return;
  }
}

}  // namespace

GroupBadEvent GroupBadEvent::explicit_set(GroupSet f, std::uint32_t k, std::vector<Pattern> patterns) {
  if (f.empty()) throw UsageError("bad events need a nonempty domain");
  for (const auto& p : patterns) {
    if (!(p.domain() == f)) throw UsageError("every pattern of an explicit event must have domain F");
    if (p.k() != k) throw UsageError("pattern alphabet differs from the event's");
  }
  GroupBadEvent b(Kind::ExplicitSet, std::move(f), k);
  b.patterns_ = std::move(patterns);
  return b;
}

GroupBadEvent GroupBadEvent::frequency_deviation(FrequencyDeviation spec) {
  if (spec.k < 1) throw UsageError("alphabet size must be >= 1");
  if (spec.eps <= 0) throw UsageError("eps must be positive");
  if (spec.s.empty() || spec.d.empty()) throw UsageError("S and D must be nonempty");
  GroupSet f = set_product(spec.s, spec.d);
  GroupBadEvent b(Kind::FrequencyDeviation, f, spec.k);
  b.k_pow_s_ = static_cast<std::int64_t>(int_pow(spec.k, spec.s.size()));
  const auto& ctx = spec.s.ctx();
  b.slots_.reserve(spec.s.size() * spec.d.size());
  for (const auto& delta : spec.d) {
    for (const auto& s : spec.s) b.slots_.push_back(static_cast<std::uint32_t>(f.index_of(ctx.op(s, delta))));
  }
  b.freq_ = std::make_shared<const FrequencyDeviation>(std::move(spec));
  return b;
}

const FrequencyDeviation& GroupBadEvent::frequency() const {
  if (!freq_) throw UsageError("not a frequency-deviation event");
  return *freq_;
}

bool GroupBadEvent::holds(std::span<const Color> values) const {
  if (values.size() != domain_.size()) throw UsageError("coloring must cover the event domain");
  if (kind_ == Kind::ExplicitSet) {
    return std::any_of(patterns_.begin(), patterns_.end(), [&](const Pattern& p) {
      return std::equal(p.values().begin(), p.values().end(), values.begin());
    });
  }
  const std::size_t s_size = freq_->s.size();
  const std::size_t d_size = freq_->d.size();
  std::vector<std::int64_t> counts(static_cast<std::size_t>(k_pow_s_), 0);
  for (std::size_t i = 0; i < d_size; ++i) {
    std::uint64_t code = 0;
    for (std::size_t j = s_size; j-- > 0;) code = code * k_ + values[slots_[i * s_size + j]];
    ++counts[code];
  }
  return std::any_of(counts.begin(), counts.end(), [&](std::int64_t c) {
    return deviates(c, static_cast<std::int64_t>(d_size), k_pow_s_, freq_->eps);
  });
}

std::vector<Pattern> GroupBadEvent::expand() const {
  std::vector<Pattern> out;
  for_each_coloring(domain_.size(), k_, [&](std::span<const Color> v) {
    if (holds(v)) out.emplace_back(domain_, std::vector<Color>(v.begin(), v.end()), k_);
  });
  return out;
}

bool event_holds(const GroupBadEvent& b, const Config& c) {
  std::vector<Color> values;
  values.reserve(b.domain().size());
  for (const auto& f : b.domain()) {
    const auto v = c.at(f);
    if (!v) throw BoundaryError("configuration does not cover " + b.domain().ctx().format(f));
    values.push_back(*v);
  }
  return b.holds(values);
}

Rational event_probability_exhaustive(const GroupBadEvent& b) {
  std::int64_t hits = 0;
  for_each_coloring(b.domain().size(), b.k(), [&](std::span<const Color> v) { hits += b.holds(v); });
  return {hits, static_cast<std::int64_t>(int_pow(b.k(), b.domain().size()))};
}

InducedEvent::InducedEvent(const GroupBadEvent& phi, const FiniteAction& action, Point x) : phi_(&phi), anchor_(x) {
  if (!(phi.domain().ctx() == action.ctx())) throw UsageError("event and action use different groups");
  std::vector<Point> images;
  images.reserve(phi.domain().size());
  for (const auto& f : phi.domain()) images.push_back(action.act_defined(f, x));
  domain_ = images;
  std::sort(domain_.begin(), domain_.end());
  domain_.erase(std::unique(domain_.begin(), domain_.end()), domain_.end());
  pullback_.reserve(images.size());
  for (const auto p : images) {
    pullback_.push_back(
        static_cast<std::uint32_t>(std::lower_bound(domain_.begin(), domain_.end(), p) - domain_.begin()));
  }
}

bool InducedEvent::holds(std::span<const Color> coloring) const {
  std::vector<Color> values(pullback_.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = coloring[domain_[pullback_[i]]];
  return phi_->holds(values);
}

Rational InducedEvent::probability_exhaustive() const {
  std::int64_t hits = 0;
  std::vector<Color> values(pullback_.size());
  for_each_coloring(domain_.size(), phi_->k(), [&](std::span<const Color> local) {
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = local[pullback_[i]];
    hits += phi_->holds(values);
  });
  return {hits, static_cast<std::int64_t>(int_pow(phi_->k(), domain_.size()))};
}

InducedEvent induced_event(const GroupBadEvent& phi, const FiniteAction& action, Point x) { return {phi, action, x}; }

double slll_margin(double p_bound, double d_plus_one) { return std::numbers::e * p_bound * d_plus_one; }

std::uint64_t difference_set_size(const std::vector<std::int64_t>& sd) {
  if (sd.empty()) return 0;
  const auto [lo_it, hi_it] = std::minmax_element(sd.begin(), sd.end());
  const std::int64_t lo = *lo_it;
  const auto width = static_cast<std::size_t>(*hi_it - lo + 1);
  std::vector<std::uint64_t> member((width + 63) / 64, 0);
  for (const auto v : sd) member[static_cast<std::size_t>(v - lo) / 64] |= std::uint64_t{1} << ((v - lo) % 64);
  // Differences b - a land at (b - lo) + (width - 1 - (a - lo)) in [0, 2 width - 1).
  std::vector<std::uint64_t> diff((2 * width + 63) / 64 + 1, 0);
  for (const auto a : sd) {
    const std::size_t shift = width - 1 - static_cast<std::size_t>(a - lo);
    const std::size_t word = shift / 64;
    const unsigned bit = shift % 64;
    for (std::size_t i = 0; i < member.size(); ++i) {
      const std::uint64_t m = member[i];
      if (!m) continue;
      diff[i + word] |= m << bit;
      if (bit) diff[i + word + 1] |= m >> (64 - bit);
    }
  }
  std::uint64_t count = 0;
  for (const auto w : diff) count += static_cast<std::uint64_t>(__builtin_popcountll(w));
  return count;
}

InstanceStats slll_stats_generic(std::uint32_t k, std::size_t s_size, const Rational& eps, std::uint64_t d_size) {
  if (s_size == 0 || d_size == 0) throw UsageError("S and D must be nonempty");
  const double p = std::exp(log_concentration(k, s_size, eps, static_cast<double>(d_size)));
  const double cap_plus_one = static_cast<double>(s_size) * static_cast<double>(s_size) *
                              static_cast<double>(d_size) * static_cast<double>(d_size);
  return {p, static_cast<std::uint64_t>(cap_plus_one) - 1, false, slll_margin(p, cap_plus_one)};
}

InstanceStats slll_stats(std::uint32_t k, const GroupSet& s, const Rational& eps, const GroupSet& d) {
  auto stats = slll_stats_generic(k, s.size(), eps, d.size());
  const GroupSet sd = set_product(s, d);
  std::uint64_t exact = 0;
  if (sd.ctx().kind() == GroupKind::Integers && sd.size() <= 10000) {
    exact = difference_set_size(integer_values(sd));
  } else if (sd.size() <= 2000) {
    exact = set_product(sd.inverse(), sd).size();
  } else {
    return stats;
  }
  if (exact - 1 < stats.d_bound) {
    stats.d_bound = exact - 1;
    stats.d_exact = true;
    stats.slll_margin = slll_margin(stats.p_bound, static_cast<double>(exact));
  }
  return stats;
}

const char* to_string(ThresholdShape shape) {
  switch (shape) {
    case ThresholdShape::GenericCap:
      return "generic";
    case ThresholdShape::Interval:
      return "interval";
    case ThresholdShape::Random:
      return "random";
  }
  return "?";
}

ThresholdResult find_slll_threshold(std::uint32_t k, const GroupSet& s, const Rational& eps, ThresholdShape shape,
                                    std::uint64_t search_cap, std::uint64_t seed) {
  if (s.empty()) throw UsageError("S must be nonempty");
  if (eps <= 0 || eps >= 1) throw UsageError("threshold search needs 0 < eps < 1");
  if (search_cap < 1) throw UsageError("search cap must be >= 1");
  const std::size_t s_size = s.size();
  std::vector<std::int64_t> s_vals;
  if (shape != ThresholdShape::GenericCap) s_vals = integer_values(s);

  // ln of the margin for |D| = m.
  auto log_margin = [&](std::uint64_t m) {
    const double md = static_cast<double>(m);
    const double cap = std::log(static_cast<double>(s_size) * static_cast<double>(s_size) * md * md);
    double degree = cap;
    if (shape != ThresholdShape::GenericCap) {
      const auto diam = s_vals.back() - s_vals.front();
      bool contiguous = shape == ThresholdShape::Interval;
      for (std::size_t i = 1; i < s_vals.size() && contiguous; ++i) {
        contiguous = s_vals[i] - s_vals[i - 1] <= static_cast<std::int64_t>(m);
      }
      std::uint64_t diff = 0;
      if (contiguous) {
        diff = 2 * (m + static_cast<std::uint64_t>(diam)) - 1;
      } else {
        std::vector<std::int64_t> d_vals(m);
        if (shape == ThresholdShape::Interval) {
          for (std::uint64_t i = 0; i < m; ++i) d_vals[i] = static_cast<std::int64_t>(i);
        } else {
          std::vector<std::int64_t> pool(2 * m);
          for (std::uint64_t i = 0; i < pool.size(); ++i) pool[i] = static_cast<std::int64_t>(i);
          StreamRng rng(seed, m);
          for (std::uint64_t i = 0; i < m; ++i) {
            const auto j = i + rng.below(static_cast<std::uint32_t>(pool.size() - i));
            std::swap(pool[i], pool[j]);
          }
          std::copy(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(m), d_vals.begin());
        }
        std::vector<std::int64_t> sd;
        sd.reserve(s_vals.size() * m);
        for (const auto a : s_vals) {
          for (const auto b : d_vals) sd.push_back(a + b);
        }
        std::sort(sd.begin(), sd.end());
        sd.erase(std::unique(sd.begin(), sd.end()), sd.end());
        diff = difference_set_size(sd);
      }
      degree = std::min(cap, std::log(static_cast<double>(diff)));
    }
    return 1.0 + log_concentration(k, s_size, eps, md) + degree;
  };

  ThresholdResult r;
  const double e = to_double(eps);
  const double s3 = std::pow(static_cast<double>(s_size), 3);
  r.stationary = 4.0 * s3 / (e * e);
  const auto start = std::min<std::uint64_t>(search_cap, std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(r.stationary))));
  if (log_margin(search_cap) >= 0) return r;
  std::uint64_t hi = search_cap;
  if (log_margin(start) < 0) {
    hi = start;
    r.left_of_stationary = true;
  } else {
    std::uint64_t lo = start;
    while (hi - lo > 1) {
      const std::uint64_t mid = lo + (hi - lo) / 2;
      (log_margin(mid) < 0 ? hi : lo) = mid;
    }
  }
  r.found = true;
  r.m = hi;
  r.margin_at_m = std::exp(log_margin(hi));
  r.margin_below = hi > 1 ? std::exp(log_margin(hi - 1)) : std::numeric_limits<double>::infinity();
  return r;
}

double GLLLWitnessSpec::default_rate(const Rational& eps, std::size_t s_size) {
  const double e = to_double(eps);
  return e * e / (4.0 * std::pow(static_cast<double>(s_size), 3));
}

bool GlllReport::ok() const { return first_failure() == nullptr; }

const GlllRow* GlllReport::first_failure() const {
  for (const auto& r : rows) {
    if (!r.verdict) return &r;
  }
  return nullptr;
}

nlohmann::json GlllReport::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json row{{"inequality", r.inequality}, {"lhs", r.lhs}, {"rhs", r.rhs}, {"slack", r.slack},
                       {"verdict", r.verdict ? "pass" : "fail"}};
    if (r.n == "tail" || r.n == "all") {
      row["n"] = r.n;
    } else {
      row["n"] = std::stoull(r.n);
    }
    out.push_back(std::move(row));
  }
  return out;
}

double log_series_bound(double q, std::uint64_t start) {
  if (!(q > 1)) return std::numeric_limits<double>::infinity();
  constexpr std::uint64_t kExactTerms = 20000;
  double sum = 0;
  for (std::uint64_t n = start; n < start + kExactTerms; ++n) {
    const double x = static_cast<double>(n + 2);
    sum += std::log(x) * std::pow(x, -q);
  }
  // ln(x) x^-q decreases for x > e^(1/q), so the remaining terms (x >= A + 1)
  // are bounded by the integral from A.
  const double a = static_cast<double>(start + kExactTerms + 1);
  const double q1 = q - 1;
  return sum + std::pow(a, -q1) * (std::log(a) / q1 + 1.0 / (q1 * q1));
}

GlllReport glll_check_sizes(std::uint32_t k, std::size_t s_size, const Rational& eps,
                            const std::vector<std::uint64_t>& d_sizes, const std::vector<std::uint64_t>& sd_sizes,
                            const GLLLWitnessSpec& spec, double eps_sum) {
  if (d_sizes.size() != sd_sizes.size()) throw UsageError("|D_n| and |SD_n| lists differ in length");
  if (s_size == 0) throw UsageError("S must be nonempty");
  const double e = to_double(eps);
  const double s = static_cast<double>(s_size);
  const double rate = e * e / (2.0 * s * s * s);
  if (!(spec.a > 0) || !(spec.a < rate)) throw PreconditionError("witness rate a must lie in (0, eps^2 / (2|S|^3))");
  if (spec.c < 0) throw UsageError("growth constant C must be >= 0");

  const std::size_t n_events = d_sizes.size();
  std::vector<double> omega(n_events);
  double log_sum = 0;  // sum_m |D_m| (-ln(1 - omega_m))
  GlllReport report;
  for (std::size_t n = 0; n < n_events; ++n) {
    omega[n] = std::exp(-spec.a * static_cast<double>(d_sizes[n]));
    if (!(omega[n] < 1)) throw PreconditionError("witness omega(" + std::to_string(n) + ") >= 1");
    log_sum += static_cast<double>(d_sizes[n]) * -std::log1p(-omega[n]);
    report.small_sum += static_cast<double>(sd_sizes[n]) * omega[n] / (1 - omega[n]);
  }

  const bool tail = spec.c > 0;
  double tail_log = 0;
  if (tail) {
    // Past the prefix, |D_m| >= C ln(m+2) >= 1/a, where xi e^{-a xi} is
    // decreasing and omega_m <= 1/2, so |D_m| omega_m / (1 - omega_m) <=
    // 2 C ln(m+2) (m+2)^{-Ca}.
    const double decay = spec.c * spec.a * std::numbers::ln2;
    report.rows.push_back({"tail_decay", "tail", decay, 1.0, decay - 1.0, decay > 1.0});
    report.tail_bound = decay > 1.0 ? 2.0 * spec.c * log_series_bound(spec.c * spec.a, n_events)
                                    : std::numeric_limits<double>::infinity();
    tail_log = report.tail_bound;
  }

  const double total = report.small_sum + s * report.tail_bound;
  report.rows.push_back({"small_sum", "all", total, eps_sum, eps_sum - total, total < eps_sum});

  const double log_p = std::log(2.0) + s * std::log(static_cast<double>(k));
  const double dependence = s * s * (log_sum + tail_log);
  for (std::size_t n = 0; n < n_events; ++n) {
    const double dn = static_cast<double>(d_sizes[n]);
    const double lhs1 = log_p - rate * dn;
    const double rhs1 = -spec.a * dn - dn * dependence;
    report.rows.push_back({"correct1", std::to_string(n), lhs1, rhs1, rhs1 - lhs1, lhs1 <= rhs1});
    const double lhs2 = -log_p / dn + rate;
    const double rhs2 = spec.a + dependence;
    report.rows.push_back({"correct2", std::to_string(n), lhs2, rhs2, lhs2 - rhs2, lhs2 >= rhs2});
  }
  if (tail) {
    const double d_min = spec.c * std::log(static_cast<double>(n_events + 2));
    const double lhs = -log_p / d_min + rate;
    const double rhs = spec.a + dependence;
    report.rows.push_back({"correct2", "tail", lhs, rhs, lhs - rhs, lhs >= rhs});
  }
  return report;
}

GlllReport glll_check(std::uint32_t k, const GroupSet& s, const Rational& eps, const std::vector<GroupSet>& d_seq,
                      const GLLLWitnessSpec& spec, double eps_sum) {
  std::vector<std::uint64_t> d_sizes;
  std::vector<std::uint64_t> sd_sizes;
  for (const auto& d : d_seq) {
    if (d.empty()) throw UsageError("every D_n must be nonempty");
    d_sizes.push_back(d.size());
    sd_sizes.push_back(set_product(s, d).size());
  }
  return glll_check_sizes(k, s.size(), eps, d_sizes, sd_sizes, spec, eps_sum);
}

double find_glll_constant(std::uint32_t k, std::size_t s_size, const Rational& eps, double a, double eps_sum) {
  if (s_size == 0) throw UsageError("S must be nonempty");
  const double e = to_double(eps);
  const double s = static_cast<double>(s_size);
  const double rate = e * e / (2.0 * s * s * s);
  if (!(a > 0) || !(a < rate)) throw PreconditionError("witness rate a must lie in (0, eps^2 / (2|S|^3))");
  if (!(eps_sum > 0)) throw UsageError("eps_sum must be positive");
  const double log_p = std::log(2.0) + s * std::log(static_cast<double>(k));

  // Each condition only gets easier as C grows once C ln2 > 1/a.
  auto passes = [&](double c) {
    if (!(c * a * std::numbers::ln2 > 1.0)) return false;
    const double series = log_series_bound(c * a, 0);
    if (!(2.0 * s * c * series < eps_sum)) return false;
    return -log_p / (c * std::numbers::ln2) + rate >= a + 2.0 * s * s * c * series;
  };
  double lo = 1.0 / (a * std::numbers::ln2);
  double hi = 2.0 * lo;
  while (!passes(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e15) throw PreconditionError("no growth constant C below 1e15");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-9 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (passes(mid) ? hi : lo) = mid;
  }
  return hi;
}

StandardWitnessCheck standard_witness_check(const InstanceStats& stats) {
  const double d = static_cast<double>(stats.d_bound);
  const double omega = 1.0 / (d + 1.0);
  const double rhs = std::exp(std::log(omega) + d * std::log1p(-omega));
  return {stats.p_bound, rhs, stats.p_bound <= rhs};
}

}  // namespace ergolab
