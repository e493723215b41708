#include "ergolab/shift_space.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "ergolab/error.hpp"
#include "ergolab/rng.hpp"

namespace ergolab {

std::uint64_t int_pow(std::uint64_t k, std::size_t e) {
  std::uint64_t r = 1;
  for (std::size_t i = 0; i < e; ++i) {
    if (r > (std::uint64_t{1} << 40) / std::max<std::uint64_t>(k, 1)) throw UsageError("k^|S| too large");
    r *= k;
  }
  return r;
}

Pattern::Pattern(GroupSet domain, std::vector<Color> values, std::uint32_t k)
    : domain_(std::move(domain)), values_(std::move(values)), k_(k) {
  if (domain_.empty()) throw UsageError("patterns need a nonempty domain");
  if (values_.size() != domain_.size()) throw UsageError("pattern values must cover the domain");
  if (k_ < 1) throw UsageError("alphabet size must be >= 1");
  for (const auto v : values_) {
    if (v >= k_) throw UsageError("pattern color outside {0..k-1}");
  }
}

Pattern Pattern::from_code(const GroupSet& domain, std::uint32_t k, std::uint64_t code) {
  std::vector<Color> values(domain.size());
  for (auto& v : values) {
    v = static_cast<Color>(code % k);
    code /= k;
  }
  return {domain, std::move(values), k};
}

Pattern Pattern::constant(const GroupSet& domain, std::uint32_t k, Color c) {
  return {domain, std::vector<Color>(domain.size(), c), k};
}

std::uint64_t Pattern::code() const {
  std::uint64_t code = 0;
  for (auto it = values_.rbegin(); it != values_.rend(); ++it) code = code * k_ + *it;
  return code;
}

std::optional<Color> Pattern::at(const GroupElem& g) const {
  const auto i = domain_.index_of(g);
  if (i < 0) return std::nullopt;
  return values_[static_cast<std::size_t>(i)];
}

Pattern shift_pattern(const Pattern& phi, const GroupElem& gamma) {
  const auto& ctx = phi.domain().ctx();
  const GroupElem g_inv = ctx.inv(gamma);
  std::vector<GroupElem> elems;
  for (const auto& s : phi.domain()) elems.push_back(ctx.op(s, g_inv));
  GroupSet dom(ctx, elems);
  std::vector<Color> values(dom.size());
  for (std::size_t i = 0; i < elems.size(); ++i) {
    values[static_cast<std::size_t>(dom.index_of(elems[i]))] = phi.values()[i];
  }
  return {std::move(dom), std::move(values), phi.k()};
}

Config::Config(GroupSet domain, std::vector<Color> values) : domain_(std::move(domain)), values_(std::move(values)) {
  if (values_.size() != domain_.size()) throw UsageError("config values must cover the window");
}

std::optional<Color> Config::at(const GroupElem& g) const {
  const auto i = domain_.index_of(g);
  if (i < 0) return std::nullopt;
  return values_[static_cast<std::size_t>(i)];
}

bool Config::contains(const Pattern& phi) const {
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const auto v = at(phi.domain()[i]);
    if (!v || *v != phi.values()[i]) return false;
  }
  return true;
}

Rational EmpiricalMeasure::mass(const std::function<bool(Point)>& indicator) const {
  Rational m = 0;
  for (const auto& [p, w] : atoms) {
    if (indicator(p)) m += w;
  }
  return m;
}

void PatternStats::write_csv(std::ostream& out, bool header) const {
  if (header) out << "pattern_id,freq,target,deviation\n";
  for (const auto& r : rows) {
    out << r.pattern_id << ',' << to_string(r.freq) << ',' << to_string(r.target) << ','
        << to_string(r.deviation) << '\n';
  }
}

GroupSet occurrences(const Pattern& phi, const Config& c) {
  const auto& ctx = phi.domain().ctx();
  if (!(ctx == c.domain().ctx())) throw UsageError("pattern and config use different groups");
  // Any occurrence gamma puts s0 gamma inside the window, so gamma = s0^-1 w.
  const GroupElem s0_inv = ctx.inv(phi.domain()[0]);
  std::vector<GroupElem> hits;
  for (const auto& w : c.domain()) {
    const GroupElem gamma = ctx.op(s0_inv, w);
    bool match = true;
    for (std::size_t i = 0; i < phi.size() && match; ++i) {
      const auto v = c.at(ctx.op(phi.domain()[i], gamma));
      match = v && *v == phi.values()[i];
    }
    if (match) hits.push_back(gamma);
  }
  return {ctx, std::move(hits)};
}

namespace {

// Colors of c at s delta for every s in S, or BoundaryError.
std::uint64_t code_at(const GroupSet& s, std::uint32_t k, const Config& c, const GroupElem& delta) {
  const auto& ctx = s.ctx();
  std::uint64_t code = 0;
  std::uint64_t place = 1;
  for (const auto& elem : s) {
    const GroupElem g = ctx.op(elem, delta);
    const auto v = c.at(g);
    if (!v) {
      throw BoundaryError("translate " + ctx.format(elem) + "*" + ctx.format(delta) + " = " + ctx.format(g) +
                          " lies outside the configuration window");
    }
    code += *v * place;
    place *= k;
  }
  return code;
}

}  // namespace

Rational empirical_freq(const Pattern& phi, const Config& c, const GroupSet& d) {
  if (d.empty()) throw UsageError("averaging set must be nonempty");
  const std::uint64_t target = phi.code();
  std::int64_t hits = 0;
  for (const auto& delta : d) {
    if (code_at(phi.domain(), phi.k(), c, delta) == target) ++hits;
  }
  return {hits, static_cast<std::int64_t>(d.size())};
}

PatternStats pattern_stats(const GroupSet& s, std::uint32_t k, const Config& c, const GroupSet& d) {
  if (s.empty()) throw UsageError("patterns need a nonempty domain");
  if (d.empty()) throw UsageError("averaging set must be nonempty");
  const std::uint64_t patterns = int_pow(k, s.size());
  std::vector<std::int64_t> counts(patterns, 0);
  for (const auto& delta : d) ++counts[code_at(s, k, c, delta)];
  PatternStats stats;
  const auto n = static_cast<std::int64_t>(d.size());
  const Rational target(1, static_cast<std::int64_t>(patterns));
  for (std::uint64_t code = 0; code < patterns; ++code) {
    const Rational freq(counts[code], n);
    const Rational dev = freq > target ? freq - target : target - freq;
    stats.rows.push_back({code, freq, target, dev});
    if (dev > stats.rows[stats.worst].deviation) stats.worst = code;
  }
  return stats;
}

double pointwise_average(std::span<const double> f, Point x, const GroupSet& d, const FiniteAction& action) {
  if (d.empty()) throw UsageError("averaging set must be nonempty");
  double sum = 0.0;
  for (const auto& delta : d) sum += f[action.act_defined(delta, x)];
  return sum / static_cast<double>(d.size());
}

EmpiricalMeasure empirical_measure(Point x, const GroupSet& d, const FiniteAction& action) {
  if (d.empty()) throw UsageError("averaging set must be nonempty");
  std::vector<Point> hits;
  hits.reserve(d.size());
  for (const auto& delta : d) hits.push_back(action.act_defined(delta, x));
  std::sort(hits.begin(), hits.end());
  EmpiricalMeasure m;
  const auto n = static_cast<std::int64_t>(d.size());
  for (std::size_t i = 0; i < hits.size();) {
    std::size_t j = i;
    while (j < hits.size() && hits[j] == hits[i]) ++j;
    m.atoms.emplace_back(hits[i], Rational(static_cast<std::int64_t>(j - i), n));
    i = j;
  }
  return m;
}

double discrepancy(std::span<const double> f, double global_mean, const GroupSet& d, const FiniteAction& action) {
  if (!action.is_total()) throw UsageError("discrepancy needs a total action");
  double worst = 0.0;
  for (Point x = 0; x < action.size(); ++x) {
    worst = std::max(worst, std::abs(pointwise_average(f, x, d, action) - global_mean));
  }
  return worst;
}

Config sample_uniform_config(const GroupSet& w, std::uint32_t k, std::uint64_t seed, std::uint64_t stream) {
  if (w.empty()) throw UsageError("sampling window must be nonempty");
  if (k < 1) throw UsageError("alphabet size must be >= 1");
  StreamRng rng(seed, stream);
  std::vector<Color> values(w.size());
  for (auto& v : values) v = rng.below(k);
  return {w, std::move(values)};
}

CylinderFn uniform_cylinders(std::uint32_t k) {
  return [k](const Pattern& phi) {
    return Rational(1, static_cast<std::int64_t>(int_pow(k, phi.size())));
  };
}

Rational AtomMeasure::cylinder(const Pattern& phi) const {
  Rational total = 0;
  for (const auto& [config, weight] : atoms) {
    for (const auto& s : phi.domain()) {
      if (!config.domain().contains(s)) {
        throw BoundaryError("pattern site " + phi.domain().ctx().format(s) + " outside the atom window");
      }
    }
    if (config.contains(phi)) total += weight;
  }
  return total;
}

CylinderFn AtomMeasure::as_fn() const {
  return [self = *this](const Pattern& phi) { return self.cylinder(phi); };
}

double cylinder_distance(const CylinderFn& nu1, const CylinderFn& nu2, const std::vector<Pattern>& patterns) {
  Rational worst = 0;
  for (const auto& phi : patterns) {
    Rational diff = nu1(phi) - nu2(phi);
    if (diff < 0) diff = -diff;
    worst = std::max(worst, diff);
  }
  return to_double(worst);
}

std::vector<std::uint32_t> pattern_codes(const FiniteAction& action, const GroupSet& s,
                                         std::span<const Color> coloring, std::uint32_t k) {
  if (coloring.size() != action.size()) throw UsageError("coloring must cover the action");
  const auto moves = action.translations(s);
  std::vector<std::uint32_t> codes(action.size(), 0);
  for (Point y = 0; y < action.size(); ++y) {
    std::uint32_t code = 0;
    for (std::size_t j = moves.size(); j-- > 0;) code = code * k + coloring[moves[j](y)];
    codes[y] = code;
  }
  return codes;
}

std::vector<std::uint32_t> anchor_counts(const FiniteAction& action, const GroupSet& d,
                                         std::span<const std::uint32_t> codes, std::uint64_t patterns) {
  if (codes.size() != action.size()) throw UsageError("codes must cover the action");
  const std::size_t n = action.size();
  const auto moves = action.translations(d);
  std::vector<std::uint32_t> counts(n * patterns, 0);

  auto direct = [&](Point x) {
    std::uint32_t* row = counts.data() + static_cast<std::size_t>(x) * patterns;
    for (const auto& t : moves) ++row[codes[t(x)]];
  };

  // Sliding update along the unit step: D.(x+e) = (D+e).x, so only the
  // symmetric difference of D and D+e changes between neighbouring anchors.
  const bool torus = action.flavor() == ActionFlavor::TorusTranslation;
  const std::int64_t row_len = torus ? action.modulus(1) : static_cast<std::int64_t>(n);
  std::vector<std::int64_t> base;  // offsets of D along the stepping axis
  const auto& ctx = action.ctx();
  const GroupElem unit = torus ? ctx.vec({0, 1}) : ctx.integer(1);
  const GroupSet shifted = set_product(d, GroupSet(ctx, {unit}));
  std::vector<Translation> removed;
  std::vector<Translation> added;
  {
    // Compare as points of the action: residues matter, not integers.
    auto image = [&](const GroupSet& set) {
      std::vector<std::pair<Point, std::size_t>> img;
      for (std::size_t i = 0; i < set.size(); ++i) img.emplace_back(action.translation(set[i])(0), i);
      std::sort(img.begin(), img.end());
      return img;
    };
    const auto a = image(d);
    const auto b = image(shifted);
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < a.size() || j < b.size()) {
      if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
        removed.push_back(action.translation(d[a[i++].second]));
      } else if (i == a.size() || b[j].first < a[i].first) {
        added.push_back(action.translation(shifted[b[j++].second]));
      } else {
        ++i;
        ++j;
      }
    }
  }
  if (removed.size() + added.size() >= moves.size()) {
    for (Point x = 0; x < n; ++x) direct(x);
    return counts;
  }
  for (Point x = 0; x < n; ++x) {
    if (x % row_len == 0) {
      direct(x);
      continue;
    }
    const Point prev = x - 1;
    std::uint32_t* row = counts.data() + static_cast<std::size_t>(x) * patterns;
    const std::uint32_t* prow = counts.data() + static_cast<std::size_t>(prev) * patterns;
    std::copy(prow, prow + patterns, row);
    for (const auto& t : removed) --row[codes[t(prev)]];
    for (const auto& t : added) ++row[codes[t(prev)]];
  }
  return counts;
}

}  // namespace ergolab
