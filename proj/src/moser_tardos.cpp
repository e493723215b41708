#include "ergolab/moser_tardos.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "ergolab/error.hpp"

namespace ergolab {

void EventFamily::add(std::uint64_t n, GroupBadEvent phi) {
  for (const auto& m : members_) {
    if (m.n == n) throw UsageError("duplicate family index " + std::to_string(n));
  }
  members_.push_back({n, std::move(phi)});
}

namespace {

std::vector<Translation> inverse_translations(const FiniteAction& action, const GroupSet& set) {
  return action.translations(set.inverse());
}

// Violation state of the events induced by one family member at every anchor.
class MemberState {
 public:
  MemberState(const FiniteAction& action, const GroupBadEvent& phi, std::span<const Color> g)
      : phi_(&phi), points_(action.size()), f_(action.translations(phi.domain())),
        f_inv_(inverse_translations(action, phi.domain())), anchor_stamp_(points_, 0) {
    if (phi.kind() == GroupBadEvent::Kind::FrequencyDeviation) {
      const auto& fd = phi.frequency();
      s_size_ = fd.s.size();
      patterns_ = int_pow(fd.k, s_size_);
      s_ = action.translations(fd.s);
      s_inv_ = inverse_translations(action, fd.s);
      d_inv_ = inverse_translations(action, fd.d);
      bad_.resize(fd.d.size() + 1);
      for (std::size_t c = 0; c <= fd.d.size(); ++c) {
        bad_[c] = deviates(static_cast<std::int64_t>(c), static_cast<std::int64_t>(fd.d.size()),
                           static_cast<std::int64_t>(patterns_), fd.eps);
      }
      codes_ = pattern_codes(action, fd.s, g, fd.k);
      hist_ = anchor_counts(action, fd.d, codes_, patterns_);
      code_stamp_.assign(points_, 0);
    }
  }

  const std::vector<Translation>& domain_moves() const { return f_; }

  bool violated(Point x, std::span<const Color> g) const {
    if (!hist_.empty()) {
      const std::uint32_t* row = hist_.data() + static_cast<std::size_t>(x) * patterns_;
      for (std::uint64_t c = 0; c < patterns_; ++c) {
        if (bad_[row[c]]) return true;
      }
      return false;
    }
    std::vector<Color> values(f_.size());
    for (std::size_t i = 0; i < f_.size(); ++i) values[i] = g[f_[i](x)];
    return phi_->holds(values);
  }

  // Refreshes statistics after the points in `changed` were recolored and
  // appends every anchor whose event may have changed to `dirty`.
  void update(std::span<const Point> changed, std::span<const Color> g, std::vector<Point>& dirty) {
    ++stamp_;
    if (hist_.empty()) {
      for (const auto p : changed) {
        for (const auto& finv : f_inv_) mark(finv(p), dirty);
      }
      return;
    }
    const std::uint32_t k = phi_->k();
    for (const auto p : changed) {
      for (const auto& sinv : s_inv_) {
        const Point y = sinv(p);
        if (code_stamp_[y] == stamp_) continue;
        code_stamp_[y] = stamp_;
        std::uint32_t code = 0;
        for (std::size_t j = s_size_; j-- > 0;) code = code * k + g[s_[j](y)];
        const std::uint32_t old = codes_[y];
        if (code == old) continue;
        codes_[y] = code;
        for (const auto& dinv : d_inv_) {
          const Point x = dinv(y);
          std::uint32_t* row = hist_.data() + static_cast<std::size_t>(x) * patterns_;
          --row[old];
          ++row[code];
          mark(x, dirty);
        }
      }
    }
  }

 private:
  void mark(Point x, std::vector<Point>& dirty) {
    if (anchor_stamp_[x] == stamp_) return;
    anchor_stamp_[x] = stamp_;
    dirty.push_back(x);
  }

  const GroupBadEvent* phi_;
  std::size_t points_;
  std::vector<Translation> f_;
  std::vector<Translation> f_inv_;
  std::vector<std::uint64_t> anchor_stamp_;
  std::uint64_t stamp_ = 0;

  std::size_t s_size_ = 0;
  std::uint64_t patterns_ = 0;
  std::vector<Translation> s_;
  std::vector<Translation> s_inv_;
  std::vector<Translation> d_inv_;
  std::vector<char> bad_;
  std::vector<std::uint32_t> codes_;
  std::vector<std::uint32_t> hist_;
  std::vector<std::uint64_t> code_stamp_;
};

void require_free(const FiniteAction& action, const EventFamily& family) {
  if (!action.is_total()) throw PreconditionError("resampling needs a total action");
  for (const auto& m : family.members()) {
    std::vector<GroupSet> sets{m.phi.domain()};
    if (m.phi.kind() == GroupBadEvent::Kind::FrequencyDeviation) {
      sets.push_back(m.phi.frequency().s);
      sets.push_back(m.phi.frequency().d);
    }
    if (is_sd_free(action, sets) != Freeness::Free) {
      throw PreconditionError("action is not free on the domains of family member " + std::to_string(m.n));
    }
  }
}

}  // namespace

MTResult run_mt(const FiniteAction& action, const EventFamily& family, const TapeSpace& tape,
                const MTOptions& options) {
  require_free(action, family);
  const std::size_t points = action.size();
  MTResult r;
  r.g.resize(points);
  r.t.assign(points, 0);
  for (Point p = 0; p < points; ++p) r.g[p] = tape.symbol(p, 0);
  r.ind.assign(family.size(), std::vector<std::uint32_t>(points, 0));

  std::vector<MemberState> states;
  states.reserve(family.size());
  for (const auto& m : family.members()) states.emplace_back(action, m.phi, r.g);

  std::vector<EventRef> violated;
  for (std::uint32_t m = 0; m < states.size(); ++m) {
    for (Point x = 0; x < points; ++x) {
      if (states[m].violated(x, r.g)) violated.push_back({m, x});
    }
  }
  const std::uint64_t max_steps =
      options.max_steps ? options.max_steps : 1000 * static_cast<std::uint64_t>(family.size()) * points;

  // Members are ordered by their index n for the greedy scan.
  std::vector<std::uint32_t> rank(family.size());
  {
    std::vector<std::uint32_t> order(family.size());
    for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](auto a, auto b) { return family.members()[a].n < family.members()[b].n; });
    for (std::uint32_t i = 0; i < order.size(); ++i) rank[order[i]] = i;
  }
  auto greedy_order = [&](const EventRef& a, const EventRef& b) {
    return rank[a.member] != rank[b.member] ? rank[a.member] < rank[b.member] : a.anchor < b.anchor;
  };

  std::vector<std::uint64_t> taken(points, 0);
  std::vector<Point> changed;
  std::vector<Point> dirty;
  while (!violated.empty()) {
    if (r.steps == max_steps) {
      r.defect = violated;
      return r;
    }
    const std::uint64_t step = ++r.steps;
    std::sort(violated.begin(), violated.end(), greedy_order);
    std::vector<EventRef> selected;
    changed.clear();
    for (const auto& e : violated) {
      const auto& moves = states[e.member].domain_moves();
      const bool disjoint =
          std::none_of(moves.begin(), moves.end(), [&](const Translation& f) { return taken[f(e.anchor)] == step; });
      if (!disjoint) continue;
      selected.push_back(e);
      for (const auto& f : moves) {
        taken[f(e.anchor)] = step;
        changed.push_back(f(e.anchor));
      }
    }
    if (options.check_maximality) {
      for (const auto& e : violated) {
        const auto& moves = states[e.member].domain_moves();
        const bool blocked =
            std::any_of(moves.begin(), moves.end(), [&](const Translation& f) { return taken[f(e.anchor)] == step; });
        if (!blocked) throw std::logic_error("greedy selection is not maximal");
      }
    }
    for (const auto& e : selected) ++r.ind[e.member][e.anchor];
    for (const auto p : changed) r.g[p] = tape.symbol(p, ++r.t[p]);
    if (options.transcript) r.transcript.push_back({step, selected, changed.size()});

    // Only events whose statistics saw a recolored point can change state.
    std::vector<EventRef> next;
    for (std::uint32_t m = 0; m < states.size(); ++m) {
      dirty.clear();
      states[m].update(changed, r.g, dirty);
      std::sort(dirty.begin(), dirty.end());
      for (const auto& e : violated) {
        if (e.member == m && !std::binary_search(dirty.begin(), dirty.end(), e.anchor)) next.push_back(e);
      }
      for (const auto x : dirty) {
        if (states[m].violated(x, r.g)) next.push_back({m, x});
      }
    }
    violated = std::move(next);
  }
  r.converged = true;
  return r;
}

nlohmann::json MTResult::summary(const EventFamily& family) const {
  std::uint64_t resampled = 0;
  std::uint32_t max_t = 0;
  for (const auto v : t) {
    resampled += v > 0;
    max_t = std::max(max_t, v);
  }
  nlohmann::json members = nlohmann::json::array();
  for (std::size_t m = 0; m < family.size(); ++m) {
    std::uint64_t total = 0;
    for (const auto v : ind[m]) total += v;
    members.push_back({{"n", family.members()[m].n}, {"total_ind", total}});
  }
  return {{"converged", converged}, {"steps", steps},      {"points", g.size()},
          {"resampled_points", resampled}, {"max_t", max_t}, {"defect_events", defect.size()},
          {"members", members}};
}

void write_transcript(std::ostream& out, const MTResult& result, const EventFamily& family) {
  for (const auto& s : result.transcript) {
    nlohmann::json sel = nlohmann::json::array();
    for (const auto& e : s.selected) sel.push_back({family.members()[e.member].n, e.anchor});
    out << nlohmann::json{{"step", s.step}, {"selected", sel}, {"resampled", s.resampled_points}}.dump() << '\n';
  }
}

std::vector<Point> defect(std::span<const Color> g, const GroupBadEvent& phi, const FiniteAction& action) {
  if (!action.is_total()) throw PreconditionError("defect sets need a total action");
  if (g.size() != action.size()) throw UsageError("coloring must cover the action");
  const MemberState state(action, phi, g);
  std::vector<Point> out;
  for (Point x = 0; x < action.size(); ++x) {
    if (state.violated(x, g)) out.push_back(x);
  }
  return out;
}

std::vector<Point> translated_defect(std::span<const Color> g, const GroupBadEvent& phi, const FiniteAction& action) {
  const auto moves = action.translations(phi.domain());
  std::vector<Point> out;
  for (const auto x : defect(g, phi, action)) {
    for (const auto& f : moves) out.push_back(f(x));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool check_two_defects(std::span<const Color> g, const GroupBadEvent& phi, const FiniteAction& action) {
  const auto rhs = translated_defect(g, phi, action);
  std::vector<char> anchor_bad(action.size());
  for (Point x = 0; x < action.size(); ++x) anchor_bad[x] = InducedEvent(phi, action, x).holds(g);
  const auto f_inv = inverse_translations(action, phi.domain());
  std::vector<Point> lhs;
  for (Point p = 0; p < action.size(); ++p) {
    if (std::any_of(f_inv.begin(), f_inv.end(), [&](const Translation& t) { return anchor_bad[t(p)] != 0; })) {
      lhs.push_back(p);
    }
  }
  return lhs == rhs;
}

double IndexRow::upper(double sum_sq) const {
  if (anchors == 0) return 1.0;
  if (max_ind <= 1) return wilson(total_ind, anchors).upper;
  const double n = static_cast<double>(anchors);
  const double m = mean();
  const double var = std::max(0.0, (sum_sq - n * m * m) / std::max(1.0, n - 1));
  return m + 1.96 * std::sqrt(var / n);
}

std::vector<IndexRow> index_report(const MTResult& result, const EventFamily& family, std::span<const double> omegas) {
  if (omegas.size() != family.size()) throw UsageError("one witness value per family member");
  std::vector<IndexRow> rows;
  for (std::size_t m = 0; m < family.size(); ++m) {
    if (!(omegas[m] > 0 && omegas[m] < 1)) throw PreconditionError("witness values must lie in (0, 1)");
    IndexRow row{family.members()[m].n, 0, result.ind[m].size(), 0, omegas[m]};
    for (const auto v : result.ind[m]) {
      row.total_ind += v;
      row.max_ind = std::max(row.max_ind, v);
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<IndexRow> aggregate_index(const std::vector<std::vector<IndexRow>>& runs) {
  if (runs.empty()) return {};
  std::vector<IndexRow> out = runs.front();
  for (std::size_t r = 1; r < runs.size(); ++r) {
    if (runs[r].size() != out.size()) throw UsageError("runs of different families");
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i].total_ind += runs[r][i].total_ind;
      out[i].anchors += runs[r][i].anchors;
      out[i].max_ind = std::max(out[i].max_ind, runs[r][i].max_ind);
    }
  }
  return out;
}

ResampleFraction resample_fraction(const MTResult& result, const TapeSpace& tape) {
  ResampleFraction f{0, 0, 0, result.g.size()};
  std::uint64_t changed = 0;
  for (Point p = 0; p < result.g.size(); ++p) {
    f.t_positive_count += result.t[p] >= 1;
    changed += result.g[p] != tape.symbol(p, 0);
  }
  if (f.points) {
    f.t_positive = static_cast<double>(f.t_positive_count) / static_cast<double>(f.points);
    f.g_changed = static_cast<double>(changed) / static_cast<double>(f.points);
  }
  return f;
}

double resample_bound(const EventFamily& family, std::span<const double> omegas) {
  if (omegas.size() != family.size()) throw UsageError("one witness value per family member");
  double total = 0;
  for (std::size_t m = 0; m < family.size(); ++m) {
    total += static_cast<double>(family.members()[m].phi.domain().size()) * omegas[m] / (1 - omegas[m]);
  }
  return total;
}

std::uint64_t ledger_mismatches(const MTResult& result, const EventFamily& family, const FiniteAction& action) {
  std::vector<std::uint64_t> acc(action.size(), 0);
  for (std::size_t m = 0; m < family.size(); ++m) {
    const auto moves = action.translations(family.members()[m].phi.domain());
    for (Point x = 0; x < action.size(); ++x) {
      const auto v = result.ind[m][x];
      if (!v) continue;
      for (const auto& f : moves) acc[f(x)] += v;
    }
  }
  std::uint64_t bad = 0;
  for (Point p = 0; p < action.size(); ++p) bad += acc[p] != result.t[p];
  return bad;
}

}  // namespace ergolab
