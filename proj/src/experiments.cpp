#include "ergolab/experiments.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <bit>
#include <functional>
#include <iomanip>
#include <sstream>

#include "ergolab/concentration.hpp"
#include "ergolab/ergodic.hpp"
#include "ergolab/error.hpp"
#include "ergolab/lll.hpp"
#include "ergolab/moser_tardos.hpp"
#include "ergolab/parallel.hpp"
#include "ergolab/rokhlin.hpp"

namespace ergolab {

const char* tool_version() { return ERGOLAB_VERSION; }

namespace {

using nlohmann::json;

std::uint64_t non_negative(std::int64_t v, const std::string& what) {
  if (v < 0) throw UsageError(what + " must be >= 0");
  return static_cast<std::uint64_t>(v);
}

std::uint32_t alphabet(ObjectReader& r) {
  const auto k = r.integer("k", 2);
  if (k < 2 || k > 64) throw UsageError(r.where() + ".k must be in 2..64");
  return static_cast<std::uint32_t>(k);
}

Rational tolerance(ObjectReader& r, const Rational& fallback) {
  const Rational eps = r.rational("eps", fallback);
  if (eps <= 0) throw UsageError(r.where() + ".eps must be positive");
  return eps;
}

GroupSet set_param(ObjectReader& r, const GroupCtx& ctx, const std::string& key, const json& fallback) {
  GroupSet s = parse_set(ctx, r.raw_or(key, fallback));
  if (s.empty()) throw UsageError(r.where() + "." + key + " must be nonempty");
  r.resolve(key, set_to_json(s));
  return s;
}

struct SequenceChoice {
  AveragingSequence seq = AveragingSequence::log_growth(1);
  json info;
};

// {"log_growth": C | "auto", "a": .., "eps_sum": ..} or {"explicit": [sets]}.
SequenceChoice read_sequence(ObjectReader& params, std::uint32_t k, const GroupSet& s, const Rational& eps,
                             const json& fallback) {
  const json& raw = params.raw_or("sequence", fallback);
  ObjectReader r(raw, params.where() + ".sequence");
  SequenceChoice out;
  if (r.has("explicit")) {
    const auto& list = r.raw("explicit");
    if (!list.is_array() || list.empty()) throw UsageError(r.where() + ".explicit must be a nonempty array of sets");
    std::vector<GroupSet> sets;
    json resolved = json::array();
    for (const auto& d : list) {
      sets.push_back(parse_set(s.ctx(), d));
      resolved.push_back(set_to_json(sets.back()));
    }
    r.resolve("explicit", resolved);
    out.seq = AveragingSequence::explicit_sets(std::move(sets));
    out.info = {{"rule", "explicit"}, {"length", out.seq.length()}};
  } else {
    const auto& c = r.raw_or("log_growth", "auto");
    const double a = r.number("a", GLLLWitnessSpec::default_rate(eps, s.size()));
    const double eps_sum = r.number("eps_sum", 0.1);
    double constant = 0;
    if (c.is_string() && c.get<std::string>() == "auto") {
      constant = find_glll_constant(k, s.size(), eps, a, eps_sum);
    } else if (c.is_number()) {
      constant = c.get<double>();
    } else {
      throw UsageError(r.where() + ".log_growth must be a number or \"auto\"");
    }
    out.seq = AveragingSequence::log_growth(constant);
    out.info = {{"rule", "log_growth"}, {"C", constant}, {"a", a}, {"eps_sum", eps_sum}};
  }
  r.finish();
  params.resolve("sequence", r.resolved());
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

// Each runner parses its parameter block in full, then executes.
using Runner = std::function<ExperimentOutput(ObjectReader&, const ExperimentConfig&, const RunOptions&)>;

ExperimentOutput run_ergodic_converge(ObjectReader& p, const ExperimentConfig& cfg, const RunOptions& opt) {
  const auto ctx = GroupCtx::integers();
  const auto k = alphabet(p);
  const auto s = set_param(p, ctx, "S", {0});
  const auto eps = tolerance(p, Rational(1, 10));
  const auto choice = read_sequence(p, k, s, eps, {{"log_growth", "auto"}});
  const auto n_max = non_negative(p.integer("n_max", 100), "n_max");
  const auto samples = non_negative(p.integer("samples", 200), "samples");
  p.finish();

  const auto report = ergodic_convergence_experiment(k, s, eps, choice.seq, n_max, samples, cfg.seed, opt.jobs);
  ExperimentOutput out;
  std::ostringstream csv;
  report.write_csv(csv);
  out.files["detail.csv"] = csv.str();
  for (const auto& r : report.rows) {
    if (!r.within()) {
      out.failures.push_back("exceed_frac > bc_tail + 3 sigma at n=" + std::to_string(r.n) + " (" + fmt(r.exceed_frac) +
                             " vs " + fmt(r.bc_tail + 3 * r.sigma) + ")");
    }
  }
  out.summary = {{"sequence", choice.info},
                 {"rows", report.rows.size()},
                 {"all_within", report.all_within()},
                 {"first_quiet_n", report.first_quiet_n},
                 {"final_bc_tail", report.rows.empty() ? 0.0 : report.rows.back().bc_tail}};
  return out;
}

ExperimentOutput run_concentration_sweep(ObjectReader& p, const ExperimentConfig& cfg, const RunOptions& opt) {
  SweepSpec spec;
  auto int_list = [&](const std::string& key, const json& fallback) {
    std::vector<std::int64_t> v;
    const auto& raw = p.raw_or(key, fallback);
    if (!raw.is_array() || raw.empty()) throw UsageError(p.where() + "." + key + " must be a nonempty array");
    for (const auto& e : raw) {
      if (!e.is_number_integer() || e.get<std::int64_t>() < 1) throw UsageError(p.where() + "." + key + " entries must be positive integers");
      v.push_back(e.get<std::int64_t>());
    }
    return v;
  };
  spec.ks.clear();
  for (const auto v : int_list("ks", {2, 3})) {
    if (v < 2 || v > 16) throw UsageError(p.where() + ".ks entries must be in 2..16");
    spec.ks.push_back(static_cast<std::uint32_t>(v));
  }
  spec.s_sizes.clear();
  for (const auto v : int_list("s_sizes", {1, 2})) spec.s_sizes.push_back(static_cast<std::size_t>(v));
  spec.d_sizes.clear();
  for (const auto v : int_list("d_sizes", {500, 2000})) spec.d_sizes.push_back(static_cast<std::size_t>(v));
  spec.epsilons.clear();
  const auto& eps_raw = p.raw_or("epsilons", {0.1, 0.2});
  if (!eps_raw.is_array() || eps_raw.empty()) throw UsageError(p.where() + ".epsilons must be a nonempty array");
  json eps_resolved = json::array();
  for (const auto& e : eps_raw) {
    const Rational r = e.is_string() ? parse_rational(e.get<std::string>()) : rational_from_decimal(e.get<double>());
    if (r <= 0) throw UsageError(p.where() + ".epsilons entries must be positive");
    spec.epsilons.push_back(r);
    eps_resolved.push_back(to_string(r));
  }
  p.resolve("epsilons", eps_resolved);
  spec.modulus = p.integer("modulus", 100000);
  spec.trials = non_negative(p.integer("trials", 10000), "trials");
  p.finish();
  spec.seed = cfg.seed;

  const auto rows = concentration_sweep(spec, opt.jobs);
  ExperimentOutput out;
  std::ostringstream csv;
  write_sweep_csv(csv, rows);
  out.files["detail.csv"] = csv.str();
  std::size_t checked = 0;
  std::size_t strict_ok = 0;
  for (const auto& r : rows) {
    const std::string where = "k=" + std::to_string(r.k) + " |S|=" + std::to_string(r.s_size) +
                              " eps=" + to_string(r.eps) + " |D|=" + std::to_string(r.d_size);
    if (!r.expectation_ok) out.failures.push_back("expectation identity outside 3 sigma at " + where);
    if (!r.checked) continue;
    ++checked;
    strict_ok += r.upper_within;
    if (!r.lower_within) out.failures.push_back("wilson_lower > bound at " + where);
  }
  out.summary = {{"points", rows.size()},
                 {"checked_points", checked},
                 {"upper_within_bound", strict_ok},
                 {"verdict_rule", "a point fails when the Wilson lower bound exceeds the bound"}};
  return out;
}

ExperimentOutput run_lll_check(ObjectReader& p, const ExperimentConfig& cfg, const RunOptions&) {
  const auto ctx = parse_group(p.raw_or("group", "Z"));
  p.resolve("group", group_to_json(ctx));
  const auto k = alphabet(p);
  const auto s = set_param(p, ctx, "S", {0});
  const auto eps = tolerance(p, Rational(1, 10));
  const auto d = set_param(p, ctx, "D", {{"interval", {0, 4000}}});
  std::optional<std::pair<ThresholdShape, std::uint64_t>> threshold;
  if (p.has("threshold")) {
    auto t = p.object("threshold");
    const auto shape = t.string("shape", "generic");
    const auto cap = non_negative(t.integer("search_cap", 100000), "search_cap");
    t.finish();
    p.resolve("threshold", t.resolved());
    ThresholdShape sh;
    if (shape == "generic") {
      sh = ThresholdShape::GenericCap;
    } else if (shape == "interval") {
      sh = ThresholdShape::Interval;
    } else if (shape == "random") {
      sh = ThresholdShape::Random;
    } else {
      throw UsageError(p.where() + ".threshold.shape must be generic, interval or random");
    }
    threshold = {sh, cap};
  }
  struct GlllParams {
    double a;
    double eps_sum;
    std::uint64_t n_max;
    json c;
  };
  std::optional<GlllParams> glll;
  if (p.has("glll")) {
    auto g = p.object("glll");
    GlllParams gp{g.number("a", GLLLWitnessSpec::default_rate(eps, s.size())), g.number("eps_sum", 0.1),
                  non_negative(g.integer("n_max", 50), "n_max"), g.raw_or("C", "auto")};
    g.finish();
    p.resolve("glll", g.resolved());
    glll = gp;
  }
  p.finish();

  ExperimentOutput out;
  const auto stats = slll_stats(k, s, eps, d);
  const auto sw = standard_witness_check(stats);
  out.summary["slll"] = {{"p_bound", stats.p_bound},
                         {"d_bound", stats.d_bound},
                         {"d_exact", stats.d_exact},
                         {"slll_margin", stats.slll_margin},
                         {"verdict", stats.slll_margin < 1 ? "slll_margin < 1" : "slll_margin ≥ 1"},
                         {"standard_witness", {{"lhs", sw.lhs}, {"rhs", sw.rhs}, {"holds", sw.holds}}}};
  if (!(stats.slll_margin < 1)) out.failures.push_back("slll_margin ≥ 1 (margin " + fmt(stats.slll_margin) + ")");
  std::ostringstream csv;
  csv << std::setprecision(12);
  csv << "inequality,n,lhs,rhs,slack,verdict\n";
  csv << "slll_margin,all," << stats.slll_margin << ",1," << 1 - stats.slll_margin << ','
      << (stats.slll_margin < 1 ? "pass" : "fail") << '\n';


  if (threshold) {
    const auto t = find_slll_threshold(k, s, eps, threshold->first, threshold->second, cfg.seed);
    out.summary["threshold"] = {{"shape", to_string(threshold->first)},
                                {"found", t.found},
                                {"m", t.m},
                                {"stationary", t.stationary},
                                {"margin_at_m", t.margin_at_m},
                                {"margin_below", t.margin_below},
                                {"left_of_stationary", t.left_of_stationary}};
  }

  if (glll) {
    double c = 0;
    if (glll->c.is_string() && glll->c.get<std::string>() == "auto") {
      c = find_glll_constant(k, s.size(), eps, glll->a, glll->eps_sum);
    } else if (glll->c.is_number() && glll->c.get<double>() > 0) {
      c = glll->c.get<double>();
    } else {
      throw UsageError(p.where() + ".glll.C must be a positive number or \"auto\"");
    }
    const auto seq = AveragingSequence::log_growth(c);
    const GLLLWitnessSpec spec{glll->a, c};
    GlllReport report;
    if (ctx.kind() == GroupKind::Integers) {
      std::vector<GroupSet> sets;
      for (std::uint64_t n = 0; n <= glll->n_max; ++n) sets.push_back(seq.realize(n));
      report = glll_check(k, s, eps, sets, spec, glll->eps_sum);
    } else {
      // D_n lives in Z; elsewhere only the sizes |D_n| and |S||D_n| enter.
      std::vector<std::uint64_t> d_sizes, sd_sizes;
      for (std::uint64_t n = 0; n <= glll->n_max; ++n) {
        d_sizes.push_back(seq.size(n));
        sd_sizes.push_back(seq.size(n) * s.size());
      }
      report = glll_check_sizes(k, s.size(), eps, d_sizes, sd_sizes, spec, glll->eps_sum);
    }
    for (const auto& r : report.rows) {
      csv << r.inequality << ',' << r.n << ',' << r.lhs << ',' << r.rhs << ',' << r.slack << ','
          << (r.verdict ? "pass" : "fail") << '\n';
      if (!r.verdict) {
        out.failures.push_back("GLLL " + r.inequality + " fails at n=" + r.n + " (slack " + fmt(r.slack) + ")");
      }
    }
    out.summary["glll"] = {{"C", c}, {"a", glll->a}, {"ok", report.ok()}, {"rows", report.to_json()}};
  }
  out.files["inequalities.csv"] = csv.str();
  return out;
}

std::vector<double> witness_omegas(const EventFamily& family, double a) {
  std::vector<double> omegas;
  for (const auto& m : family.members()) {
    omegas.push_back(std::exp(-a * static_cast<double>(m.phi.frequency().d.size())));
  }
  return omegas;
}

ExperimentOutput run_moser_tardos(ObjectReader& p, const ExperimentConfig& cfg, const RunOptions& opt) {
  const auto ctx = parse_group(p.raw_or("group", "Z"));
  p.resolve("group", group_to_json(ctx));
  const auto action = parse_action(ctx, p.raw_or("action", {{"cyclic", 100000}}));
  const auto k = alphabet(p);
  const auto s = set_param(p, ctx, "S", {0});
  const auto eps = tolerance(p, Rational(1, 10));
  EventFamily family;
  {
    const auto& list = p.raw_or("family", json::array({{{"D", {{"interval", {0, 4000}}}}}}));
    if (!list.is_array() || list.empty()) throw UsageError(p.where() + ".family must be a nonempty array");
    json resolved = json::array();
    std::uint64_t next = 0;
    for (std::size_t i = 0; i < list.size(); ++i) {
      ObjectReader m(list[i], p.where() + ".family[" + std::to_string(i) + "]");
      const auto n = non_negative(m.integer("n", static_cast<std::int64_t>(next)), "family n");
      const auto d = set_param(m, ctx, "D", nullptr);
      m.finish();
      family.add(n, GroupBadEvent::frequency_deviation({k, s, eps, d}));
      resolved.push_back(m.resolved());
      next = n + 1;
    }
    p.resolve("family", resolved);
  }
  const double a = p.number("a", GLLLWitnessSpec::default_rate(eps, s.size()));
  const auto seeds = non_negative(p.integer("seeds", 1), "seeds");
  if (seeds == 0) throw UsageError(p.where() + ".seeds must be >= 1");
  MTOptions mt;
  mt.max_steps = non_negative(p.integer("max_steps", 0), "max_steps");
  mt.check_maximality = p.boolean("check_maximality", false);
  mt.transcript = opt.transcript;
  p.finish();

  const auto omegas = witness_omegas(family, a);
  ExperimentOutput out;
  std::ostringstream runs;
  runs << std::setprecision(12);
  runs << "run,seed,converged,steps,t_positive,g_changed,ledger_mismatches,violating_points,worst_dev\n";
  std::vector<std::vector<IndexRow>> index_runs;
  std::uint64_t converged = 0;
  std::uint64_t t_positive = 0;
  std::uint64_t points = 0;
  std::uint64_t bad_points = 0;
  std::uint64_t mismatches = 0;
  for (std::uint64_t r = 0; r < seeds; ++r) {
    const auto seed = seeds == 1 ? cfg.seed : derive_seed(cfg.seed, r);
    const TapeSpace tape(seed, k);
    const auto result = run_mt(action, family, tape, mt);
    const auto frac = resample_fraction(result, tape);
    std::uint64_t violating = 0;
    Rational worst = 0;
    std::uint64_t ledger = 0;
    if (result.converged) {
      ++converged;
      for (const auto& m : family.members()) {
        const auto dev = pointwise_deviation(result.g, k, s, eps, m.phi.frequency().d, action);
        violating += dev.violating_points;
        worst = std::max(worst, dev.worst);
      }
      ledger = ledger_mismatches(result, family, action);
      index_runs.push_back(index_report(result, family, omegas));
      t_positive += frac.t_positive_count;
      points += frac.points;
    }
    bad_points += violating;
    mismatches += ledger;
    runs << r << ',' << seed << ',' << (result.converged ? 1 : 0) << ',' << result.steps << ',' << frac.t_positive
         << ',' << frac.g_changed << ',' << ledger << ',' << violating << ',' << to_string(worst) << '\n';
    if (opt.transcript) {
      std::ostringstream tr;
      write_transcript(tr, result, family);
      out.files["transcript_" + std::to_string(r) + ".jsonl"] = tr.str();
    }
    if (seeds == 1) out.summary["run"] = result.summary(family);
  }
  out.files["runs.csv"] = runs.str();

  std::ostringstream idx;
  idx << std::setprecision(12);
  idx << "n,total_ind,anchors,max_ind,mean,bound,upper95\n";
  json index_json = json::array();
  if (!index_runs.empty()) {
    for (const auto& row : aggregate_index(index_runs)) {
      idx << row.n << ',' << row.total_ind << ',' << row.anchors << ',' << row.max_ind << ',' << row.mean() << ','
          << row.bound() << ',' << row.upper() << '\n';
      index_json.push_back({{"n", row.n}, {"mean", row.mean()}, {"bound", row.bound()}, {"upper95", row.upper()}});
      // Fails only when the bound lies below the whole 95% interval.
      const double lower = row.max_ind <= 1 ? wilson(row.total_ind, row.anchors).lower
                                            : row.mean() - (row.upper() - row.mean());
      if (lower > row.bound()) {
        out.failures.push_back("mean index exceeds omega/(1-omega) for n=" + std::to_string(row.n) + " (slack " +
                               fmt(row.bound() - row.mean()) + ")");
      }
    }
  }
  out.files["index.csv"] = idx.str();

  const double budget = resample_bound(family, omegas);
  const double frac_lower = points ? wilson(t_positive, points).lower : 0.0;
  if (points && frac_lower > budget) {
    out.failures.push_back("fraction(t >= 1) exceeds sum |F_n| omega/(1-omega) (slack " +
                           fmt(budget - static_cast<double>(t_positive) / static_cast<double>(points)) + ")");
  }
  if (converged * 100 < seeds * 99) {
    out.failures.push_back("only " + std::to_string(converged) + " of " + std::to_string(seeds) + " runs converged");
  }
  if (bad_points) out.failures.push_back(std::to_string(bad_points) + " points deviate by >= eps after convergence");
  if (mismatches) out.failures.push_back(std::to_string(mismatches) + " ledger mismatches");

  out.summary["runs"] = seeds;
  out.summary["converged"] = converged == seeds;
  out.summary["converged_runs"] = converged;
  out.summary["index"] = index_json;
  out.summary["resample"] = {{"t_positive", points ? static_cast<double>(t_positive) / static_cast<double>(points) : 0.0},
                             {"budget", budget}};
  out.summary["ledger_mismatches"] = mismatches;
  out.summary["violating_points"] = bad_points;
  return out;
}

ExperimentOutput run_uniform_discrepancy(ObjectReader& p, const ExperimentConfig& cfg, const RunOptions& opt) {
  const auto ctx = GroupCtx::integers();
  const auto k = alphabet(p);
  const auto s = set_param(p, ctx, "S", {0});
  const auto eps = tolerance(p, Rational(1, 10));
  const auto choice = read_sequence(p, k, s, eps, {{"log_growth", "auto"}});
  auto n_max = non_negative(p.integer("n_max", 3), "n_max");
  if (!choice.seq.is_log_growth() && n_max >= choice.seq.length()) {
    throw UsageError(p.where() + ".n_max exceeds the explicit sequence");
  }
  const auto action = parse_action(ctx, p.raw_or("action", {{"cyclic", 100000}}));
  DiscrepancyOptions dopt;
  dopt.a = p.number("a", 0);
  dopt.eps_sum = p.number("eps_sum", 0);
  dopt.max_steps = non_negative(p.integer("max_steps", 0), "max_steps");
  dopt.transcript = opt.transcript;
  p.finish();

  const auto res = uniform_discrepancy_experiment(k, s, eps, choice.seq, n_max, action, cfg.seed, dopt);
  ExperimentOutput out;
  std::ostringstream csv;
  csv << "n,d_size,omega,worst_dev,violating_points\n";
  for (std::size_t i = 0; i < res.family.size(); ++i) {
    csv << res.family.members()[i].n << ',' << res.family.members()[i].phi.frequency().d.size() << ','
        << res.omegas[i] << ',';
    if (i < res.per_n.size()) {
      csv << to_string(res.per_n[i].worst) << ',' << res.per_n[i].violating_points << '\n';
    } else {
      csv << ",\n";
    }
  }
  out.files["per_n.csv"] = csv.str();
  if (opt.transcript) {
    std::ostringstream tr;
    write_transcript(tr, res.run, res.family);
    out.files["transcript.jsonl"] = tr.str();
  }
  json sizes = json::array();
  for (std::uint64_t n = 0; n <= n_max; ++n) sizes.push_back(choice.seq.size(n));
  const auto growth = growth_profile(action, s, 8);
  out.summary = {{"sequence", choice.info},
                 {"d_sizes", sizes},
                 {"growth_profile", growth},
                 {"certificate", res.certificate},
                 {"certified", res.certified},
                 {"run", res.run.summary(res.family)},
                 {"resample", {{"t_positive", res.fraction.t_positive}, {"budget", res.resample_budget}}},
                 {"all_within", res.all_within()}};
  if (!res.warning.empty()) out.summary["warning"] = res.warning;
  if (res.certificate == "glll" || !res.glll.rows.empty()) out.summary["glll"] = res.glll.to_json();
  if (res.family.size() == 1) out.summary["slll_margin"] = res.slll.slll_margin;
  if (res.certified && !res.run.converged) out.failures.push_back("certified instance did not converge");
  if (res.run.converged && !res.all_within()) out.failures.push_back("a point deviates by >= eps after convergence");
  if (res.certified && res.fraction.t_positive > res.resample_budget) {
    out.failures.push_back("fraction(t >= 1) exceeds the resample budget (slack " +
                           fmt(res.resample_budget - res.fraction.t_positive) + ")");
  }
  return out;
}

ExperimentOutput run_resfin(ObjectReader& p, const ExperimentConfig&, const RunOptions&) {
  const auto ctx = GroupCtx::integers();
  const auto k = alphabet(p);
  const auto n = p.integer("n", 2);
  if (n < 1) throw UsageError(p.where() + ".n must be >= 1");
  std::vector<Pattern> patterns;
  if (p.has("patterns")) {
    const auto& list = p.raw("patterns");
    if (!list.is_array() || list.empty()) throw UsageError(p.where() + ".patterns must be a nonempty array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      ObjectReader e(list[i], p.where() + ".patterns[" + std::to_string(i) + "]");
      const auto sites = set_param(e, ctx, "sites", nullptr);
      const auto& vals = e.raw("values");
      e.finish();
      std::vector<Color> values;
      if (!vals.is_array()) throw UsageError(e.where() + ".values must be an array");
      for (const auto& v : vals) {
        if (!v.is_number_integer() || v.get<std::int64_t>() < 0) throw UsageError(e.where() + ".values must be colors");
        values.push_back(static_cast<Color>(v.get<std::int64_t>()));
      }
      patterns.emplace_back(sites, std::move(values), k);
    }
  } else {
    const auto sites = set_param(p, ctx, "sites", {0, 1});
    if (sites.size() > 12) throw UsageError(p.where() + ".sites: at most 12 sites");
    for (std::uint64_t c = 0; c < int_pow(k, sites.size()); ++c) patterns.push_back(Pattern::from_code(sites, k, c));
  }
  p.finish();

  const auto report = resfin_measure(k, n, patterns);
  ExperimentOutput out;
  std::ostringstream csv;
  csv << "pattern,sites,value,residues,uniform_value,shift_invariant\n";
  std::size_t distinct_mismatch = 0;
  for (const auto& r : report.rows) {
    std::string sites;
    for (const auto& g : r.phi.domain()) sites += (sites.empty() ? "" : " ") + std::to_string(g.value());
    std::string vals;
    for (const auto v : r.phi.values()) vals += std::to_string(v);
    const Rational uniform(1, static_cast<std::int64_t>(int_pow(k, r.phi.size())));
    csv << vals << ',' << sites << ',' << to_string(r.value) << ',' << r.residues << ',' << to_string(uniform) << ','
        << (r.shift_invariant ? 1 : 0) << '\n';
    if (!r.shift_invariant) out.failures.push_back("cylinder value of " + vals + " at {" + sites + "} not shift invariant");
    // With all sites in distinct residues the periodic measure agrees with u_k.
    if (r.residues == r.phi.size() && r.value != uniform) ++distinct_mismatch;
  }
  if (distinct_mismatch) {
    out.failures.push_back(std::to_string(distinct_mismatch) + " patterns on distinct residues differ from k^-|phi|");
  }
  out.files["cylinders.csv"] = csv.str();
  out.summary = {{"patterns", report.rows.size()}, {"all_invariant", report.all_invariant()}};
  return out;
}

ExperimentOutput run_approx_invariant(ObjectReader& p, const ExperimentConfig& cfg, const RunOptions&) {
  const auto ctx = GroupCtx::integers();
  const auto k = alphabet(p);
  const auto s = set_param(p, ctx, "S", {0});
  const auto eps = tolerance(p, Rational(1, 10));
  const auto d = set_param(p, ctx, "D", {{"interval", {0, 4000}}});
  const auto m = p.integer("M", 100000);
  const auto shift_range = p.integer("shift_range", 8);
  if (m < 1 || shift_range < 1) throw UsageError(p.where() + ": M and shift_range must be positive");
  p.finish();

  const auto res = approx_invariant_measure(k, s, eps, d, m, cfg.seed, shift_range);
  ExperimentOutput out;
  out.summary = {{"converged", res.run.converged},
                 {"steps", res.run.steps},
                 {"support_size", res.support_size},
                 {"worst_shift_dev", to_string(res.worst_shift_dev)},
                 {"worst_shift", res.worst_shift},
                 {"within", res.within()}};
  if (!res.run.converged) out.failures.push_back("resampling did not converge");
  if (!res.within()) {
    out.failures.push_back("shifted cylinder value deviates by " + to_string(res.worst_shift_dev) + " >= eps at shift " +
                           std::to_string(res.worst_shift));
  }
  return out;
}

// "log2" | {"constant": c} | [h0, h1, ...].
std::function<std::uint64_t(std::uint64_t)> height_rule(const json& h, const std::string& where) {
  if (h.is_string() && h.get<std::string>() == "log2") {
    return [](std::uint64_t n) { return static_cast<std::uint64_t>(std::bit_width(n + 1)); };
  }
  if (h.is_object() && h.size() == 1 && h.contains("constant") && h["constant"].is_number_integer() &&
      h["constant"].get<std::int64_t>() >= 1) {
    const auto c = h["constant"].get<std::uint64_t>();
    return [c](std::uint64_t) { return c; };
  }
  if (h.is_array() && !h.empty()) {
    std::vector<std::uint64_t> table;
    for (const auto& v : h) {
      if (!v.is_number_integer() || v.get<std::int64_t>() < 1) throw UsageError(where + " entries must be positive");
      table.push_back(v.get<std::uint64_t>());
    }
    return [table, where](std::uint64_t n) {
      if (n >= table.size()) throw UsageError(where + " table has no entry for n=" + std::to_string(n));
      return table[n];
    };
  }
  throw UsageError(where + " must be \"log2\", {\"constant\": c} or a table");
}

ExperimentOutput run_rokhlin_bad(ObjectReader& p, const ExperimentConfig& cfg, const RunOptions& opt) {
  struct TowerParams {
    Rational eps;
    std::function<std::uint64_t(std::uint64_t)> h;
    std::int64_t m;
    std::int64_t offset;
  };
  std::optional<TowerParams> tower;
  if (p.has("tower")) {
    auto t = p.object("tower");
    TowerParams tp{t.rational("eps", Rational(1, 10)), height_rule(t.raw_or("h", {{"constant", 50}}), t.where() + ".h"),
                   t.integer("M", 420000), t.integer("offset", 0)};
    if (tp.eps <= 0 || tp.eps >= 1) throw UsageError(t.where() + ".eps must lie in (0, 1)");
    t.finish();
    p.resolve("tower", t.resolved());
    tower = tp;
  }
  BadSequenceSpec spec;
  spec.i_max = non_negative(p.integer("i_max", 6), "i_max");
  if (spec.i_max > 12) throw UsageError(p.where() + ".i_max must be <= 12");
  spec.k_probe = non_negative(p.integer("k_probe", 0), "k_probe");
  if (spec.k_probe > spec.i_max) throw UsageError(p.where() + ".k_probe must be <= i_max");
  spec.m = p.integer("M", 0);
  spec.h = height_rule(p.raw_or("h", "log2"), p.where() + ".h");
  p.finish();
  spec.seed = cfg.seed;

  ExperimentOutput out;
  if (tower) {
    const auto plan = plan_intervals(tower->h, tower->eps);
    const auto build = build_tower(plan, tower->m, tower->offset);
    const auto cap = verify_capture(build, plan);
    std::ostringstream levels;
    build.write_level_csv(levels, plan);
    out.files["tower_levels.csv"] = levels.str();
    out.summary["tower"] = {{"N", plan.n},
                            {"ell", plan.ell},
                            {"H", plan.height()},
                            {"M", build.tower.m},
                            {"copies", build.tower.copies},
                            {"residual", build.tower.residual},
                            {"slack_a", to_string(plan.slack_a)},
                            {"slack_b", to_string(plan.slack_b)},
                            {"mu_a", to_string(build.mu_a)},
                            {"mu_b", to_string(build.mu_b)},
                            {"capture_fraction", to_string(cap.fraction)},
                            {"all_b_captured", cap.all_b_captured},
                            {"reverified", cap.reverified}};
    if (!(build.mu_a < tower->eps)) out.failures.push_back("mu(A) >= eps (" + to_string(build.mu_a) + ")");
    if (cap.fraction < 1 - tower->eps) {
      out.failures.push_back("capture fraction below 1 - eps (slack " + to_string(cap.fraction - (1 - tower->eps)) + ")");
    }
    if (!cap.all_b_captured || !cap.reverified) out.failures.push_back("some point of B lacks a verified witness");
  }

  const auto report = bad_sequence_experiment(spec, opt.jobs);
  out.summary["bad_sequence"] = report.to_json();
  out.summary["bad_sequence"]["liminf_side"] = "interpretation: L_k is the complement of A_{>=k}";
  std::ostringstream bands;
  bands << "i,eps,n_lo,n_count,ell,offset,mu_a,mu_b,capture_own,limsup_hit,liminf_hit\n";
  for (const auto& b : report.bands) {
    bands << b.i << ',' << to_string(b.eps) << ',' << b.n_lo << ',' << b.n_count << ',' << b.ell << ',' << b.offset
          << ',' << to_string(b.mu_a) << ',' << to_string(b.mu_b) << ',' << to_string(b.capture_own) << ','
          << to_string(b.limsup_hit) << ',' << to_string(b.liminf_hit) << '\n';
    if (b.capture_own < 1 - b.eps) {
      out.failures.push_back("band " + std::to_string(b.i) + " captures less than 1 - eps_i (slack " +
                             to_string(b.capture_own - (1 - b.eps)) + ")");
    }
  }
  out.files["bands.csv"] = bands.str();
  for (std::size_t k = 0; k < report.mu_a_geq.size(); ++k) {
    const Rational cap(1, std::int64_t{1} << k);
    if (report.mu_a_geq[k] > cap) {
      out.failures.push_back("mu(A_>=" + std::to_string(k) + ") exceeds 2^-" + std::to_string(k) + " (slack " +
                             to_string(cap - report.mu_a_geq[k]) + ")");
    }
  }
  return out;
}

const std::map<std::string, Runner>& runners() {
  static const std::map<std::string, Runner> table{
      {"ergodic-converge", run_ergodic_converge},   {"concentration-sweep", run_concentration_sweep},
      {"lll-check", run_lll_check},                 {"moser-tardos", run_moser_tardos},
      {"uniform-discrepancy", run_uniform_discrepancy}, {"resfin", run_resfin},
      {"approx-invariant", run_approx_invariant},   {"rokhlin-bad", run_rokhlin_bad},
  };
  return table;
}

const std::map<std::string, std::string>& descriptions() {
  static const std::map<std::string, std::string> text{
      {"ergodic-converge",
       "Pattern frequencies of i.i.d. uniform configurations of Z along an averaging sequence D_n.\n"
       "Reproduces almost-sure convergence via Borel-Cantelli: the fraction of samples that still deviate\n"
       "beyond n is compared with the partial tail sum of the concentration bound.\n"
       "params:\n"
       "  k          integer >= 2                     default 2\n"
       "  S          set of integers                  default [0]\n"
       "  eps        number or \"p/q\"                  default 1/10\n"
       "  sequence   {\"log_growth\": C | \"auto\", \"a\": rate, \"eps_sum\": x} or {\"explicit\": [sets]}\n"
       "             default {\"log_growth\": \"auto\"} (C sized by the general local lemma conditions)\n"
       "  n_max      integer                          default 100\n"
       "  samples    integer                          default 200\n"
       "output: summary.json, detail.csv\n"},
      {"concentration-sweep",
       "Monte Carlo deviation probabilities of Phi(k, S, eps, D) on Z/modulus against the concentration\n"
       "bound 2 exp(-eps^2 |D| / (2|S|^3)), plus the expectation identity for pattern counts.\n"
       "params:\n"
       "  ks         array of k                       default [2, 3]\n"
       "  s_sizes    array of |S| (S = {0..|S|-1})    default [1, 2]\n"
       "  epsilons   array                            default [0.1, 0.2]\n"
       "  d_sizes    array of |D| (D = {0..|D|-1})    default [500, 2000]\n"
       "  modulus    integer                          default 100000\n"
       "  trials     integer                          default 10000\n"
       "output: summary.json, detail.csv\n"},
      {"lll-check",
       "Symmetric local lemma margin e p (d+1) for one frequency-deviation event, optional threshold\n"
       "search for |D|, and optional general local lemma certificate for |D_n| = ceil(C ln(n+2)).\n"
       "params:\n"
       "  group      \"Z\", \"Z^d\", \"Fr\", {\"cyclic\": M}   default \"Z\"\n"
       "  k, S, eps, D                             defaults 2, [0], 1/10, {\"interval\": [0, 4000]}\n"
       "  threshold  {\"shape\": generic|interval|random, \"search_cap\": m}   optional\n"
       "  glll       {\"a\": rate, \"eps_sum\": x, \"n_max\": n, \"C\": number | \"auto\"}   optional\n"
       "exit 2 with \"slll_margin ≥ 1\" when the margin does not certify.\n"
       "output: summary.json, inequalities.csv\n"},
      {"moser-tardos",
       "Moser-Tardos resampling of a family of frequency-deviation events on a finite translation action,\n"
       "with pointwise checks after convergence, index and resample statistics and the ledger identity.\n"
       "params:\n"
       "  group, action     default \"Z\", {\"cyclic\": 100000}; {\"torus\": [M1, M2]} over Z^2\n"
       "  k, S, eps         defaults 2, [0], 1/10\n"
       "  family            [{\"n\": index, \"D\": set}]   default [{\"D\": {\"interval\": [0, 4000]}}]\n"
       "  a                 witness rate, omega_n = exp(-a |D_n|)   default eps^2 / (4|S|^3)\n"
       "  seeds             number of independent runs   default 1\n"
       "  max_steps         0 picks 1000 x events      default 0\n"
       "  check_maximality  boolean                    default false\n"
       "output: summary.json, runs.csv, index.csv, transcript_<run>.jsonl with --transcript\n"},
      {"uniform-discrepancy",
       "Uniform frequencies for every point of a finite action after resampling the whole family\n"
       "(Phi(k, S, eps, D_n))_{n <= n_max}: the desk version of Theorems 4′/5′. The family is certified by\n"
       "the symmetric lemma (one member) or the general lemma, and runs with a warning otherwise.\n"
       "params:\n"
       "  k, S, eps    defaults 2, [0], 1/10\n"
       "  sequence     as in ergodic-converge          default {\"log_growth\": \"auto\"}\n"
       "  n_max        integer                         default 3\n"
       "  action       {\"cyclic\": M}                  default {\"cyclic\": 100000}\n"
       "  a, eps_sum   witness rate and resample budget (0 picks the defaults)\n"
       "  max_steps    integer                         default 0\n"
       "output: summary.json (with growth_profile), per_n.csv, transcript.jsonl with --transcript\n"},
      {"resfin",
       "Cylinder values of the uniform measure on n-periodic configurations of Z: exact shift invariance\n"
       "and agreement with k^-|phi| when the sites of phi lie in distinct residues mod n.\n"
       "params:\n"
       "  k          default 2\n"
       "  n          period, default 2\n"
       "  patterns   [{\"sites\": set, \"values\": [colors]}]   optional\n"
       "  sites      every coloring of these sites when patterns is absent   default [0, 1]\n"
       "output: summary.json, cylinders.csv\n"},
      {"approx-invariant",
       "An approximately invariant measure M_D pi_g(0) from one resampled coloring of Z/M, checked by\n"
       "comparing the cylinder values of its shifts with k^-|S|.\n"
       "params:\n"
       "  k, S, eps, D   defaults 2, [0], 1/10, {\"interval\": [0, 4000]}\n"
       "  M              default 100000\n"
       "  shift_range    shifts 0..shift_range-1, default 8\n"
       "output: summary.json\n"},
      {"rokhlin-bad",
       "Rokhlin towers on Z/M defeating an averaging sequence: the interval plan and tower of Lemma A.1,\n"
       "then bands i = 0..i_max with eps_i = 2^-(i+1) sharing one Z/M (seeded base offsets).\n"
       "The liminf side uses the complement of A_{>=k} and is an interpretation.\n"
       "params:\n"
       "  tower     {\"eps\": x, \"h\": rule, \"M\": m, \"offset\": o}   optional; defaults 1/10, {\"constant\": 50}, 420000, 0\n"
       "  i_max     default 6\n"
       "  k_probe   bands i >= k_probe enter the all-bands statistic, default 0\n"
       "  M         0 picks 2 max_i H_i ceil(2/eps_i) + 1\n"
       "  h         \"log2\" (ceil(log2(n+2))), {\"constant\": c} or a table   default \"log2\"\n"
       "output: summary.json, bands.csv, tower_levels.csv with a tower block\n"},
  };
  return text;
}

}  // namespace

ExperimentOutput run_experiment(const ExperimentConfig& cfg, const RunOptions& options) {
  const auto it = runners().find(cfg.kind);
  if (it == runners().end()) throw UsageError("unknown experiment kind '" + cfg.kind + "'");
  ObjectReader params(cfg.params, "params");
  auto out = it->second(params, cfg, options);
  json summary = {{"kind", cfg.kind},
                  {"seed", cfg.seed},
                  {"version", tool_version()},
                  {"config", {{"kind", cfg.kind}, {"seed", cfg.seed}, {"params", params.resolved()}}},
                  {"verdict", out.failures.empty() ? "pass" : "fail"},
                  {"failures", out.failures}};
  for (auto& [key, value] : out.summary.items()) summary[key] = value;
  out.summary = std::move(summary);
  return out;
}

void write_outputs(const ExperimentOutput& out, const std::string& dir, const RunOptions& options) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw UsageError("cannot create output directory '" + dir + "': " + ec.message());
  auto put = [&](const std::string& name, const std::string& text) {
    std::ofstream f(fs::path(dir) / name, std::ios::binary);
    if (!f) throw UsageError("cannot write '" + (fs::path(dir) / name).string() + "'");
    f << text;
  };
  put("summary.json", out.summary.dump(2) + "\n");
  for (const auto& [name, text] : out.files) put(name, text);
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::ostringstream ts;
  ts << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ");
  const json meta = {{"finished_utc", ts.str()}, {"jobs", options.jobs}, {"version", tool_version()}};
  put("meta.json", meta.dump(2) + "\n");
}

std::string describe_kind(const std::string& kind) {
  const auto it = descriptions().find(kind);
  if (it == descriptions().end()) throw UsageError("unknown experiment kind '" + kind + "'");
  return kind + "\n" + it->second;
}

}  // namespace ergolab
