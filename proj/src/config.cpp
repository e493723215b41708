#include "ergolab/config.hpp"

#include <algorithm>
#include <fstream>

#include "ergolab/error.hpp"

namespace ergolab {

ObjectReader::ObjectReader(const nlohmann::json& obj, std::string where) : obj_(&obj), where_(std::move(where)) {
  if (!obj.is_object()) throw UsageError(where_ + ": expected an object");
}

bool ObjectReader::has(const std::string& key) const { return obj_->contains(key); }

const nlohmann::json& ObjectReader::raw(const std::string& key) {
  if (!has(key)) throw UsageError(where_ + ": missing required key '" + key + "'");
  seen_.insert(key);
  resolved_[key] = (*obj_)[key];
  return (*obj_)[key];
}

nlohmann::json ObjectReader::raw_or(const std::string& key, const nlohmann::json& fallback) {
  if (!has(key)) {
    resolved_[key] = fallback;
    return fallback;
  }
  return raw(key);
}

std::int64_t ObjectReader::integer(const std::string& key) {
  const auto& v = raw(key);
  if (!v.is_number_integer()) throw UsageError(where_ + "." + key + ": expected an integer");
  return v.get<std::int64_t>();
}

std::int64_t ObjectReader::integer(const std::string& key, std::int64_t fallback) {
  if (!has(key)) {
    resolved_[key] = fallback;
    return fallback;
  }
  return integer(key);
}

double ObjectReader::number(const std::string& key, double fallback) {
  if (!has(key)) {
    resolved_[key] = fallback;
    return fallback;
  }
  const auto& v = raw(key);
  if (!v.is_number()) throw UsageError(where_ + "." + key + ": expected a number");
  return v.get<double>();
}

bool ObjectReader::boolean(const std::string& key, bool fallback) {
  if (!has(key)) {
    resolved_[key] = fallback;
    return fallback;
  }
  const auto& v = raw(key);
  if (!v.is_boolean()) throw UsageError(where_ + "." + key + ": expected true or false");
  return v.get<bool>();
}

std::string ObjectReader::string(const std::string& key, const std::string& fallback) {
  if (!has(key)) {
    resolved_[key] = fallback;
    return fallback;
  }
  const auto& v = raw(key);
  if (!v.is_string()) throw UsageError(where_ + "." + key + ": expected a string");
  return v.get<std::string>();
}

Rational ObjectReader::rational(const std::string& key, const Rational& fallback) {
  Rational r = fallback;
  if (has(key)) {
    const auto& v = raw(key);
    if (v.is_number()) {
      r = rational_from_decimal(v.get<double>());
    } else if (v.is_string()) {
      r = parse_rational(v.get<std::string>());
    } else {
      throw UsageError(where_ + "." + key + ": expected a number or a \"p/q\" string");
    }
  }
  resolved_[key] = to_string(r);
  return r;
}

ObjectReader ObjectReader::object(const std::string& key) {
  const auto& v = raw(key);
  if (!v.is_object()) throw UsageError(where_ + "." + key + ": expected an object");
  return {v, where_ + "." + key};
}

void ObjectReader::finish() const {
  for (const auto& [key, value] : obj_->items()) {
    if (!seen_.contains(key)) throw UsageError(where_ + ": unknown key '" + key + "'");
  }
}

GroupCtx parse_group(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "Z") return GroupCtx::integers();
    if (s.size() == 3 && s.starts_with("Z^") && s[2] >= '1' && s[2] <= '3') return GroupCtx::lattice(s[2] - '0');
    if (s.size() == 2 && s[0] == 'F' && s[1] >= '1' && s[1] <= '3') return GroupCtx::free_group(s[1] - '0');
    throw UsageError("unknown group '" + s + "' (use Z, Z^d, Fr or {\"cyclic\": ...})");
  }
  if (j.is_object() && j.size() == 1 && j.contains("cyclic")) {
    const auto& m = j["cyclic"];
    if (m.is_number_integer()) return GroupCtx::cyclic(m.get<std::int64_t>());
    if (m.is_array() && m.size() == 2 && m[0].is_number_integer() && m[1].is_number_integer()) {
      return GroupCtx::cyclic_product(m[0].get<std::int64_t>(), m[1].get<std::int64_t>());
    }
  }
  throw UsageError("malformed group literal " + j.dump());
}

nlohmann::json group_to_json(const GroupCtx& ctx) {
  switch (ctx.kind()) {
    case GroupKind::Cyclic:
      return {{"cyclic", ctx.modulus()}};
    case GroupKind::CyclicProduct:
      return {{"cyclic", {ctx.modulus(0), ctx.modulus(1)}}};
    default:
      return ctx.name();
  }
}

GroupElem parse_element(const GroupCtx& ctx, const nlohmann::json& j) {
  switch (ctx.kind()) {
    case GroupKind::Integers:
    case GroupKind::Cyclic:
      if (!j.is_number_integer()) throw UsageError("expected an integer element of " + ctx.name() + ", got " + j.dump());
      return ctx.integer(j.get<std::int64_t>());
    case GroupKind::IntegerLattice:
    case GroupKind::CyclicProduct: {
      if (!j.is_array()) throw UsageError("expected a coordinate array in " + ctx.name() + ", got " + j.dump());
      std::vector<std::int64_t> coords;
      for (const auto& c : j) {
        if (!c.is_number_integer()) throw UsageError("coordinates must be integers: " + j.dump());
        coords.push_back(c.get<std::int64_t>());
      }
      return ctx.vec(coords);
    }
    case GroupKind::FreeGroup:
      if (!j.is_string()) throw UsageError("expected a word in " + ctx.name() + ", got " + j.dump());
      return ctx.word(j.get<std::string>());
  }
  throw UsageError("unsupported group");
}

GroupSet parse_set(const GroupCtx& ctx, const nlohmann::json& j) {
  if (j.is_object()) {
    if (j.size() != 1 || !j.contains("interval")) throw UsageError("set objects take the single key 'interval'");
    const auto& iv = j["interval"];
    if (!iv.is_array() || iv.size() != 2 || !iv[0].is_number_integer() || !iv[1].is_number_integer()) {
      throw UsageError("interval must be [lo, hi]");
    }
    const auto lo = iv[0].get<std::int64_t>();
    const auto hi = iv[1].get<std::int64_t>();
    if (hi <= lo) throw UsageError("interval [lo, hi) must be nonempty");
    return GroupSet::interval(ctx, lo, hi);
  }
  if (!j.is_array()) throw UsageError("expected a set literal, got " + j.dump());
  std::vector<GroupElem> elems;
  for (const auto& e : j) elems.push_back(parse_element(ctx, e));
  return {ctx, std::move(elems)};
}

nlohmann::json set_to_json(const GroupSet& set) {
  const auto& ctx = set.ctx();
  if ((ctx.kind() == GroupKind::Integers || ctx.kind() == GroupKind::Cyclic) && set.size() > 8) {
    const auto lo = set[0].value();
    const auto hi = set[set.size() - 1].value() + 1;
    if (hi - lo == static_cast<std::int64_t>(set.size())) return {{"interval", {lo, hi}}};
  }
  nlohmann::json out = nlohmann::json::array();
  for (const auto& g : set) {
    switch (ctx.kind()) {
      case GroupKind::Integers:
      case GroupKind::Cyclic:
        out.push_back(g.value());
        break;
      case GroupKind::IntegerLattice:
      case GroupKind::CyclicProduct:
        out.push_back(g.normal_form());
        break;
      case GroupKind::FreeGroup:
        out.push_back(ctx.format(g));
        break;
    }
  }
  return out;
}

FiniteAction parse_action(const GroupCtx& ctx, const nlohmann::json& j) {
  if (j.is_object() && j.size() == 1) {
    if (j.contains("cyclic") && j["cyclic"].is_number_integer()) {
      return FiniteAction::cyclic(ctx, j["cyclic"].get<std::int64_t>());
    }
    if (j.contains("torus") && j["torus"].is_array() && j["torus"].size() == 2) {
      return FiniteAction::torus(ctx, j["torus"][0].get<std::int64_t>(), j["torus"][1].get<std::int64_t>());
    }
  }
  throw UsageError("malformed action literal " + j.dump() + " (use {\"cyclic\": M} or {\"torus\": [M1, M2]})");
}

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds{"ergodic-converge",    "concentration-sweep", "lll-check",
                                              "moser-tardos",        "uniform-discrepancy", "resfin",
                                              "approx-invariant",    "rokhlin-bad"};
  return kinds;
}

ExperimentConfig parse_config(const nlohmann::json& j) {
  ObjectReader top(j, "config");
  ExperimentConfig cfg;
  cfg.kind = top.string("kind", "");
  const auto& kinds = experiment_kinds();
  if (std::find(kinds.begin(), kinds.end(), cfg.kind) == kinds.end()) {
    throw UsageError("config.kind: unknown experiment kind '" + cfg.kind + "'");
  }
  const auto seed = top.integer("seed", 1);
  if (seed < 0) throw UsageError("config.seed must be >= 0");
  cfg.seed = static_cast<std::uint64_t>(seed);
  cfg.params = top.raw_or("params", nlohmann::json::object());
  if (!cfg.params.is_object()) throw UsageError("config.params: expected an object");
  if (top.has("output")) {
    auto out = top.object("output");
    cfg.output_dir = out.string("dir", "");
    out.finish();
  }
  top.finish();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

}  // namespace ergolab
