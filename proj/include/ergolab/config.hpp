#pragma once

// Experiment configuration: strict JSON readers (unknown keys are errors)
// and the literal syntax for groups, sets, actions and tolerances.

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "ergolab/action.hpp"
#include "ergolab/group.hpp"
#include "ergolab/rational.hpp"

namespace ergolab {

/// Reads one JSON object field by field, recording resolved values
/// (defaults included). finish() rejects keys that were never read.
class ObjectReader {
 public:
  ObjectReader(const nlohmann::json& obj, std::string where);

  bool has(const std::string& key) const;
  const nlohmann::json& raw(const std::string& key);
  nlohmann::json raw_or(const std::string& key, const nlohmann::json& fallback);

  std::int64_t integer(const std::string& key);
  std::int64_t integer(const std::string& key, std::int64_t fallback);
  double number(const std::string& key, double fallback);
  bool boolean(const std::string& key, bool fallback);
  std::string string(const std::string& key, const std::string& fallback);
  /// Decimal number or "p/q" string.
  Rational rational(const std::string& key, const Rational& fallback);
  ObjectReader object(const std::string& key);

  /// Stores a value in the resolved copy (e.g. a parsed literal).
  void resolve(const std::string& key, nlohmann::json value) { resolved_[key] = std::move(value); }
  void finish() const;

  const nlohmann::json& resolved() const { return resolved_; }
  const std::string& where() const { return where_; }

 private:
  const nlohmann::json* obj_;
  std::string where_;
  std::set<std::string> seen_;
  nlohmann::json resolved_ = nlohmann::json::object();
};

/// "Z", "Z^2", "Z^3", "F1".."F3", {"cyclic": M} or {"cyclic": [M1, M2]}.
GroupCtx parse_group(const nlohmann::json& j);
nlohmann::json group_to_json(const GroupCtx& ctx);

/// Element literal: integer (Z, Z/M), coordinate array (Z^d, products) or
/// word string (free groups).
GroupElem parse_element(const GroupCtx& ctx, const nlohmann::json& j);

/// Array of element literals, or {"interval": [lo, hi]} for {lo..hi-1}.
GroupSet parse_set(const GroupCtx& ctx, const nlohmann::json& j);
nlohmann::json set_to_json(const GroupSet& set);

/// {"cyclic": M} or {"torus": [M1, M2]} over the given group.
FiniteAction parse_action(const GroupCtx& ctx, const nlohmann::json& j);

struct ExperimentConfig {
  std::string kind;
  std::uint64_t seed = 1;
  nlohmann::json params = nlohmann::json::object();
  std::string output_dir;  // empty: not set in the file
};

const std::vector<std::string>& experiment_kinds();

/// Validates the top level; parameter blocks are validated per kind.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

}  // namespace ergolab
