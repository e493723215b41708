#pragma once

// Finite group actions: translations on Z/M and on the torus Z/M1 x Z/M2
// (total), and windows of a group acted on by left multiplication (partial;
// translates that leave the window are undefined, never wrapped).

#include <cstdint>
#include <optional>
#include <vector>

#include "ergolab/group.hpp"

namespace ergolab {

using Point = std::uint32_t;

enum class ActionFlavor { CyclicTranslation, TorusTranslation, Window };

/// A translation by a fixed group element, compiled for a total action.
class Translation {
 public:
  Translation() = default;
  Translation(std::int64_t a, std::int64_t b, std::int64_t m1, std::int64_t m2)
      : a_(a), b_(b), m1_(m1), m2_(m2) {}

  Point operator()(Point x) const {
    if (m2_ == 0) {
      const std::int64_t y = x + a_;
      return static_cast<Point>(y >= m1_ ? y - m1_ : y);
    }
    std::int64_t i = x / m2_ + a_;
    std::int64_t j = x % m2_ + b_;
    if (i >= m1_) i -= m1_;
    if (j >= m2_) j -= m2_;
    return static_cast<Point>(i * m2_ + j);
  }

 private:
  std::int64_t a_ = 0;
  std::int64_t b_ = 0;
  std::int64_t m1_ = 1;
  std::int64_t m2_ = 0;
};

class FiniteAction {
 public:
  /// Translation action on Z/M; `ctx` is Z or Z/M.
  static FiniteAction cyclic(GroupCtx ctx, std::int64_t modulus);
  static FiniteAction cyclic(std::int64_t modulus) { return cyclic(GroupCtx::integers(), modulus); }
  /// Translation action on Z/M1 x Z/M2; `ctx` is Z^2 or Z/M1 x Z/M2.
  /// Point (i, j) has index i*M2 + j.
  static FiniteAction torus(GroupCtx ctx, std::int64_t m1, std::int64_t m2);
  static FiniteAction torus(std::int64_t m1, std::int64_t m2) { return torus(GroupCtx::lattice(2), m1, m2); }
  /// Left multiplication on the finite window W; gamma * w outside W is undefined.
  static FiniteAction window(GroupSet w);

  ActionFlavor flavor() const { return flavor_; }
  const GroupCtx& ctx() const { return ctx_; }
  std::size_t size() const { return size_; }
  bool is_total() const { return flavor_ != ActionFlavor::Window; }
  std::int64_t modulus(int i = 0) const { return i == 0 ? m1_ : m2_; }

  std::optional<Point> act(const GroupElem& g, Point x) const;
  /// act() for callers that require the translate; throws BoundaryError otherwise.
  Point act_defined(const GroupElem& g, Point x) const;

  /// Fast form of act(g, .) for total actions.
  Translation translation(const GroupElem& g) const;
  std::vector<Translation> translations(const GroupSet& set) const;

  /// Group element labelling a window point (window flavor only).
  const GroupElem& label(Point x) const;

 private:
  FiniteAction(GroupCtx ctx, ActionFlavor flavor) : ctx_(ctx), flavor_(flavor), window_(ctx) {}

  GroupCtx ctx_;
  ActionFlavor flavor_;
  std::size_t size_ = 0;
  std::int64_t m1_ = 0;
  std::int64_t m2_ = 0;
  GroupSet window_;
};

enum class Freeness { Free, NotFree, Indeterminate };

const char* to_string(Freeness f);

/// True iff for every set S_i, distinct elements of S_i move every point to
/// distinct points. A definite collision wins over window partiality.
Freeness is_sd_free(const FiniteAction& action, const std::vector<GroupSet>& sets);

/// Freeness of a single set at the single point x.
Freeness is_free_at(const FiniteAction& action, const GroupSet& set, Point x);

/// max_x |S^n . x| for n = 1..n_max (entry n-1). Requires a total action.
std::vector<std::size_t> growth_profile(const FiniteAction& action, const GroupSet& s, int n_max);

}  // namespace ergolab
