#include "ergolab/action.hpp"

#include <algorithm>

#include "ergolab/error.hpp"

namespace ergolab {

namespace {

std::int64_t mod(std::int64_t v, std::int64_t m) {
  const std::int64_t r = v % m;
  return r < 0 ? r + m : r;
}

}  // namespace

FiniteAction FiniteAction::cyclic(GroupCtx ctx, std::int64_t modulus) {
  if (modulus < 1 || modulus > (std::int64_t{1} << 31)) throw UsageError("cyclic action size out of range");
  if (ctx.kind() == GroupKind::Cyclic) {
    if (ctx.modulus() != modulus) throw UsageError("Z/M context must match the action modulus");
  } else if (ctx.kind() != GroupKind::Integers) {
    throw UsageError("cyclic translation needs Z or Z/M, got " + ctx.name());
  }
  FiniteAction a(ctx, ActionFlavor::CyclicTranslation);
  a.size_ = static_cast<std::size_t>(modulus);
  a.m1_ = modulus;
  return a;
}

FiniteAction FiniteAction::torus(GroupCtx ctx, std::int64_t m1, std::int64_t m2) {
  if (m1 < 1 || m2 < 1 || m1 * m2 > (std::int64_t{1} << 31)) throw UsageError("torus size out of range");
  if (ctx.kind() == GroupKind::CyclicProduct) {
    if (ctx.modulus(0) != m1 || ctx.modulus(1) != m2) throw UsageError("torus context mismatch");
  } else if (!(ctx.kind() == GroupKind::IntegerLattice && ctx.arity() == 2)) {
    throw UsageError("torus translation needs Z^2 or Z/M1 x Z/M2, got " + ctx.name());
  }
  FiniteAction a(ctx, ActionFlavor::TorusTranslation);
  a.size_ = static_cast<std::size_t>(m1 * m2);
  a.m1_ = m1;
  a.m2_ = m2;
  return a;
}

FiniteAction FiniteAction::window(GroupSet w) {
  FiniteAction a(w.ctx(), ActionFlavor::Window);
  a.size_ = w.size();
  a.window_ = std::move(w);
  return a;
}

std::optional<Point> FiniteAction::act(const GroupElem& g, Point x) const {
  ctx_.check(g);
  if (x >= size_) throw UsageError("point outside the action");
  if (flavor_ == ActionFlavor::Window) {
    const auto idx = window_.index_of(ctx_.op(g, window_[x]));
    if (idx < 0) return std::nullopt;
    return static_cast<Point>(idx);
  }
  return translation(g)(x);
}

Point FiniteAction::act_defined(const GroupElem& g, Point x) const {
  const auto y = act(g, x);
  if (!y) {
    throw BoundaryError("translate " + ctx_.format(g) + " . " + ctx_.format(window_[x]) + " leaves the window");
  }
  return *y;
}

Translation FiniteAction::translation(const GroupElem& g) const {
  ctx_.check(g);
  const auto& nf = g.normal_form();
  switch (flavor_) {
    case ActionFlavor::CyclicTranslation:
      return {mod(nf[0], m1_), 0, m1_, 0};
    case ActionFlavor::TorusTranslation:
      return {mod(nf[0], m1_), mod(nf[1], m2_), m1_, m2_};
    case ActionFlavor::Window:
      break;
  }
  throw UsageError("window actions have no total translations");
}

std::vector<Translation> FiniteAction::translations(const GroupSet& set) const {
  std::vector<Translation> out;
  out.reserve(set.size());
  for (const auto& g : set) out.push_back(translation(g));
  return out;
}

const GroupElem& FiniteAction::label(Point x) const {
  if (flavor_ != ActionFlavor::Window) throw UsageError("only window points carry labels");
  return window_[x];
}

const char* to_string(Freeness f) {
  switch (f) {
    case Freeness::Free:
      return "free";
    case Freeness::NotFree:
      return "not-free";
    case Freeness::Indeterminate:
      return "indeterminate";
  }
  return "?";
}

Freeness is_free_at(const FiniteAction& action, const GroupSet& set, Point x) {
  std::vector<Point> images;
  images.reserve(set.size());
  bool partial = false;
  for (const auto& g : set) {
    if (const auto y = action.act(g, x)) {
      images.push_back(*y);
    } else {
      partial = true;
    }
  }
  std::sort(images.begin(), images.end());
  if (std::adjacent_find(images.begin(), images.end()) != images.end()) return Freeness::NotFree;
  return partial ? Freeness::Indeterminate : Freeness::Free;
}

Freeness is_sd_free(const FiniteAction& action, const std::vector<GroupSet>& sets) {
  bool partial = false;
  for (const auto& set : sets) {
    if (!(set.ctx() == action.ctx())) throw UsageError("set and action use different groups");
    // Translation actions are homogeneous: act(g, x) = act(g, 0) + x, so
    // collisions at one point are collisions everywhere.
    const std::size_t points = action.is_total() ? 1 : action.size();
    for (Point x = 0; x < points; ++x) {
      switch (is_free_at(action, set, x)) {
        case Freeness::NotFree:
          return Freeness::NotFree;
        case Freeness::Indeterminate:
          partial = true;
          break;
        case Freeness::Free:
          break;
      }
    }
  }
  return partial ? Freeness::Indeterminate : Freeness::Free;
}

std::vector<std::size_t> growth_profile(const FiniteAction& action, const GroupSet& s, int n_max) {
  if (!action.is_total()) throw UsageError("growth profile needs a total action");
  const auto moves = action.translations(s);
  std::vector<std::size_t> profile;
  profile.reserve(static_cast<std::size_t>(std::max(n_max, 0)));
  // Homogeneous action: every point has the same orbit-ball sizes as 0.
  std::vector<char> seen(action.size(), 0);
  std::vector<Point> level{0};
  for (int n = 1; n <= n_max; ++n) {
    std::vector<Point> next;
    for (const auto y : level) {
      for (const auto& t : moves) {
        const Point z = t(y);
        if (!seen[z]) {
          seen[z] = 1;
          next.push_back(z);
        }
      }
    }
    for (const auto z : next) seen[z] = 0;
    profile.push_back(next.size());
    level = std::move(next);
  }
  return profile;
}

}  // namespace ergolab
