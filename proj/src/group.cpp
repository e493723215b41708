#include "ergolab/group.hpp"

#include <algorithm>
#include <cctype>

#include "ergolab/error.hpp"

namespace ergolab {

namespace {

std::int64_t mod(std::int64_t v, std::int64_t m) {
  const std::int64_t r = v % m;
  return r < 0 ? r + m : r;
}

// Free reduction of a word with letters +-1..+-rank.
std::vector<std::int64_t> reduce_word(const std::vector<std::int64_t>& raw) {
  std::vector<std::int64_t> out;
  out.reserve(raw.size());
  for (const auto letter : raw) {
    if (!out.empty() && out.back() == -letter) {
      out.pop_back();
    } else {
      out.push_back(letter);
    }
  }
  return out;
}

}  // namespace

GroupCtx GroupCtx::integers() { return {GroupKind::Integers, 1, 0, 0}; }

GroupCtx GroupCtx::lattice(int dim) {
  if (dim < 1 || dim > 3) throw UsageError("lattice dimension must be 1..3");
  return {GroupKind::IntegerLattice, dim, 0, 0};
}

GroupCtx GroupCtx::free_group(int rank) {
  if (rank < 1 || rank > 3) throw UsageError("free group rank must be 1..3");
  return {GroupKind::FreeGroup, rank, 0, 0};
}

GroupCtx GroupCtx::cyclic(std::int64_t modulus) {
  if (modulus < 1) throw UsageError("cyclic modulus must be >= 1");
  return {GroupKind::Cyclic, 1, modulus, 0};
}

GroupCtx GroupCtx::cyclic_product(std::int64_t m1, std::int64_t m2) {
  if (m1 < 1 || m2 < 1) throw UsageError("cyclic moduli must be >= 1");
  return {GroupKind::CyclicProduct, 2, m1, m2};
}

GroupElem GroupCtx::identity() const {
  switch (kind_) {
    case GroupKind::FreeGroup:
      return {kind_, {}};
    case GroupKind::Integers:
    case GroupKind::Cyclic:
      return {kind_, {0}};
    case GroupKind::IntegerLattice:
    case GroupKind::CyclicProduct:
      return {kind_, std::vector<std::int64_t>(arity_, 0)};
  }
  return {};
}

GroupElem GroupCtx::integer(std::int64_t v) const {
  if (kind_ != GroupKind::Integers && kind_ != GroupKind::Cyclic) {
    throw UsageError("integer literal in " + name());
  }
  return normalize({v});
}

GroupElem GroupCtx::vec(std::initializer_list<std::int64_t> coords) const {
  return vec(std::vector<std::int64_t>(coords));
}

GroupElem GroupCtx::vec(const std::vector<std::int64_t>& coords) const {
  if (kind_ == GroupKind::FreeGroup) throw UsageError("tuple literal in " + name());
  return normalize(coords);
}

GroupElem GroupCtx::word(std::string_view letters) const {
  if (kind_ != GroupKind::FreeGroup) throw UsageError("word literal in " + name());
  std::vector<std::int64_t> raw;
  if (letters == "1" || letters == "e") letters = "";
  for (const char ch : letters) {
    const bool inverse = std::isupper(static_cast<unsigned char>(ch)) != 0;
    const int gen = std::tolower(static_cast<unsigned char>(ch)) - 'a' + 1;
    if (gen < 1 || gen > arity_) {
      throw UsageError(std::string("letter '") + ch + "' outside " + name());
    }
    raw.push_back(inverse ? -gen : gen);
  }
  return normalize(std::move(raw));
}

GroupElem GroupCtx::normalize(std::vector<std::int64_t> raw) const {
  switch (kind_) {
    case GroupKind::Integers:
      if (raw.size() != 1) throw UsageError("Z elements have one coordinate");
      return {kind_, std::move(raw)};
    case GroupKind::IntegerLattice:
      if (static_cast<int>(raw.size()) != arity_) throw UsageError("wrong lattice arity for " + name());
      return {kind_, std::move(raw)};
    case GroupKind::Cyclic:
      if (raw.size() != 1) throw UsageError("Z/M elements have one coordinate");
      raw[0] = mod(raw[0], m1_);
      return {kind_, std::move(raw)};
    case GroupKind::CyclicProduct:
      if (raw.size() != 2) throw UsageError("Z/M1 x Z/M2 elements have two coordinates");
      raw[0] = mod(raw[0], m1_);
      raw[1] = mod(raw[1], m2_);
      return {kind_, std::move(raw)};
    case GroupKind::FreeGroup:
      for (const auto letter : raw) {
        if (letter == 0 || letter > arity_ || letter < -arity_) {
          throw UsageError("letter outside " + name());
        }
      }
      return {kind_, reduce_word(raw)};
  }
  return {};
}

void GroupCtx::check(const GroupElem& a) const {
  bool ok = a.kind() == kind_;
  if (ok) {
    const auto& nf = a.normal_form();
    switch (kind_) {
      case GroupKind::Integers:
        ok = nf.size() == 1;
        break;
      case GroupKind::IntegerLattice:
        ok = static_cast<int>(nf.size()) == arity_;
        break;
      case GroupKind::Cyclic:
        ok = nf.size() == 1 && nf[0] >= 0 && nf[0] < m1_;
        break;
      case GroupKind::CyclicProduct:
        ok = nf.size() == 2 && nf[0] >= 0 && nf[0] < m1_ && nf[1] >= 0 && nf[1] < m2_;
        break;
      case GroupKind::FreeGroup:
        ok = std::all_of(nf.begin(), nf.end(),
                         [&](std::int64_t l) { return l != 0 && l <= arity_ && l >= -arity_; });
        break;
    }
  }
  if (!ok) throw UsageError("element does not belong to " + name());
}

GroupElem GroupCtx::op(const GroupElem& a, const GroupElem& b) const {
  check(a);
  check(b);
  const auto& x = a.normal_form();
  const auto& y = b.normal_form();
  if (kind_ == GroupKind::FreeGroup) {
    std::vector<std::int64_t> raw(x);
    raw.insert(raw.end(), y.begin(), y.end());
    return {kind_, reduce_word(raw)};
  }
  std::vector<std::int64_t> sum(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) sum[i] = x[i] + y[i];
  return normalize(std::move(sum));
}

GroupElem GroupCtx::inv(const GroupElem& a) const {
  check(a);
  const auto& x = a.normal_form();
  if (kind_ == GroupKind::FreeGroup) {
    std::vector<std::int64_t> w(x.rbegin(), x.rend());
    for (auto& l : w) l = -l;
    return {kind_, std::move(w)};
  }
  std::vector<std::int64_t> neg(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) neg[i] = -x[i];
  return normalize(std::move(neg));
}

std::string GroupCtx::name() const {
  switch (kind_) {
    case GroupKind::Integers:
      return "Z";
    case GroupKind::IntegerLattice:
      return "Z^" + std::to_string(arity_);
    case GroupKind::FreeGroup:
      return "F" + std::to_string(arity_);
    case GroupKind::Cyclic:
      return "Z/" + std::to_string(m1_);
    case GroupKind::CyclicProduct:
      return "Z/" + std::to_string(m1_) + "xZ/" + std::to_string(m2_);
  }
  return "?";
}

std::string GroupCtx::format(const GroupElem& a) const {
  const auto& nf = a.normal_form();
  if (kind_ == GroupKind::FreeGroup) {
    if (nf.empty()) return "1";
    std::string s;
    for (const auto l : nf) {
      const char base = static_cast<char>('a' + (l > 0 ? l : -l) - 1);
      s += l > 0 ? base : static_cast<char>(std::toupper(base));
    }
    return s;
  }
  if (nf.size() == 1) return std::to_string(nf[0]);
  std::string s = "(";
  for (std::size_t i = 0; i < nf.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(nf[i]);
  }
  return s + ")";
}

bool GroupElem::is_identity() const {
  return std::all_of(nf_.begin(), nf_.end(), [](std::int64_t v) { return v == 0; });
}

GroupSet::GroupSet(GroupCtx ctx, std::vector<GroupElem> elems) : ctx_(ctx), elems_(std::move(elems)) {
  for (const auto& e : elems_) ctx_.check(e);
  std::sort(elems_.begin(), elems_.end());
  elems_.erase(std::unique(elems_.begin(), elems_.end()), elems_.end());
}

GroupSet GroupSet::interval(GroupCtx ctx, std::int64_t lo, std::int64_t hi) {
  std::vector<GroupElem> elems;
  elems.reserve(hi > lo ? static_cast<std::size_t>(hi - lo) : 0);
  for (std::int64_t v = lo; v < hi; ++v) elems.push_back(ctx.integer(v));
  return {ctx, std::move(elems)};
}

GroupSet GroupSet::of_integers(GroupCtx ctx, const std::vector<std::int64_t>& values) {
  std::vector<GroupElem> elems;
  elems.reserve(values.size());
  for (const auto v : values) elems.push_back(ctx.integer(v));
  return {ctx, std::move(elems)};
}

bool GroupSet::contains(const GroupElem& g) const { return index_of(g) >= 0; }

std::int64_t GroupSet::index_of(const GroupElem& g) const {
  const auto it = std::lower_bound(elems_.begin(), elems_.end(), g);
  if (it == elems_.end() || !(*it == g)) return -1;
  return it - elems_.begin();
}

GroupSet GroupSet::inverse() const {
  std::vector<GroupElem> out;
  out.reserve(elems_.size());
  for (const auto& e : elems_) out.push_back(ctx_.inv(e));
  return {ctx_, std::move(out)};
}

GroupSet GroupSet::unite(const GroupSet& other) const {
  if (!(ctx_ == other.ctx_)) throw UsageError("set union across contexts");
  std::vector<GroupElem> out(elems_);
  out.insert(out.end(), other.elems_.begin(), other.elems_.end());
  return {ctx_, std::move(out)};
}

GroupSet set_product(const GroupSet& s, const GroupSet& d) {
  if (!(s.ctx() == d.ctx())) throw UsageError("set product across contexts");
  std::vector<GroupElem> out;
  out.reserve(s.size() * d.size());
  for (const auto& a : s) {
    for (const auto& b : d) out.push_back(s.ctx().op(a, b));
  }
  return {s.ctx(), std::move(out)};
}

GroupSet ball(const GroupSet& s, int n) {
  if (n < 1) throw UsageError("ball exponent must be >= 1");
  GroupSet acc = s;
  for (int i = 1; i < n; ++i) acc = set_product(acc, s);
  return acc;
}

}  // namespace ergolab
