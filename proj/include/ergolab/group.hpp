#pragma once

// Finitely generated groups used by the laboratory: Z, Z^d (d <= 3), free
// groups of rank <= 3, Z/M and Z/M1 x Z/M2. Elements carry a canonical
// normal form, so equality of elements is equality of normal forms.

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace ergolab {

enum class GroupKind { Integers, IntegerLattice, FreeGroup, Cyclic, CyclicProduct };

class GroupElem;

class GroupCtx {
 public:
  static GroupCtx integers();
  static GroupCtx lattice(int dim);
  static GroupCtx free_group(int rank);
  static GroupCtx cyclic(std::int64_t modulus);
  static GroupCtx cyclic_product(std::int64_t m1, std::int64_t m2);

  GroupKind kind() const { return kind_; }
  /// Dimension for lattices, rank for free groups, 1 or 2 for cyclic kinds.
  int arity() const { return arity_; }
  std::int64_t modulus(int i = 0) const { return i == 0 ? m1_ : m2_; }

  GroupElem identity() const;
  GroupElem integer(std::int64_t v) const;
  GroupElem vec(std::initializer_list<std::int64_t> coords) const;
  GroupElem vec(const std::vector<std::int64_t>& coords) const;
  /// Free-group word over a, b, c with upper case letters for inverses;
  /// "" or "1" is the identity. Reduced on construction.
  GroupElem word(std::string_view letters) const;

  /// Rebuilds an element from raw coordinates / letters, normalizing them.
  GroupElem normalize(std::vector<std::int64_t> raw) const;

  GroupElem op(const GroupElem& a, const GroupElem& b) const;
  GroupElem inv(const GroupElem& a) const;

  /// Throws UsageError when `a` was not produced under a context of the same
  /// kind and parameters.
  void check(const GroupElem& a) const;

  std::string name() const;
  std::string format(const GroupElem& a) const;

  bool operator==(const GroupCtx&) const = default;

 private:
  GroupCtx(GroupKind kind, int arity, std::int64_t m1, std::int64_t m2)
      : kind_(kind), arity_(arity), m1_(m1), m2_(m2) {}

  GroupKind kind_;
  int arity_;
  std::int64_t m1_;
  std::int64_t m2_;
};

/// Normal form of a group element: an integer, a coordinate tuple, a residue
/// tuple, or a reduced word whose letters are +-1..+-rank.
class GroupElem {
 public:
  GroupElem() = default;

  GroupKind kind() const { return kind_; }
  const std::vector<std::int64_t>& normal_form() const { return nf_; }
  bool is_identity() const;

  /// First coordinate; the integer value for Z and residue for Z/M.
  std::int64_t value() const { return nf_.empty() ? 0 : nf_.front(); }

  friend bool operator==(const GroupElem&, const GroupElem&) = default;
  friend std::strong_ordering operator<=>(const GroupElem& a, const GroupElem& b) {
    if (auto c = a.nf_ <=> b.nf_; c != 0) return c;
    return a.kind_ <=> b.kind_;
  }

 private:
  friend class GroupCtx;
  GroupElem(GroupKind kind, std::vector<std::int64_t> nf) : kind_(kind), nf_(std::move(nf)) {}

  GroupKind kind_ = GroupKind::Integers;
  std::vector<std::int64_t> nf_;
};

/// Finite subset of a group, deduplicated and sorted by normal form.
class GroupSet {
 public:
  explicit GroupSet(GroupCtx ctx) : ctx_(ctx) {}
  GroupSet(GroupCtx ctx, std::vector<GroupElem> elems);

  /// {lo, lo+1, ..., hi-1} in Z or Z/M.
  static GroupSet interval(GroupCtx ctx, std::int64_t lo, std::int64_t hi);
  static GroupSet of_integers(GroupCtx ctx, const std::vector<std::int64_t>& values);

  const GroupCtx& ctx() const { return ctx_; }
  const std::vector<GroupElem>& elements() const { return elems_; }
  std::size_t size() const { return elems_.size(); }
  bool empty() const { return elems_.empty(); }
  const GroupElem& operator[](std::size_t i) const { return elems_[i]; }
  auto begin() const { return elems_.begin(); }
  auto end() const { return elems_.end(); }

  bool contains(const GroupElem& g) const;
  /// Position of `g` in sorted order, or -1.
  std::int64_t index_of(const GroupElem& g) const;

  GroupSet inverse() const;
  GroupSet unite(const GroupSet& other) const;

  bool operator==(const GroupSet&) const = default;

 private:
  GroupCtx ctx_;
  std::vector<GroupElem> elems_;
};

/// {s d : s in S, d in D}.
GroupSet set_product(const GroupSet& s, const GroupSet& d);

/// S^n: all products of exactly n elements of S (n >= 1).
GroupSet ball(const GroupSet& s, int n);

}  // namespace ergolab
