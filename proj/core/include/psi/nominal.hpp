#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace psi {

// An atom. Id 0 is reserved and never handed out by the supply.
struct Name {
  std::uint32_t id = 0;

  constexpr bool valid() const { return id != 0; }
  friend constexpr auto operator<=>(Name, Name) = default;
};

struct NameHash {
  std::size_t operator()(Name n) const noexcept { return std::hash<std::uint32_t>{}(n.id); }
};

// Sorted, duplicate-free sequence of names.
class NameSet {
 public:
  NameSet() = default;
  NameSet(std::initializer_list<Name> xs);
  explicit NameSet(std::vector<Name> xs);

  bool contains(Name n) const;
  void insert(Name n);
  void insert_all(const NameSet& other);
  void erase(Name n);
  bool empty() const { return elems_.empty(); }
  std::size_t size() const { return elems_.size(); }
  bool intersects(const NameSet& other) const;

  const std::vector<Name>& elems() const { return elems_; }
  auto begin() const { return elems_.begin(); }
  auto end() const { return elems_.end(); }

  friend bool operator==(const NameSet&, const NameSet&) = default;

 private:
  std::vector<Name> elems_;
};

NameSet set_union(const NameSet& a, const NameSet& b);
NameSet set_minus(const NameSet& a, const NameSet& b);

// Fresh-name supply. Thread-safe; ids increase monotonically.
Name fresh_name(const NameSet& avoid = {}, std::string_view hint = "");

// Fresh copy of an existing name, keeping its display hint.
Name fresh_like(Name n);

// Interned name: same string always yields the same atom.
Name named(std::string_view text);

// The display hint registered for a name (may be empty).
std::string hint_of(Name n);

// True iff n is the atom `named(hint_of(n))`.
bool is_interned(Name n);

// Look up an existing atom by id; returns an invalid name if absent.
Name name_by_id(std::uint32_t id);

// Reserved atoms used as canonical fresh names in checkers. pool_name(i)
// is stable for the lifetime of the process.
Name pool_name(std::size_t i);

// First `count` pool names not in avoid.
std::vector<Name> pool_fresh(const NameSet& avoid, std::size_t count);

// Finite sequence of transpositions, applied right-to-left.
class Permutation {
 public:
  Permutation() = default;
  static Permutation swap(Name a, Name b);

  // (this ∘ other): apply other first.
  Permutation compose(const Permutation& other) const;
  Permutation inverse() const;

  Name apply(Name n) const;
  const std::vector<std::pair<Name, Name>>& swaps() const { return swaps_; }
  bool is_identity_on(const NameSet& s) const;

 private:
  std::vector<std::pair<Name, Name>> swaps_;
};

NameSet apply_perm(const Permutation& p, const NameSet& s);

}  // namespace psi
