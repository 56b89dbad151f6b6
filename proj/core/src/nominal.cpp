#include "psi/nominal.hpp"

#include <atomic>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

namespace psi {

namespace {

struct Registry {
  std::shared_mutex mu;
  std::vector<std::string> hints{std::string{}};  // index = id
  std::unordered_map<std::string, Name> interned;
  std::vector<Name> pool;
};

Registry& registry() {
  static Registry r;
  return r;
}

std::atomic<std::uint32_t> next_id{1};

Name make_atom(std::string_view hint) {
  auto& r = registry();
  std::unique_lock lock(r.mu);
  Name n{next_id.fetch_add(1)};
  if (r.hints.size() <= n.id) r.hints.resize(n.id + 1);
  r.hints[n.id] = std::string(hint);
  return n;
}

}  // namespace

NameSet::NameSet(std::initializer_list<Name> xs) : elems_(xs) {
  std::sort(elems_.begin(), elems_.end());
  elems_.erase(std::unique(elems_.begin(), elems_.end()), elems_.end());
}

NameSet::NameSet(std::vector<Name> xs) : elems_(std::move(xs)) {
  std::sort(elems_.begin(), elems_.end());
  elems_.erase(std::unique(elems_.begin(), elems_.end()), elems_.end());
}

bool NameSet::contains(Name n) const {
  return std::binary_search(elems_.begin(), elems_.end(), n);
}

void NameSet::insert(Name n) {
  auto it = std::lower_bound(elems_.begin(), elems_.end(), n);
  if (it == elems_.end() || *it != n) elems_.insert(it, n);
}

void NameSet::insert_all(const NameSet& other) { *this = set_union(*this, other); }

void NameSet::erase(Name n) {
  auto it = std::lower_bound(elems_.begin(), elems_.end(), n);
  if (it != elems_.end() && *it == n) elems_.erase(it);
}

bool NameSet::intersects(const NameSet& other) const {
  auto a = elems_.begin();
  auto b = other.elems_.begin();
  while (a != elems_.end() && b != other.elems_.end()) {
    if (*a == *b) return true;
    if (*a < *b) ++a; else ++b;
  }
  return false;
}

NameSet set_union(const NameSet& a, const NameSet& b) {
  std::vector<Name> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return NameSet(std::move(out));
}

NameSet set_minus(const NameSet& a, const NameSet& b) {
  std::vector<Name> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return NameSet(std::move(out));
}

Name fresh_name(const NameSet& avoid, std::string_view hint) {
  // The supply is monotone, so every new atom is automatically outside any
  // set built from earlier atoms; the loop only guards hand-made ids.
  for (;;) {
    Name n = make_atom(hint.empty() ? "n" : hint);
    if (!avoid.contains(n)) return n;
  }
}

Name fresh_like(Name n) { return fresh_name({}, hint_of(n)); }

Name named(std::string_view text) {
  auto& r = registry();
  {
    std::shared_lock lock(r.mu);
    auto it = r.interned.find(std::string(text));
    if (it != r.interned.end()) return it->second;
  }
  std::unique_lock lock(r.mu);
  auto it = r.interned.find(std::string(text));
  if (it != r.interned.end()) return it->second;
  Name n{next_id.fetch_add(1)};
  if (r.hints.size() <= n.id) r.hints.resize(n.id + 1);
  r.hints[n.id] = std::string(text);
  r.interned.emplace(std::string(text), n);
  return n;
}

std::string hint_of(Name n) {
  auto& r = registry();
  std::shared_lock lock(r.mu);
  if (n.id < r.hints.size()) return r.hints[n.id];
  return {};
}

bool is_interned(Name n) {
  auto& r = registry();
  std::shared_lock lock(r.mu);
  if (n.id >= r.hints.size()) return false;
  auto it = r.interned.find(r.hints[n.id]);
  return it != r.interned.end() && it->second == n;
}

Name name_by_id(std::uint32_t id) {
  auto& r = registry();
  std::shared_lock lock(r.mu);
  if (id == 0 || id >= r.hints.size()) return {};
  return Name{id};
}

Name pool_name(std::size_t i) {
  auto& r = registry();
  {
    std::shared_lock lock(r.mu);
    if (i < r.pool.size()) return r.pool[i];
  }
  while (true) {
    std::size_t have;
    {
      std::shared_lock lock(r.mu);
      have = r.pool.size();
      if (i < have) return r.pool[i];
    }
    Name n = make_atom("_" + std::to_string(have));
    std::unique_lock lock(r.mu);
    if (r.pool.size() == have) r.pool.push_back(n);
  }
}

std::vector<Name> pool_fresh(const NameSet& avoid, std::size_t count) {
  std::vector<Name> out;
  for (std::size_t i = 0; out.size() < count; ++i) {
    Name n = pool_name(i);
    if (!avoid.contains(n)) out.push_back(n);
  }
  return out;
}

Permutation Permutation::swap(Name a, Name b) {
  Permutation p;
  if (a != b) p.swaps_.emplace_back(a, b);
  return p;
}

Permutation Permutation::compose(const Permutation& other) const {
  Permutation p;
  p.swaps_ = swaps_;
  p.swaps_.insert(p.swaps_.end(), other.swaps_.begin(), other.swaps_.end());
  return p;
}

Permutation Permutation::inverse() const {
  Permutation p;
  p.swaps_.assign(swaps_.rbegin(), swaps_.rend());
  return p;
}

Name Permutation::apply(Name n) const {
  for (auto it = swaps_.rbegin(); it != swaps_.rend(); ++it) {
    if (n == it->first) n = it->second;
    else if (n == it->second) n = it->first;
  }
  return n;
}

bool Permutation::is_identity_on(const NameSet& s) const {
  return std::all_of(s.begin(), s.end(), [&](Name n) { return apply(n) == n; });
}

NameSet apply_perm(const Permutation& p, const NameSet& s) {
  std::vector<Name> out;
  out.reserve(s.size());
  for (Name n : s) out.push_back(p.apply(n));
  return NameSet(std::move(out));
}

}  // namespace psi
