#include "psi/params.hpp"

#include <algorithm>
#include <set>

namespace psi {

namespace {

template <class T>
void normalise(std::vector<T>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

template <class T>
std::vector<T> merged(const std::vector<T>& a, const std::vector<T>& b) {
  std::vector<T> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

// A name-only position receiving a term.
Name subst_name(Name n, const Subst& s) {
  const Term* t = s.lookup(n);
  if (!t) return n;
  if (t->is_unit() || t->is_tagged())
    throw SubstError("substitution puts a non-name term in a name position");
  return t->name;
}

}  // namespace

NameSet names_of(const Term& t) {
  NameSet s;
  if (t.name.valid()) s.insert(t.name);
  if (t.tag.valid()) s.insert(t.tag);
  return s;
}

Assertion Assertion::of_names(std::vector<Name> ns) {
  Assertion a;
  a.names = std::move(ns);
  normalise(a.names);
  return a;
}

Assertion Assertion::of_pairs(std::vector<std::pair<Name, Name>> ps) {
  Assertion a;
  a.pairs = std::move(ps);
  normalise(a.pairs);
  return a;
}

Assertion Assertion::with_disabled(std::vector<Name> tags) const {
  Assertion a = *this;
  a.disabled = merged(a.disabled, [&] { normalise(tags); return tags; }());
  return a;
}

bool Assertion::has_name(Name n) const { return std::binary_search(names.begin(), names.end(), n); }

bool Assertion::has_pair(Name a, Name b) const {
  return std::binary_search(pairs.begin(), pairs.end(), std::make_pair(a, b));
}

bool Assertion::is_disabled(Name t) const {
  return std::binary_search(disabled.begin(), disabled.end(), t);
}

NameSet names_of(const Assertion& a) {
  std::vector<Name> out = a.names;
  for (auto [x, y] : a.pairs) {
    out.push_back(x);
    out.push_back(y);
  }
  out.insert(out.end(), a.disabled.begin(), a.disabled.end());
  return NameSet(std::move(out));
}

Assertion union_of(const Assertion& a, const Assertion& b) {
  Assertion r;
  r.names = merged(a.names, b.names);
  r.pairs = merged(a.pairs, b.pairs);
  r.disabled = merged(a.disabled, b.disabled);
  return r;
}

NameSet names_of(const Condition& c) { return set_union(names_of(c.a), names_of(c.b)); }

Term apply_perm(const Permutation& p, const Term& t) {
  Term r = t;
  if (r.name.valid()) r.name = p.apply(r.name);
  if (r.tag.valid()) r.tag = p.apply(r.tag);
  return r;
}

Assertion apply_perm(const Permutation& p, const Assertion& a) {
  Assertion r;
  for (Name n : a.names) r.names.push_back(p.apply(n));
  for (auto [x, y] : a.pairs) r.pairs.emplace_back(p.apply(x), p.apply(y));
  for (Name n : a.disabled) r.disabled.push_back(p.apply(n));
  normalise(r.names);
  normalise(r.pairs);
  normalise(r.disabled);
  return r;
}

Condition apply_perm(const Permutation& p, const Condition& c) {
  return Condition{c.kind, apply_perm(p, c.a), apply_perm(p, c.b)};
}

bool Subst::well_formed() const {
  if (xs.size() != ts.size()) return false;
  std::vector<Name> sorted = xs;
  std::sort(sorted.begin(), sorted.end());
  return std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
}

void Subst::require_well_formed() const {
  if (xs.size() != ts.size())
    throw SubstError("substitution length mismatch: " + std::to_string(xs.size()) + " names, " +
                     std::to_string(ts.size()) + " terms");
  if (!well_formed()) throw SubstError("substitution names are not pairwise distinct");
}

const Term* Subst::lookup(Name n) const {
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (xs[i] == n) return &ts[i];
  return nullptr;
}

NameSet Subst::names() const {
  NameSet s{std::vector<Name>(xs)};
  for (const Term& t : ts) s.insert_all(names_of(t));
  return s;
}

Term subst(const Term& t, const Subst& s) {
  if (t.is_unit()) return t;
  const Term* rep = s.lookup(t.name);
  Term base = rep ? *rep : Term::of(t.name);
  if (!t.is_tagged()) return base;
  if (base.is_unit() || base.is_tagged()) throw SubstError("substitution would nest or drop a tag");
  return Term::tagged(base.name, subst_name(t.tag, s));
}

Assertion subst(const Assertion& a, const Subst& s) {
  Assertion r;
  for (Name n : a.names) r.names.push_back(subst_name(n, s));
  for (auto [x, y] : a.pairs) r.pairs.emplace_back(subst_name(x, s), subst_name(y, s));
  for (Name n : a.disabled) r.disabled.push_back(subst_name(n, s));
  normalise(r.names);
  normalise(r.pairs);
  normalise(r.disabled);
  return r;
}

Condition subst(const Condition& c, const Subst& s) {
  if (c.kind == CondKind::Tag) return Condition::tag(subst_name(c.a.name, s));
  return Condition{c.kind, subst(c.a, s), subst(c.b, s)};
}

// --- Instance defaults -----------------------------------------------------

void Instance::check_subst(const Subst& s) const { s.require_well_formed(); }

Term Instance::apply_subst(const Term& t, const Subst& s) const {
  check_subst(s);
  return subst(t, s);
}

Assertion Instance::apply_subst(const Assertion& a, const Subst& s) const {
  check_subst(s);
  return subst(a, s);
}

Condition Instance::apply_subst(const Condition& c, const Subst& s) const {
  check_subst(s);
  return subst(c, s);
}

std::vector<Term> Instance::channel_candidates(const NameSet& universe) const {
  std::vector<Term> out;
  for (Name n : universe) out.push_back(Term::of(n));
  return out;
}

std::vector<Term> Instance::out_channels(const Assertion& psi, const Term& m, const NameSet& universe) const {
  std::vector<Term> out;
  for (const Term& k : channel_candidates(universe))
    if (entails(psi, connectivity(m, k))) out.push_back(k);
  return out;
}

std::vector<Term> Instance::in_channels(const Assertion& psi, const Term& m, const NameSet& universe) const {
  std::vector<Term> out;
  for (const Term& k : channel_candidates(universe))
    if (entails(psi, connectivity(k, m))) out.push_back(k);
  return out;
}

std::vector<std::vector<Term>> Instance::match_pattern(const std::vector<Name>& xs, const Term& pattern,
                                                       const Term& msg) const {
  // Patterns are a single term, so at most one binder can occur in it.
  if (xs.empty()) {
    if (pattern == msg) return {{}};
    return {};
  }
  if (xs.size() == 1 && !pattern.is_tagged() && pattern.name == xs[0]) {
    if (msg.is_unit()) return {};
    return {{msg}};
  }
  if (xs.size() == 1 && pattern.is_tagged() && !msg.is_unit() && msg.is_tagged()) {
    // M_x with one of M, x bound.
    if (pattern.name == xs[0] && pattern.tag != xs[0] && msg.tag == pattern.tag) return {{Term::of(msg.name)}};
    if (pattern.tag == xs[0] && pattern.name != xs[0] && msg.name == pattern.name) return {{Term::of(msg.tag)}};
  }
  return {};
}

std::vector<Term> Instance::message_basis(const NameSet& universe) const {
  std::vector<Term> out{Term::unit()};
  for (Name n : universe) out.push_back(Term::of(n));
  return out;
}

bool Instance::static_equiv(const Assertion& a, const Assertion& b, const NameSet& universe) const {
  for (const Condition& c : condition_basis(universe))
    if (entails(a, c) != entails(b, c)) return false;
  return true;
}

bool Instance::static_implies(const Assertion& a, const Assertion& b, const NameSet& universe) const {
  for (const Condition& c : condition_basis(universe))
    if (entails(a, c) && !entails(b, c)) return false;
  return true;
}

// --- pi --------------------------------------------------------------------

bool PiInstance::entails(const Assertion&, const Condition& phi) const {
  switch (phi.kind) {
    case CondKind::Eq:
    case CondKind::Conn:
      return !phi.a.is_unit() && phi.a == phi.b;
    default:
      return false;
  }
}

std::vector<Condition> PiInstance::condition_basis(const NameSet& universe) const {
  std::vector<Condition> out;
  for (Name x : universe)
    for (Name y : universe) {
      out.push_back(Condition::eq(Term::of(x), Term::of(y)));
      out.push_back(Condition::conn(Term::of(x), Term::of(y)));
    }
  return out;
}

std::vector<Assertion> PiInstance::assertion_generators(const NameSet&) const { return {}; }

std::optional<Condition> PiInstance::top(Name hint) const {
  if (!hint.valid()) hint = named("top");
  return Condition::eq(Term::of(hint), Term::of(hint));
}

bool PiInstance::valid_condition(const Condition& c) const {
  return (c.kind == CondKind::Eq || c.kind == CondKind::Conn) && !c.a.is_tagged() && !c.b.is_tagged();
}

// --- ether -----------------------------------------------------------------

bool EtherInstance::entails(const Assertion& psi, const Condition& phi) const {
  if (phi.kind != CondKind::Conn || phi.a.is_tagged() || phi.b.is_tagged()) return false;
  if (phi.a.is_unit() || phi.b.is_unit()) return false;
  return psi.has_name(phi.a.name) && psi.has_name(phi.b.name);
}

std::vector<Condition> EtherInstance::condition_basis(const NameSet& universe) const {
  std::vector<Condition> out;
  for (Name x : universe)
    for (Name y : universe) out.push_back(Condition::conn(Term::of(x), Term::of(y)));
  return out;
}

std::vector<Assertion> EtherInstance::assertion_generators(const NameSet& universe) const {
  std::vector<Assertion> out;
  for (Name x : universe) out.push_back(Assertion::of_names({x}));
  return out;
}

bool EtherInstance::valid_assertion(const Assertion& a) const { return a.pairs.empty() && a.disabled.empty(); }

bool EtherInstance::valid_condition(const Condition& c) const {
  return c.kind == CondKind::Conn && !c.a.is_tagged() && !c.b.is_tagged();
}

// --- triangle --------------------------------------------------------------

bool TriangleInstance::entails(const Assertion& psi, const Condition& phi) const {
  if (phi.kind != CondKind::Conn || phi.a.is_tagged() || phi.b.is_tagged()) return false;
  if (phi.a.is_unit() || phi.b.is_unit()) return false;
  return psi.has_pair(phi.a.name, phi.b.name);
}

std::vector<Condition> TriangleInstance::condition_basis(const NameSet& universe) const {
  std::vector<Condition> out;
  for (Name x : universe)
    for (Name y : universe) out.push_back(Condition::conn(Term::of(x), Term::of(y)));
  return out;
}

std::vector<Assertion> TriangleInstance::assertion_generators(const NameSet& universe) const {
  std::vector<Assertion> out;
  for (Name x : universe)
    for (Name y : universe) out.push_back(Assertion::of_pairs({{x, y}}));
  return out;
}

bool TriangleInstance::valid_assertion(const Assertion& a) const { return a.names.empty() && a.disabled.empty(); }

bool TriangleInstance::valid_condition(const Condition& c) const {
  return c.kind == CondKind::Conn && !c.a.is_tagged() && !c.b.is_tagged();
}

Assertion triangle_assertion(Name a, Name b, Name c, bool reflexive) {
  std::vector<std::pair<Name, Name>> ps{{a, b}, {b, c}};
  if (reflexive) {
    ps.emplace_back(a, a);
    ps.emplace_back(b, b);
    ps.emplace_back(c, c);
  }
  return Assertion::of_pairs(std::move(ps));
}

// --- preorder --------------------------------------------------------------

namespace {

// Names reachable from x along arcs (x itself included).
std::set<Name> upset(const Assertion& psi, Name x) {
  std::set<Name> seen{x};
  std::vector<Name> todo{x};
  while (!todo.empty()) {
    Name y = todo.back();
    todo.pop_back();
    auto it = std::lower_bound(psi.pairs.begin(), psi.pairs.end(), std::make_pair(y, Name{}));
    for (; it != psi.pairs.end() && it->first == y; ++it)
      if (seen.insert(it->second).second) todo.push_back(it->second);
  }
  return seen;
}

}  // namespace

bool PreorderInstance::below(const Assertion& psi, Name x, Name y) { return upset(psi, x).count(y) > 0; }

bool PreorderInstance::joinable(const Assertion& psi, Name x, Name y) {
  auto ux = upset(psi, x);
  for (Name z : upset(psi, y))
    if (ux.count(z)) return true;
  return false;
}

bool PreorderInstance::entails(const Assertion& psi, const Condition& phi) const {
  if (phi.a.is_tagged() || phi.b.is_tagged() || phi.a.is_unit() || phi.b.is_unit()) return false;
  switch (phi.kind) {
    case CondKind::Prec:
      return below(psi, phi.a.name, phi.b.name);
    case CondKind::Conn:
      return joinable(psi, phi.a.name, phi.b.name);
    default:
      return false;
  }
}

std::vector<Condition> PreorderInstance::condition_basis(const NameSet& universe) const {
  std::vector<Condition> out;
  for (Name x : universe)
    for (Name y : universe) {
      out.push_back(Condition::prec(Term::of(x), Term::of(y)));
      out.push_back(Condition::conn(Term::of(x), Term::of(y)));
    }
  return out;
}

std::vector<Assertion> PreorderInstance::assertion_generators(const NameSet& universe) const {
  std::vector<Assertion> out;
  for (Name x : universe)
    for (Name y : universe)
      if (x != y) out.push_back(Assertion::of_pairs({{x, y}}));
  return out;
}

std::optional<Condition> PreorderInstance::top(Name hint) const {
  if (!hint.valid()) hint = named("top");
  return Condition::prec(Term::of(hint), Term::of(hint));
}

bool PreorderInstance::valid_assertion(const Assertion& a) const { return a.names.empty() && a.disabled.empty(); }

bool PreorderInstance::valid_condition(const Condition& c) const {
  return (c.kind == CondKind::Prec || c.kind == CondKind::Conn) && !c.a.is_tagged() && !c.b.is_tagged();
}

// --- tagged ----------------------------------------------------------------

TaggedInstance::TaggedInstance(InstancePtr base, bool separate_choice)
    : base_(std::move(base)), separate_(separate_choice) {}

std::string TaggedInstance::name() const { return (separate_ ? "separate:" : "tagged:") + base_->name(); }

Assertion TaggedInstance::base_part(const Assertion& a) {
  Assertion r = a;
  r.disabled.clear();
  return r;
}

bool TaggedInstance::entails(const Assertion& psi, const Condition& phi) const {
  if (phi.kind == CondKind::Tag) return psi.is_disabled(phi.a.name);
  Assertion base = base_part(psi);
  if (phi.kind != CondKind::Conn) {
    if (phi.a.is_tagged() || phi.b.is_tagged()) return false;
    return base_->entails(base, phi);
  }
  const Term& m = phi.a;
  const Term& n = phi.b;
  if (!m.is_tagged() && !n.is_tagged()) return base_->entails(base, phi);
  if (!base_->entails(base, base_->connectivity(m.untagged(), n.untagged()))) return false;
  if (m.is_tagged() && psi.is_disabled(m.tag)) return false;
  if (n.is_tagged() && psi.is_disabled(n.tag)) return false;
  if (m.is_tagged() && n.is_tagged() && !separate_ && m.tag == n.tag) return false;
  return true;
}

void TaggedInstance::check_subst(const Subst& s) const {
  s.require_well_formed();
  for (const Term& t : s.ts)
    if (t.is_tagged()) throw SubstError("sorting violation: tagged term used as an object");
}

std::vector<Term> TaggedInstance::channel_candidates(const NameSet& universe) const {
  std::vector<Term> out = base_->channel_candidates(universe);
  std::size_t n = out.size();
  for (std::size_t i = 0; i < n; ++i)
    for (Name t : universe) out.push_back(Term::tagged(out[i].name, t));
  return out;
}

std::vector<std::vector<Term>> TaggedInstance::match_pattern(const std::vector<Name>& xs, const Term& pattern,
                                                             const Term& msg) const {
  if (msg.is_tagged()) return {};
  return base_->match_pattern(xs, pattern, msg);
}

std::vector<Condition> TaggedInstance::condition_basis(const NameSet& universe) const {
  std::vector<Condition> out = base_->condition_basis(universe);
  for (Name x : universe) out.push_back(Condition::tag(x));
  auto cands = channel_candidates(universe);
  for (const Term& m : cands)
    for (const Term& k : cands)
      if (m.is_tagged() || k.is_tagged()) out.push_back(Condition::conn(m, k));
  return out;
}

std::vector<Assertion> TaggedInstance::assertion_generators(const NameSet& universe) const {
  std::vector<Assertion> out = base_->assertion_generators(universe);
  for (Name x : universe) out.push_back(Assertion{}.with_disabled({x}));
  return out;
}

bool TaggedInstance::static_equiv(const Assertion& a, const Assertion& b, const NameSet& universe) const {
  // Every tagged condition is a function of the base entailments and the
  // disabled set restricted to the universe.
  if (!base_->static_equiv(base_part(a), base_part(b), universe)) return false;
  for (Name x : universe)
    if (a.is_disabled(x) != b.is_disabled(x)) return false;
  return true;
}

bool TaggedInstance::valid_assertion(const Assertion& a) const { return base_->valid_assertion(base_part(a)); }

bool TaggedInstance::valid_condition(const Condition& c) const {
  if (c.kind == CondKind::Tag) return true;
  if (c.kind == CondKind::Conn) return true;
  return base_->valid_condition(c);
}

InstancePtr make_instance(const std::string& name) {
  if (name == "pi") return std::make_shared<PiInstance>();
  if (name == "ether") return std::make_shared<EtherInstance>();
  if (name == "triangle") return std::make_shared<TriangleInstance>();
  if (name == "preorder") return std::make_shared<PreorderInstance>();
  auto colon = name.find(':');
  if (colon != std::string::npos) {
    std::string head = name.substr(0, colon);
    if (head == "tagged" || head == "separate") {
      InstancePtr base = make_instance(name.substr(colon + 1));
      if (!base || base->is_tagged()) return nullptr;
      return std::make_shared<TaggedInstance>(base, head == "separate");
    }
  }
  return nullptr;
}

}  // namespace psi
