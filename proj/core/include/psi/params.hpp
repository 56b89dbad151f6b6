#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "psi/nominal.hpp"

namespace psi {

// Terms are names, optionally decorated with one tag (M_x), or the unit
// message used by nullary prefixes.
struct Term {
  Name name;
  Name tag;

  static Term of(Name n) { return Term{n, {}}; }
  static Term tagged(Name n, Name t) { return Term{n, t}; }
  static Term unit() { return Term{}; }

  bool is_unit() const { return !name.valid(); }
  bool is_tagged() const { return tag.valid(); }
  Term untagged() const { return Term{name, {}}; }

  friend auto operator<=>(const Term&, const Term&) = default;
};

NameSet names_of(const Term& t);

// One representation shared by every shipped instance. Each instance only
// uses the fields it needs: ether uses `names`, triangle and preorder use
// `pairs`, the tagged target adds `disabled`. Composition is componentwise
// union for all of them.
struct Assertion {
  std::vector<Name> names;                    // sorted, unique
  std::vector<std::pair<Name, Name>> pairs;   // sorted, unique
  std::vector<Name> disabled;                 // sorted, unique

  static Assertion of_names(std::vector<Name> ns);
  static Assertion of_pairs(std::vector<std::pair<Name, Name>> ps);
  Assertion with_disabled(std::vector<Name> tags) const;
  bool has_name(Name n) const;
  bool has_pair(Name a, Name b) const;
  bool is_disabled(Name t) const;
  bool empty() const { return names.empty() && pairs.empty() && disabled.empty(); }

  friend auto operator<=>(const Assertion&, const Assertion&) = default;
};

NameSet names_of(const Assertion& a);
Assertion union_of(const Assertion& a, const Assertion& b);

enum class CondKind : std::uint8_t {
  Eq,    // M = N
  Conn,  // M <-> N (channel connectivity)
  Prec,  // M < N (preorder)
  Tag,   // tag x is disabled
};

struct Condition {
  CondKind kind = CondKind::Conn;
  Term a;
  Term b;

  static Condition eq(Term x, Term y) { return {CondKind::Eq, x, y}; }
  static Condition conn(Term x, Term y) { return {CondKind::Conn, x, y}; }
  static Condition prec(Term x, Term y) { return {CondKind::Prec, x, y}; }
  static Condition tag(Name x) { return {CondKind::Tag, Term::of(x), {}}; }

  friend auto operator<=>(const Condition&, const Condition&) = default;
};

NameSet names_of(const Condition& c);

Term apply_perm(const Permutation& p, const Term& t);
Assertion apply_perm(const Permutation& p, const Assertion& a);
Condition apply_perm(const Permutation& p, const Condition& c);

struct SubstError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Simultaneous substitution [xs := ts].
struct Subst {
  std::vector<Name> xs;
  std::vector<Term> ts;

  bool well_formed() const;
  // Throws SubstError with a diagnostic if not well formed.
  void require_well_formed() const;
  const Term* lookup(Name n) const;
  NameSet names() const;
  bool empty() const { return xs.empty(); }
};

// Applied left to right.
using SubstitutionSeq = std::vector<Subst>;

Term subst(const Term& t, const Subst& s);
Assertion subst(const Assertion& a, const Subst& s);
Condition subst(const Condition& c, const Subst& s);

// The parameter 7-tuple plus the finite enumerators needed to explore it.
class Instance {
 public:
  virtual ~Instance() = default;

  virtual std::string name() const = 0;
  virtual bool entails(const Assertion& psi, const Condition& phi) const = 0;
  virtual Assertion compose(const Assertion& a, const Assertion& b) const { return union_of(a, b); }
  virtual Assertion unit() const { return {}; }
  virtual Condition connectivity(const Term& m, const Term& k) const { return Condition::conn(m, k); }

  // Rejects substitutions the instance cannot accept (sorting).
  virtual void check_subst(const Subst& s) const;
  Term apply_subst(const Term& t, const Subst& s) const;
  Assertion apply_subst(const Assertion& a, const Subst& s) const;
  Condition apply_subst(const Condition& c, const Subst& s) const;

  // Terms worth trying as channels, built from a universe of names.
  virtual std::vector<Term> channel_candidates(const NameSet& universe) const;
  std::vector<Term> out_channels(const Assertion& psi, const Term& m, const NameSet& universe) const;
  std::vector<Term> in_channels(const Assertion& psi, const Term& m, const NameSet& universe) const;

  // All T such that pattern[xs := T] = msg.
  virtual std::vector<std::vector<Term>> match_pattern(const std::vector<Name>& xs, const Term& pattern,
                                                       const Term& msg) const;
  virtual std::vector<Term> message_basis(const NameSet& universe) const;
  virtual std::vector<Condition> condition_basis(const NameSet& universe) const = 0;
  // Generators approximating "for all extensions"; the unit is implicit.
  virtual std::vector<Assertion> assertion_generators(const NameSet& universe) const = 0;

  // Decides static equivalence over the basis for `universe`.
  virtual bool static_equiv(const Assertion& a, const Assertion& b, const NameSet& universe) const;
  // Ψ ⊢ φ ⇒ Ψ' ⊢ φ for every basis condition.
  virtual bool static_implies(const Assertion& a, const Assertion& b, const NameSet& universe) const;

  // An always-entailed condition, if the instance has one.
  virtual std::optional<Condition> top(Name hint) const { (void)hint; return std::nullopt; }

  // An assertion under which `s` can talk to itself; used by observers.
  virtual Assertion enable_channel(Name s) const { (void)s; return {}; }

  // Rejects assertions/conditions that are not in the instance's language.
  virtual bool valid_assertion(const Assertion& a) const = 0;
  virtual bool valid_condition(const Condition& c) const = 0;

  virtual bool is_tagged() const { return false; }
};

using InstancePtr = std::shared_ptr<const Instance>;

// Names are channels; connectivity is syntactic equality; only the unit
// assertion.
class PiInstance : public Instance {
 public:
  std::string name() const override { return "pi"; }
  bool entails(const Assertion& psi, const Condition& phi) const override;
  std::vector<Condition> condition_basis(const NameSet& universe) const override;
  std::vector<Assertion> assertion_generators(const NameSet& universe) const override;
  bool static_equiv(const Assertion&, const Assertion&, const NameSet&) const override { return true; }
  std::optional<Condition> top(Name hint) const override;
  bool valid_assertion(const Assertion& a) const override { return a.empty(); }
  bool valid_condition(const Condition& c) const override;
};

// A shared medium: x <-> y iff both are in the assertion.
class EtherInstance : public Instance {
 public:
  std::string name() const override { return "ether"; }
  bool entails(const Assertion& psi, const Condition& phi) const override;
  std::vector<Condition> condition_basis(const NameSet& universe) const override;
  std::vector<Assertion> assertion_generators(const NameSet& universe) const override;
  Assertion enable_channel(Name s) const override { return Assertion::of_names({s}); }
  bool valid_assertion(const Assertion& a) const override;
  bool valid_condition(const Condition& c) const override;
};

// Directed connectivity facts; entailment is membership. Reflexive facts
// are only present when listed.
class TriangleInstance : public Instance {
 public:
  std::string name() const override { return "triangle"; }
  bool entails(const Assertion& psi, const Condition& phi) const override;
  std::vector<Condition> condition_basis(const NameSet& universe) const override;
  std::vector<Assertion> assertion_generators(const NameSet& universe) const override;
  Assertion enable_channel(Name s) const override { return Assertion::of_pairs({{s, s}}); }
  bool valid_assertion(const Assertion& a) const override;
  bool valid_condition(const Condition& c) const override;
};

// Arc sets; x < y is reflexive-transitive reachability; connectivity is
// joinability (a common upper bound).
class PreorderInstance : public Instance {
 public:
  std::string name() const override { return "preorder"; }
  bool entails(const Assertion& psi, const Condition& phi) const override;
  std::vector<Condition> condition_basis(const NameSet& universe) const override;
  std::vector<Assertion> assertion_generators(const NameSet& universe) const override;
  std::optional<Condition> top(Name hint) const override;
  bool valid_assertion(const Assertion& a) const override;
  bool valid_condition(const Condition& c) const override;

  static bool below(const Assertion& psi, Name x, Name y);
  static bool joinable(const Assertion& psi, Name x, Name y);
};

// Target language of the choice encoding: tagged terms, disabled tags.
class TaggedInstance : public Instance {
 public:
  explicit TaggedInstance(InstancePtr base, bool separate_choice = false);

  std::string name() const override;
  bool entails(const Assertion& psi, const Condition& phi) const override;
  void check_subst(const Subst& s) const override;
  std::vector<Term> channel_candidates(const NameSet& universe) const override;
  std::vector<std::vector<Term>> match_pattern(const std::vector<Name>& xs, const Term& pattern,
                                               const Term& msg) const override;
  std::vector<Condition> condition_basis(const NameSet& universe) const override;
  std::vector<Assertion> assertion_generators(const NameSet& universe) const override;
  bool static_equiv(const Assertion& a, const Assertion& b, const NameSet& universe) const override;
  std::optional<Condition> top(Name hint) const override { return base_->top(hint); }
  Assertion enable_channel(Name s) const override { return base_->enable_channel(s); }
  bool valid_assertion(const Assertion& a) const override;
  bool valid_condition(const Condition& c) const override;
  bool is_tagged() const override { return true; }

  const Instance& base() const { return *base_; }
  InstancePtr base_ptr() const { return base_; }
  bool separate_choice() const { return separate_; }
  static Assertion base_part(const Assertion& a);

 private:
  InstancePtr base_;
  bool separate_;
};

// "pi", "ether", "triangle", "preorder", "tagged:<base>", "separate:<base>".
InstancePtr make_instance(const std::string& name);

// Assertion for the triangle counterexample: a->b, b->c plus the listed
// reflexive facts.
Assertion triangle_assertion(Name a, Name b, Name c, bool reflexive);

}  // namespace psi
