#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "psi/semantics.hpp"

namespace psi {

struct Context;
using ContextPtr = std::shared_ptr<const Context>;

// C ::= P_G | [] | C | C | case φ̃:P̃_G [] φ':C [] φ̃'':Q̃_G
// A sum with a context summand is kept as a Case without guards.
struct Context {
  enum class Kind : std::uint8_t { Leaf, Hole, Par, Case };
  Kind kind = Kind::Hole;
  Proc leaf;                           // Leaf
  ContextPtr left, right;              // Par
  std::vector<Branch> branches;        // Case: the other branches, in order
  std::size_t hole_branch = 0;         // Case: position of the context branch
  std::optional<Condition> guard;      // Case: φ' (absent for sums)
  ContextPtr inner;                    // Case: the context branch

  static ContextPtr hole();
  static ContextPtr of(Proc p);
  static ContextPtr par(ContextPtr l, ContextPtr r);
  static ContextPtr case_of(std::vector<Branch> others, std::size_t pos, std::optional<Condition> guard,
                            ContextPtr inner);
};

struct FillError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

std::size_t holes(const ContextPtr& c);
std::vector<Condition> conds(const ContextPtr& c);
Proc ppr(const ContextPtr& c);
// Holes numbered left to right; throws FillError on a count mismatch.
Proc fill(const ContextPtr& c, const std::vector<Proc>& ps);

struct ReductionStep {
  Proc source;  // freshened source
  Proc target;
  // Witness of the Ctxt instance.
  std::vector<Name> binders;  // hoisted by Scope/Struct
  std::vector<Assertion> assertions;
  ContextPtr context;
  Proc out_prefix;
  Proc in_prefix;
  Subst subst;
  bool output_first = true;  // hole order in `context`
};

std::vector<ReductionStep> reductions(const Instance& inst, const Proc& p, Fuel fuel = {});

struct DerivedParReport {
  bool ok = true;
  std::vector<std::string> missing;  // congruence keys of unmatched targets
};

// Every reduction P → P' gives P | Q_G → P' | Q_G. Throws
// std::invalid_argument if Q_G is not assertion-guarded.
DerivedParReport derived_par(const Instance& inst, const Proc& p, const Proc& q_guarded, Fuel fuel = {});

struct HarmonyReport {
  std::size_t reductions = 0;
  std::size_t taus = 0;
  std::vector<Proc> unmatched_reductions;
  std::vector<Proc> unmatched_taus;
  bool ok() const { return unmatched_reductions.empty() && unmatched_taus.empty(); }
};

HarmonyReport harmony_check(const Instance& inst, const Proc& p, Fuel fuel = {});

}  // namespace psi
