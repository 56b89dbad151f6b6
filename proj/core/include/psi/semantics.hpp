#pragma once

#include <optional>
#include <string>
#include <vector>

#include "psi/process.hpp"

namespace psi {

struct Label {
  enum class Kind : std::uint8_t { Out, In, Tau };
  Kind kind = Kind::Tau;
  Term subj;
  std::vector<Name> bound;  // extruded names, outputs only
  Term obj;

  static Label out(Term subj, std::vector<Name> bound, Term obj) { return {Kind::Out, subj, std::move(bound), obj}; }
  static Label in(Term subj, Term obj) { return {Kind::In, subj, {}, obj}; }
  static Label tau() { return {}; }

  bool is_tau() const { return kind == Kind::Tau; }
};

// ⊥, or (ν outer; inner) term.
struct Provenance {
  bool bot = true;
  std::vector<Name> outer;
  std::vector<Name> inner;
  Term term;

  static Provenance bottom() { return {}; }
  static Provenance at(Term m) { return {false, {}, {}, m}; }
};

Provenance prov_pushdown(const Provenance& p);
Provenance prov_append(const Provenance& p, const std::vector<Name>& zs);
Provenance prov_scope(Name b, const Provenance& p);
Provenance prov_scope(const std::vector<Name>& bs, const Provenance& p);
std::string alpha_key(const Provenance& p);
bool prov_alpha_eq(const Provenance& a, const Provenance& b);

struct Transition {
  Assertion env;
  Proc source;  // the freshened source the derivation was built on
  Label label;
  Provenance prov;
  Proc target;
};

// Provenance-free transition.
struct Step {
  Assertion env;
  Proc source;
  Label label;
  Proc target;
};

struct Fuel {
  int rep_depth = 2;
};

// Names from which standalone labels are drawn: channels K and received
// messages L.
struct EnumContext {
  NameSet universe;
};

// fn(Ψ) ∪ fn(P...) plus one name fresh for all of them.
EnumContext default_context(const Assertion& psi, const std::vector<Proc>& ps);

std::vector<Transition> transitions(const Instance& inst, const Assertion& psi, const Proc& p, Fuel fuel = {},
                                    const EnumContext* ctx = nullptr);

struct LegacyOptions {
  // false: input uses Ψ ⊢ M ↔ K with M the prefix subject (as originally
  // printed); true: Ψ ⊢ K ↔ M, the same orientation as the provenance rules.
  bool reorient_input = false;
};

std::vector<Step> legacy_transitions(const Instance& inst, const Assertion& psi, const Proc& p, Fuel fuel = {},
                                     LegacyOptions opts = {}, const EnumContext* ctx = nullptr);

std::vector<Step> erase_provenance(const std::vector<Transition>& ts);

// Alpha-canonical keys. Label binders bind into the object and the target.
std::string label_key(const Label& l);
std::string step_key(const Step& s);
std::string transition_key(const Transition& t);

// Checks the provenance invariants on one transition: outer binders equal
// the frame binders of the source, and the subject is connected to the
// provenance term under Ψ ⊗ Ψ_P. Returns a description of the first
// violation.
std::optional<std::string> check_provenance(const Instance& inst, const Transition& t);

struct ConservativityReport {
  std::size_t steps = 0;                 // distinct steps of the new engine
  std::vector<Step> only_new;            // provenance-erased, missing from legacy
  std::vector<Step> only_legacy;
  bool ok() const { return only_new.empty() && only_legacy.empty(); }
};

// Compares erase_provenance(transitions) with legacy_transitions as
// alpha-canonical sets, over the same enumeration universe.
ConservativityReport conservativity_check(const Instance& inst, const Assertion& psi, const Proc& p, Fuel fuel = {},
                                          LegacyOptions opts = {});

// τ-successors under env Ψ.
std::vector<Proc> tau_successors(const Instance& inst, const Assertion& psi, const Proc& p, Fuel fuel = {},
                                 const EnumContext* ctx = nullptr);

}  // namespace psi
