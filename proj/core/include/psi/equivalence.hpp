#pragma once

#include <optional>
#include <string>
#include <vector>

#include "psi/reduction.hpp"
#include "psi/semantics.hpp"

namespace psi {

struct EquivalenceConfig {
  Fuel fuel;
  // Extensions tried for "for all Ψ′". Empty means the default: generators
  // over the free names plus every assertion occurring in P or Q.
  std::optional<std::vector<Assertion>> assertion_basis;
  // Extensions allowed along one play.
  int extension_depth = 1;
  // Names added to fn(Ψ, P, Q) when enumerating input messages/channels.
  std::size_t fresh_names = 1;
  // Weak congruence only. Empty means identity plus [x := y] for distinct
  // free names.
  std::optional<std::vector<SubstitutionSeq>> substitution_basis;
  std::size_t max_states = 20000;
  // Bound on τ-steps in one weak closure.
  int weak_depth = 6;
  // Barbed only: how many tester contexts may be stacked along a play. 0
  // means one more than the deepest prefix nesting in P or Q, at most 3.
  // Assertion contexts are limited by extension_depth instead.
  int context_depth = 0;
  // Keep the final relation in the verdict (for re-verification).
  bool keep_relation = false;
};

enum class Outcome { Equivalent, Distinguished, Inconclusive };

std::string to_string(Outcome o);

struct GameState {
  Assertion env;
  Proc p;
  Proc q;
  int ext = 0;  // extensions (or contexts) used so far
};

// One position of a distinguishing play. `move` is what led here from the
// previous position; the first step has an empty move.
struct WitnessStep {
  enum class Move { Start, Instantiate, Extend, Swap, Left, Right, Context };
  Move move = Move::Start;
  std::optional<Label> label;   // Left/Right: attacker's label (bound names free)
  Assertion extension;          // Extend, Instantiate
  Proc context;                 // Context: the R in (· | R)
  GameState state;              // position after the move and the answer
  std::string text;
};

struct Verdict {
  Outcome result = Outcome::Inconclusive;
  std::string game;                  // "strong", "weak", "weak-cong" or "barbed"
  std::vector<WitnessStep> witness;  // Distinguished only
  // What fails at the last position: a static clause, an attacker move
  // with no answer (`failure_label`), or differing barbs.
  enum class Failure { None, Static, Unmatched, Barbs } failure_kind = Failure::None;
  std::optional<Label> failure_label;
  bool failure_left = true;
  std::string failure;
  std::string note;                  // bases, fuel, overflow details
  std::size_t states = 0;
  std::vector<GameState> relation;   // Equivalent and keep_relation

  bool equivalent() const { return result == Outcome::Equivalent; }
  bool distinguished() const { return result == Outcome::Distinguished; }
  bool inconclusive() const { return result == Outcome::Inconclusive; }
};

// Clean-up used on every successor position: nil components and unused
// binders dropped, idle copies beside a replication absorbed. On tagged
// instances a component whose every active prefix carries a tag that the
// component itself binds and disables is dropped too (it is bisimilar to
// 0). Only touches the top-level parallel/restriction/replication
// structure.
Proc tidy(const Proc& p, const Instance* inst = nullptr);

// Output bound names renamed to pool names fresh for `avoid`; returns the
// renamed label and target.
std::pair<Label, Proc> canonical_extrusion(const Step& s, const NameSet& avoid);

std::vector<Assertion> default_assertion_basis(const Instance& inst, const Assertion& psi,
                                               const std::vector<Proc>& ps);

Verdict strong_bisim(const Instance& inst, const Assertion& psi, const Proc& p, const Proc& q,
                     const EquivalenceConfig& cfg = {});

// τ*, or τ* α τ* when `alpha` is given. Bound names of `alpha` are kept as
// given (they should be fresh for P and Ψ).
std::vector<Proc> weak_transitions(const Instance& inst, const Assertion& psi, const Proc& p,
                                   const std::optional<Label>& alpha, const EquivalenceConfig& cfg = {});

// Every basis condition entailed by Ψ ⊗ F(P) is entailed by Ψ ⊗ F(Q). The
// basis is built over fn(Ψ, P, Q) plus one fresh name.
bool static_implies(const Instance& inst, const Assertion& psi, const Proc& p, const Proc& q);

Verdict weak_bisim(const Instance& inst, const Assertion& psi, const Proc& p, const Proc& q,
                   const EquivalenceConfig& cfg = {});

Verdict weak_congruence(const Instance& inst, const Proc& p, const Proc& q, const EquivalenceConfig& cfg = {});

// Output labels P exhibits under the unit environment, bound names
// canonicalised to pool names fresh for P.
std::vector<Label> barbs(const Instance& inst, const Proc& p, Fuel fuel = {});
bool exposes(const Instance& inst, const Proc& p, const Term& subj, Fuel fuel = {});
bool weakly_exposes(const Instance& inst, const Proc& p, const Term& subj, const EquivalenceConfig& cfg = {});

// Static contexts (· | R) used by barbed_bisim when none are supplied:
// extensions, single-output testers for every channel and message over
// fn(P, Q) plus a fresh name (nullary included), and one input tester per
// channel, unary and nullary.
std::vector<Proc> default_context_basis(const Instance& inst, const Proc& p, const Proc& q);

Verdict barbed_bisim(const Instance& inst, const Proc& p, const Proc& q, const EquivalenceConfig& cfg = {},
                     const std::optional<std::vector<Proc>>& context_basis = std::nullopt);

// Re-checks a distinguishing play: every move is a real transition (or
// extension), and the failure at the end reproduces.
std::optional<std::string> replay_witness(const Instance& inst, const Verdict& v, const EquivalenceConfig& cfg = {});

std::string describe(const Instance& inst, const Verdict& v);

}  // namespace psi
