#pragma once

#include <memory>
#include <string>
#include <vector>

#include "psi/params.hpp"

namespace psi {

enum class Kind : std::uint8_t { Nil, Assert, Out, In, Case, Sum, Par, Res, Bang };

struct Node;
using Proc = std::shared_ptr<const Node>;

struct Branch {
  Condition cond;
  Proc body;
};

// Immutable agent syntax. Sum is kept as its own node (prefix-guarded
// choice); desugar_sum turns it into a case when the instance has a
// condition that always holds.
struct Node {
  Kind kind = Kind::Nil;
  Assertion assertion;            // Assert
  Term subj;                      // Out, In
  Term obj;                       // Out: message; In: pattern
  std::vector<Name> vars;         // In: pattern variables
  std::vector<Branch> branches;   // Case
  std::vector<Proc> summands;     // Sum
  Proc left;                      // Out/In continuation, Res/Bang body, Par left
  Proc right;                     // Par right
  Name bound;                     // Res

  // Cached at construction.
  NameSet free;
  std::size_t size = 1;
};

Proc nil();
Proc assertion(Assertion a);
Proc out(Term subj, Term msg, Proc cont);
Proc in(Term subj, std::vector<Name> vars, Term pattern, Proc cont);
Proc case_of(std::vector<Branch> branches);
Proc sum(std::vector<Proc> summands);
Proc par(Proc p, Proc q);
Proc par_all(const std::vector<Proc>& ps);  // right-nested; 0 when empty
Proc res(Name x, Proc p);
Proc res_all(const std::vector<Name>& xs, Proc p);  // xs[0] outermost
Proc bang(Proc p);

// Convenience: nullary prefixes and name terms.
Proc out_name(Name subj, Name msg, Proc cont);
Proc in_var(Name subj, Name var, Proc cont);

const NameSet& free_names(const Proc& p);
NameSet all_names(const Proc& p);
inline NameSet support(const Proc& p) { return free_names(p); }
inline bool is_fresh(Name a, const Proc& p) { return !free_names(p).contains(a); }
bool is_fresh(const std::vector<Name>& as, const Proc& p);
std::size_t size_of(const Proc& p);

Proc apply_perm(const Permutation& perm, const Proc& p);

// Capture-avoiding simultaneous substitution. Binders that would capture
// are renamed to fresh atoms. Throws SubstError for ill-formed σ.
Proc subst(const Proc& p, const Subst& s);
Proc subst_seq(const Proc& p, const SubstitutionSeq& seq);

// Renames every binder to a globally fresh atom.
Proc freshen(const Proc& p);

// Canonical serialisation with binders numbered in traversal order.
// Bound names listed in `outer` are treated as already bound (in order).
std::string alpha_key(const Proc& p, const std::vector<Name>& outer = {});
std::string alpha_key(const Assertion& a, const std::vector<Name>& outer = {});
std::string alpha_key(const Condition& c, const std::vector<Name>& outer = {});
std::string alpha_key(const Term& t, const std::vector<Name>& outer = {});
bool alpha_eq(const Proc& p, const Proc& q);

bool structurally_equal(const Proc& p, const Proc& q);

// --- well-formedness -------------------------------------------------------

struct Diagnostic {
  std::string path;
  std::string message;
};

bool is_assertion_guarded(const Proc& p);
bool is_prefix_guarded(const Proc& p);
std::vector<Diagnostic> check_well_formed(const Proc& p);
std::vector<Diagnostic> check_well_formed(const Proc& p, const Instance& inst);

// --- frames ----------------------------------------------------------------

struct Frame {
  std::vector<Name> binders;
  Assertion assertion;
};

// Frame without renaming: binders are the syntactic restriction names.
// Only meaningful when all binders are distinct (e.g. after freshen).
Frame frame_syntactic(const Proc& p);
Frame frame_of(const Proc& p);
bool frame_alpha_eq(const Frame& f, const Frame& g);
std::string alpha_key(const Frame& f);

// Ψ ⊗ F(P) ⊢ φ, with the frame binders fresh for φ.
bool frame_entails(const Instance& inst, const Assertion& psi, const Proc& p, const Condition& phi);

// --- normal forms ----------------------------------------------------------

struct NormalForm {
  std::vector<Name> binders;
  std::vector<Assertion> assertions;
  Proc guarded;  // parallel composition of guarded components, or 0
};

NormalForm normal_form(const Proc& p);
Proc reassemble(const NormalForm& nf);

// Key identifying P up to the structural congruence used by the reduction
// semantics: binders hoisted and permuted, nil units and unused binders
// dropped, parallel flattened to a multiset, idle copies next to their
// replication absorbed. Replications are never unfolded.
std::string congruence_key(const Proc& p);
bool congruent(const Proc& p, const Proc& q);

// --- sums ------------------------------------------------------------------

struct SumError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// case ⊤:P [] ⊤:Q. Throws SumError if the instance lacks ⊤ or an argument
// is not assertion-guarded.
Proc desugar_sum(const Instance& inst, const Proc& p, const Proc& q);
// Rewrites every Sum node into nested binary cases.
Proc desugar_sums(const Instance& inst, const Proc& p);

}  // namespace psi
