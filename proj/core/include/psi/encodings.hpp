#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "psi/equivalence.hpp"

namespace psi {

// --- πP ---------------------------------------------------------------------

struct PipProc;
using PipPtr = std::shared_ptr<const PipProc>;

struct PipPrefix {
  enum class Kind : std::uint8_t { In, Out, CondTau };
  Kind kind = Kind::In;
  Name subj;      // In, Out
  Name obj;       // In, Out: binds in the continuation
  Condition cond;  // CondTau: x < y or x <-> y

  static PipPrefix in(Name a, Name x) { return {Kind::In, a, x, {}}; }
  static PipPrefix out(Name a, Name y) { return {Kind::Out, a, y, {}}; }
  static PipPrefix cond_tau(Condition c) { return {Kind::CondTau, {}, {}, c}; }
};

struct PipSummand {
  PipPrefix prefix;
  PipPtr cont;
};

// a/b, Σ π.P (empty sum is 0), P | Q, (νx)P.
struct PipProc {
  enum class Kind : std::uint8_t { Arc, Sum, Par, Res };
  Kind kind = Kind::Sum;
  Name a, b;                         // Arc a/b
  std::vector<PipSummand> summands;  // Sum
  PipPtr left, right;                // Par; Res body in left
  Name bound;                        // Res
};

PipPtr pip_nil();
PipPtr pip_arc(Name a, Name b);
PipPtr pip_sum(std::vector<PipSummand> ss);
PipPtr pip_prefix(PipPrefix pre, PipPtr cont);
PipPtr pip_par(PipPtr p, PipPtr q);
PipPtr pip_res(Name x, PipPtr p);

// Free names in order of first occurrence.
std::vector<Name> pip_free_names(const PipPtr& p);
std::size_t pip_size(const PipPtr& p);

// 0 | a/b | a(x).P | 'a(y).P | [x<y]tau.P | [x<->y]tau.P | P + Q | P | Q
// | (new x y)P. Sums must be sums of prefixes.
PipPtr parse_pip(std::string_view text);
std::string print_pip(const PipPtr& p);

// Target is PreorderInstance.
Proc encode_pip(const PipPtr& p);

// strong_bisim on the encodings, under the empty arc set.
Verdict pip_correspondence(const PipPtr& p, const PipPtr& q, const EquivalenceConfig& cfg = {});

// --- mixed choice -------------------------------------------------------------

struct ChoiceError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Sums of prefixes become parallel summands sharing one fresh tag that each
// continuation disables. Throws ChoiceError on a summand that is not a
// prefix or on tagged source terms.
Proc encode_choice(const Proc& p);

Label untag_label(const Label& l);

struct ChoiceReport {
  std::size_t source_transitions = 0;
  std::size_t target_transitions = 0;
  std::size_t forward_failures = 0;
  std::size_t backward_failures = 0;
  std::size_t inconclusive = 0;
  std::size_t sums = 0;
  std::size_t inter_summand_taus = 0;
  std::size_t post_commit_firings = 0;
  std::vector<std::string> details;

  bool ok() const {
    return forward_failures == 0 && backward_failures == 0 && inconclusive == 0 && inter_summand_taus == 0 &&
           post_commit_firings == 0;
  }
};

// Forward and backward operational correspondence under Ψ (lifted to
// (Ψ, ∅)), plus the two tag checks on every sum: its skeleton (continuations
// replaced by 0) has no τ between summands, and after any summand fires
// nothing is left that can move. `target` must be tagged over `source`.
ChoiceReport choice_correspondence(const Instance& source, const Instance& target, const Assertion& psi,
                                   const Proc& p, const EquivalenceConfig& cfg = {});

struct AbstractionReport {
  Verdict source;
  Verdict target;
  bool agree() const { return source.result == target.result; }
};

// P ~ Q under the unit against ⟦P⟧ ~ ⟦Q⟧ under (1, ∅).
AbstractionReport choice_full_abstraction(const Instance& source, const Instance& target, const Proc& p,
                                          const Proc& q, const EquivalenceConfig& cfg = {});

}  // namespace psi
