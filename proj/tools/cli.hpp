#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "psi/params.hpp"
#include "psi/semantics.hpp"

namespace psi::cli {

enum Exit : int {
  kOk = 0,            // equivalent, pass, or plain output
  kFail = 1,          // distinguished or a failed check
  kInconclusive = 2,
  kSyntax = 3,
  kIllFormed = 4,
  kEngine = 5,
};

struct Options {
  std::string calculus = "pi";
  std::string env;                  // assertion literal, empty means the unit
  std::string corpus;               // file of processes, one per line
  std::vector<std::string> inputs;  // process texts
  std::uint64_t seed = 0;
  std::size_t size = 5;
  std::size_t count = 100;
  std::size_t max_states = 20000;
  int fuel = 2;
  int extension_depth = 1;
  int weak_depth = 6;
  bool reorient = false;            // legacy engine input orientation
  bool separate = false;            // encode-choice: separate-choice target
  bool check_choice = false;        // encode-choice: run the correspondence checks
};

const std::vector<std::string>& verbs();

// `in` feeds the step REPL and stands in for missing inputs.
int run_verb(const std::string& verb, const Options& opts, std::istream& in, std::ostream& out, std::ostream& err);

// Re-enumerates the transitions of a trace record's source under its env and
// looks for one that prints to the same record.
bool replay_record(const Instance& inst, const std::string& line, Fuel fuel = {});

}  // namespace psi::cli
