#pragma once

#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "psi/semantics.hpp"

namespace psi {

struct SyntaxError : std::runtime_error {
  SyntaxError(const std::string& msg, std::size_t line, std::size_t col);
  std::size_t line;
  std::size_t col;
};

// What an instance literal parser may consume.
class LiteralReader {
 public:
  virtual ~LiteralReader() = default;
  virtual bool accept(std::string_view sym) = 0;
  virtual void expect(std::string_view sym) = 0;
  virtual bool at_name() const = 0;
  virtual Name name() = 0;
  [[noreturn]] virtual void fail(const std::string& msg) = 0;
};

using NameDisplay = std::function<std::string(Name)>;

struct LiteralSyntax {
  std::function<Assertion(LiteralReader&)> parse_assertion;
  std::function<std::string(const Assertion&, const NameDisplay&)> print_assertion;
};

// Instance-specific assertion literals, keyed by Instance::name(). Tagged
// instances reuse their base's syntax and add an optional "/ {x,...}".
void register_literals(const std::string& instance, LiteralSyntax syntax);

Proc parse_process(std::string_view text, const Instance& inst);
Assertion parse_assertion(std::string_view text, const Instance& inst);
Condition parse_condition(std::string_view text, const Instance& inst);
Term parse_term(std::string_view text, const Instance& inst);

// One process per line; blank lines and '#' comments skipped. Errors carry
// the corpus line number.
std::vector<Proc> parse_corpus(std::string_view text, const Instance& inst);

// Prints processes and the things that occur in transitions. Bound names
// get display names that avoid every free name the printer has seen, so one
// Printer should be used for everything that has to be read together.
class Printer {
 public:
  explicit Printer(const Instance& inst);

  // Makes displays of these free names unavailable for binders.
  void reserve(const NameSet& free);
  // Gives `n` a persistent display, as for the bound names of a label.
  std::string declare(Name n);

  std::string name(Name n) const;
  std::string term(const Term& t) const;
  std::string assertion(const Assertion& a) const;
  std::string condition(const Condition& c) const;
  std::string proc(const Proc& p);
  std::string label(const Label& l);
  std::string provenance(const Provenance& p);

 private:
  std::string pick(Name n);
  void proc_at(const Proc& p, int level, std::string& out);

  const Instance& inst_;
  std::vector<std::string> taken_;
  std::map<Name, std::string> display_;
};

std::string print(const Proc& p, const Instance& inst);
std::string print(const Assertion& a, const Instance& inst);

// env/source/label/provenance/target in one line.
std::string trace_record(const Instance& inst, const Transition& t);
std::string trace_record(const Instance& inst, const Step& s);

}  // namespace psi
