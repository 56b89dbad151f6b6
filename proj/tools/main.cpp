#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cli.hpp"

int main(int argc, char** argv) {
  psi::cli::Options o;
  std::string verb;
  CLI::App app{"psi-calculus workbench"};
  app.add_option("verb", verb, "trans, legacy-trans, step, reduce, harmony, conservativity, bisim, weak-bisim, "
                               "weak-cong, barbed, encode-pip, encode-choice or corpus")
      ->required()
      ->check(CLI::IsMember(psi::cli::verbs()));
  app.add_option("inputs", o.inputs, "process texts (default: --corpus, then stdin)");
  app.add_option("--calculus", o.calculus, "pi, ether, triangle, preorder, tagged:<base>, separate:<base>")
      ->capture_default_str();
  app.add_option("--env", o.env, "environment assertion literal");
  app.add_option("--corpus", o.corpus, "file with one process per line");
  app.add_option("--seed", o.seed)->capture_default_str();
  app.add_option("--size", o.size, "corpus: maximum process size")->capture_default_str();
  app.add_option("--count", o.count, "corpus: number of processes")->capture_default_str();
  app.add_option("--max-states", o.max_states)->capture_default_str();
  app.add_option("--fuel", o.fuel, "replication unfolding depth")->capture_default_str();
  app.add_option("--extension-depth", o.extension_depth)->capture_default_str();
  app.add_option("--weak-depth", o.weak_depth)->capture_default_str();
  app.add_flag("--reorient", o.reorient, "legacy engine: orient input connectivity as K <-> M");
  app.add_flag("--separate", o.separate, "encode-choice: separate-choice target");
  app.add_flag("--check", o.check_choice, "encode-choice: check operational correspondence");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : psi::cli::kEngine;
  }
  return psi::cli::run_verb(verb, o, std::cin, std::cout, std::cerr);
}
