#include "cli.hpp"

#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include <json.hpp>

#include "psi/corpus.hpp"
#include "psi/encodings.hpp"
#include "psi/equivalence.hpp"
#include "psi/reduction.hpp"
#include "psi/syntax.hpp"

namespace psi::cli {

namespace {

struct IllFormed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Usage : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_wf(const Proc& p, const Instance& inst, const std::string& where) {
  auto ds = check_well_formed(p, inst);
  if (ds.empty()) return;
  std::string msg;
  for (const auto& d : ds) msg += (msg.empty() ? "" : "\n") + where + d.path + ": " + d.message;
  throw IllFormed(msg);
}

std::string slurp(std::istream& in) { return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()}; }

// Positional inputs, else the corpus file, else stdin.
std::vector<Proc> load(const Options& o, const Instance& inst, std::istream& in) {
  std::vector<Proc> ps;
  if (!o.inputs.empty()) {
    for (std::size_t i = 0; i < o.inputs.size(); ++i) {
      ps.push_back(parse_process(o.inputs[i], inst));
      require_wf(ps.back(), inst, "input " + std::to_string(i + 1) + " ");
    }
    return ps;
  }
  std::string text;
  if (!o.corpus.empty()) {
    std::ifstream f(o.corpus);
    if (!f) throw Usage("cannot read " + o.corpus);
    text = slurp(f);
  } else {
    text = slurp(in);
  }
  ps = parse_corpus(text, inst);
  for (std::size_t i = 0; i < ps.size(); ++i) require_wf(ps[i], inst, "process " + std::to_string(i + 1) + " ");
  return ps;
}

Assertion env_of(const Options& o, const Instance& inst) {
  if (o.env.empty()) return inst.unit();
  return parse_assertion(o.env, inst);
}

EquivalenceConfig config_of(const Options& o) {
  EquivalenceConfig cfg;
  cfg.fuel.rep_depth = o.fuel;
  cfg.max_states = o.max_states;
  cfg.extension_depth = o.extension_depth;
  cfg.weak_depth = o.weak_depth;
  return cfg;
}

int exit_of(Outcome r) {
  switch (r) {
    case Outcome::Equivalent:
      return kOk;
    case Outcome::Distinguished:
      return kFail;
    case Outcome::Inconclusive:
      break;
  }
  return kInconclusive;
}

std::pair<Proc, Proc> two(const std::vector<Proc>& ps) {
  if (ps.size() != 2) throw Usage("expected two processes, got " + std::to_string(ps.size()));
  return {ps[0], ps[1]};
}

int step_repl(const Instance& inst, const Assertion& env, Proc p, Fuel fuel, std::istream& in, std::ostream& out) {
  for (;;) {
    auto ts = transitions(inst, env, p, fuel);
    Printer pr(inst);
    pr.reserve(names_of(env));
    pr.reserve(free_names(p));
    out << "state: " << pr.proc(p) << "\n";
    if (ts.empty()) {
      out << "no transitions\n";
      return kOk;
    }
    for (std::size_t i = 0; i < ts.size(); ++i) {
      Printer tp(inst);
      tp.reserve(names_of(env));
      tp.reserve(free_names(p));
      std::string label = tp.label(ts[i].label);
      out << "  [" << i << "] " << label << "  " << tp.provenance(ts[i].prov) << "  -> " << tp.proc(ts[i].target)
          << "\n";
    }
    out << "> " << std::flush;
    std::string line;
    if (!std::getline(in, line)) return kOk;
    if (line == "q" || line == "quit") return kOk;
    std::size_t k = 0;
    try {
      k = std::stoul(line);
    } catch (const std::exception&) {
      k = ts.size();
    }
    if (k >= ts.size()) {
      out << "pick an index from 0 to " << ts.size() - 1 << ", or q\n";
      continue;
    }
    p = ts[k].target;
  }
}

int run(const std::string& verb, const Options& o, std::istream& in, std::ostream& out) {
  InstancePtr ip = make_instance(o.calculus);
  if (!ip) throw Usage("unknown calculus '" + o.calculus + "'");
  const Instance& inst = *ip;
  Fuel fuel{o.fuel};

  if (verb == "trans" || verb == "legacy-trans") {
    Assertion env = env_of(o, inst);
    for (const auto& p : load(o, inst, in)) {
      if (verb == "trans") {
        for (const auto& t : transitions(inst, env, p, fuel)) out << trace_record(inst, t) << "\n";
      } else {
        for (const auto& s : legacy_transitions(inst, env, p, fuel, LegacyOptions{o.reorient}))
          out << trace_record(inst, s) << "\n";
      }
    }
    return kOk;
  }
  if (verb == "step") {
    if (o.inputs.size() != 1) throw Usage("step takes one process");
    auto ps = load(o, inst, in);
    return step_repl(inst, env_of(o, inst), ps[0], fuel, in, out);
  }
  if (verb == "reduce") {
    auto ps = load(o, inst, in);
    for (const auto& p : ps) {
      if (ps.size() > 1) out << "# " << print(p, inst) << "\n";
      for (const auto& r : reductions(inst, p, fuel)) out << print(r.target, inst) << "\n";
    }
    return kOk;
  }
  if (verb == "harmony" || verb == "conservativity") {
    Assertion env = env_of(o, inst);
    auto ps = load(o, inst, in);
    std::size_t bad = 0;
    for (const auto& p : ps) {
      if (verb == "harmony") {
        auto r = harmony_check(inst, p, fuel);
        if (r.ok()) continue;
        ++bad;
        out << "FAIL " << print(p, inst) << ": " << r.unmatched_reductions.size() << " reductions without a tau, "
            << r.unmatched_taus.size() << " taus without a reduction\n";
      } else {
        auto r = conservativity_check(inst, env, p, fuel, LegacyOptions{o.reorient});
        if (r.ok()) continue;
        ++bad;
        out << "FAIL " << print(p, inst) << ": " << r.only_new.size() << " only in the new engine, "
            << r.only_legacy.size() << " only in the legacy engine\n";
        for (const auto& s : r.only_legacy) out << "  legacy " << trace_record(inst, s) << "\n";
        for (const auto& s : r.only_new) out << "  new " << trace_record(inst, s) << "\n";
      }
    }
    out << (bad ? "FAIL" : "PASS") << " " << verb << ": " << ps.size() << " processes, " << bad << " mismatches\n";
    return bad ? kFail : kOk;
  }
  if (verb == "bisim" || verb == "weak-bisim" || verb == "weak-cong" || verb == "barbed") {
    auto [p, q] = two(load(o, inst, in));
    EquivalenceConfig cfg = config_of(o);
    Verdict v;
    if (verb == "bisim") v = strong_bisim(inst, env_of(o, inst), p, q, cfg);
    else if (verb == "weak-bisim") v = weak_bisim(inst, env_of(o, inst), p, q, cfg);
    else if (verb == "weak-cong") v = weak_congruence(inst, p, q, cfg);
    else v = barbed_bisim(inst, p, q, cfg);
    out << describe(inst, v);
    return exit_of(v.result);
  }
  if (verb == "encode-pip") {
    std::vector<std::string> texts = o.inputs;
    if (texts.empty()) texts.push_back(slurp(in));
    PreorderInstance target;
    std::vector<PipPtr> ps;
    for (const auto& t : texts) {
      ps.push_back(parse_pip(t));
      out << print(encode_pip(ps.back()), target) << "\n";
    }
    if (ps.size() == 2) {
      Verdict v = pip_correspondence(ps[0], ps[1], config_of(o));
      out << describe(target, v);
      return exit_of(v.result);
    }
    if (ps.size() > 2) throw Usage("encode-pip takes one term, or two to compare");
    return kOk;
  }
  if (verb == "encode-choice") {
    auto ps = load(o, inst, in);
    InstancePtr target = make_instance((o.separate ? "separate:" : "tagged:") + o.calculus);
    if (!target) throw Usage("no tagged target for '" + o.calculus + "'");
    EquivalenceConfig cfg = config_of(o);
    int rc = kOk;
    for (const auto& p : ps) {
      out << print(encode_choice(p), *target) << "\n";
      if (!o.check_choice) continue;
      auto r = choice_correspondence(inst, *target, env_of(o, inst), p, cfg);
      out << (r.ok() ? "PASS" : "FAIL") << " forward " << r.forward_failures << ", backward "
          << r.backward_failures << ", inconclusive " << r.inconclusive << ", inter-summand taus "
          << r.inter_summand_taus << ", post-commit firings " << r.post_commit_firings << " (" << r.source_transitions
          << " source, " << r.target_transitions << " target transitions, " << r.sums << " sums)\n";
      for (const auto& d : r.details) out << "  " << d << "\n";
      if (!r.ok()) {
        bool only_inconclusive = r.forward_failures == 0 && r.backward_failures == 0 &&
                                 r.inter_summand_taus == 0 && r.post_commit_firings == 0;
        rc = std::max(rc, only_inconclusive && rc == kOk ? int(kInconclusive) : int(kFail));
      }
    }
    return rc;
  }
  if (verb == "corpus") {
    CorpusBounds b;
    b.max_size = o.size;
    b.count = o.count;
    auto ps = corpus_generate(o.seed, b, inst);
    out << "# " << inst.name() << " seed " << o.seed << " size " << o.size << " count " << ps.size() << "\n";
    for (const auto& p : ps) out << print(p, inst) << "\n";
    return kOk;
  }
  throw Usage("unknown verb '" + verb + "'");
}

}  // namespace

const std::vector<std::string>& verbs() {
  static const std::vector<std::string> vs{"trans",      "legacy-trans", "step",      "reduce",
                                           "harmony",    "conservativity", "bisim",   "weak-bisim",
                                           "weak-cong",  "barbed",       "encode-pip", "encode-choice",
                                           "corpus"};
  return vs;
}

int run_verb(const std::string& verb, const Options& opts, std::istream& in, std::ostream& out, std::ostream& err) {
  try {
    return run(verb, opts, in, out);
  } catch (const SyntaxError& e) {
    err << "syntax error: " << e.what() << "\n";
    return kSyntax;
  } catch (const IllFormed& e) {
    err << "ill-formed:\n" << e.what() << "\n";
    return kIllFormed;
  } catch (const Usage& e) {
    err << "usage: " << e.what() << "\n";
    return kEngine;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kEngine;
  }
}

bool replay_record(const Instance& inst, const std::string& line, Fuel fuel) {
  auto j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.contains("source") || !j.contains("env")) return false;
  Proc src = parse_process(j["source"].get<std::string>(), inst);
  Assertion env = parse_assertion(j["env"].get<std::string>(), inst);
  std::string want = nlohmann::ordered_json::parse(line).dump();
  if (j.contains("provenance")) {
    for (const auto& t : transitions(inst, env, src, fuel))
      if (trace_record(inst, t) == want) return true;
  } else {
    for (const auto& s : legacy_transitions(inst, env, src, fuel))
      if (trace_record(inst, s) == want) return true;
  }
  return false;
}

}  // namespace psi::cli
