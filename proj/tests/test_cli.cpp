#include <gtest/gtest.h>

#include <sstream>

#include "cli.hpp"
#include "oracles.hpp"
#include "psi/corpus.hpp"
#include "psi/syntax.hpp"

using namespace psi;

namespace {

struct Result {
  int rc;
  std::string out;
  std::string err;
};

Result run(const std::string& verb, cli::Options o, const std::string& stdin_text = "") {
  std::istringstream in(stdin_text);
  std::ostringstream out, err;
  int rc = cli::run_verb(verb, o, in, out, err);
  return {rc, out.str(), err.str()};
}

cli::Options opts(const std::string& calculus, std::vector<std::string> inputs, const std::string& env = "") {
  cli::Options o;
  o.calculus = calculus;
  o.inputs = std::move(inputs);
  o.env = env;
  return o;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);)
    if (!l.empty()) out.push_back(l);
  return out;
}

}  // namespace

TEST(Syntax, RoundTripOnCorpora) {
  for (const char* name : {"pi", "ether", "triangle", "preorder"}) {
    auto inst = make_instance(name);
    CorpusBounds b;
    b.max_size = 7;
    b.count = 150;
    for (const auto& p : corpus_generate(91, b, *inst)) {
      std::string s = print(p, *inst);
      Proc q = parse_process(s, *inst);
      EXPECT_TRUE(alpha_eq(p, q)) << name << " " << s;
      EXPECT_EQ(print(q, *inst), s);
    }
  }
}

TEST(Syntax, RoundTripTagged) {
  PiInstance pi;
  auto tagged = make_instance("tagged:pi");
  CorpusBounds b;
  b.sums_only = true;
  b.count = 60;
  for (const auto& p : corpus_generate(92, b, pi)) {
    Proc e = encode_choice(p);
    EXPECT_TRUE(alpha_eq(parse_process(print(e, *tagged), *tagged), e)) << print(e, *tagged);
  }
}

TEST(Syntax, Errors) {
  PiInstance pi;
  EXPECT_THROW(parse_process("'a.(", pi), SyntaxError);
  EXPECT_THROW(parse_process("(new)0", pi), SyntaxError);
  try {
    parse_corpus("'a\n\n# c\n'b.(\n", pi);
    FAIL();
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.line, 4u);
  }
}

TEST(Syntax, SugarAndComments) {
  PiInstance pi;
  auto ps = parse_corpus("# header\na(x).'x\n\n'a<b>.0 | b\n", pi);
  ASSERT_EQ(ps.size(), 2u);
  EXPECT_TRUE(alpha_eq(ps[0], parse_process("a(\\x)x.'x.0", pi)));
  EXPECT_EQ(print(ps[0], pi), "a(x).'x");
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("trans", opts("pi", {"0"})).rc, cli::kOk);
  EXPECT_EQ(run("trans", opts("pi", {"'a.("})).rc, cli::kSyntax);
  Result ill = run("trans", opts("ether", {"!(|{x}|)"}));
  EXPECT_EQ(ill.rc, cli::kIllFormed);
  EXPECT_NE(ill.err.find("input 1"), std::string::npos);
  EXPECT_EQ(run("bisim", opts("pi", {"'a", "'a | 0"})).rc, cli::kOk);
  EXPECT_EQ(run("bisim", opts("pi", {"'a", "'b"})).rc, cli::kFail);
  EXPECT_EQ(run("bisim", opts("pi", {"'a"})).rc, cli::kEngine);
  cli::Options tight = opts("pi", {"'a.'b.'c", "'a.'b.'c"});
  tight.max_states = 2;
  EXPECT_EQ(run("bisim", tight).rc, cli::kInconclusive);
  EXPECT_EQ(run("trans", opts("nosuch", {"0"})).rc, cli::kEngine);
}

TEST(Cli, TransOnEtherExample) {
  Result r = run("trans", opts("ether", {"(new x)('x | (|{x}|))"}, "{y}"));
  ASSERT_EQ(r.rc, 0);
  auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 1u);
  EXPECT_NE(ls[0].find(R"("label":"'y")"), std::string::npos);
  EXPECT_NE(ls[0].find(R"("provenance":"(new x; )x")"), std::string::npos);
}

TEST(Cli, RecordsReplay) {
  for (const char* name : {"pi", "ether", "preorder"}) {
    auto inst = make_instance(name);
    CorpusBounds b;
    b.count = 40;
    std::string corpus;
    for (const auto& p : corpus_generate(93, b, *inst)) corpus += print(p, *inst) + "\n";
    std::string env = print(oracle::enabling_env(*inst), *inst);
    for (const char* verb : {"trans", "legacy-trans"}) {
      cli::Options o = opts(name, {}, env);
      Result r = run(verb, o, corpus);
      ASSERT_EQ(r.rc, 0) << r.err;
      auto ls = lines(r.out);
      EXPECT_FALSE(ls.empty());
      for (const auto& l : ls) EXPECT_TRUE(cli::replay_record(*inst, l)) << l;
    }
  }
}

TEST(Cli, ReplayRejectsForgedRecord) {
  PiInstance pi;
  EXPECT_FALSE(cli::replay_record(
      pi, R"({"env":"1","source":"'a","label":"'b","provenance":"(new ; )a","target":"0"})"));
  EXPECT_FALSE(cli::replay_record(pi, "not json"));
}

TEST(Cli, StepRepl) {
  Result r = run("step", opts("pi", {"'a<b> | a(x).'x"}), "9\n0\nq\n");
  EXPECT_EQ(r.rc, 0);
  EXPECT_NE(r.out.find("pick an index"), std::string::npos);
  EXPECT_NE(r.out.find("state: "), std::string::npos);
}

TEST(Cli, ConservativityAndHarmonyVerbs) {
  Result c = run("conservativity", opts("pi", {"'a<b> | a(x).'x", "!'a | a"}));
  EXPECT_EQ(c.rc, 0);
  EXPECT_NE(c.out.find("PASS conservativity: 2 processes, 0 mismatches"), std::string::npos);
  Result tri = run("conservativity", opts("triangle", {"(new b)('a | c | (|{a->a, a->b, b->b, b->c, c->c}|))"}));
  EXPECT_EQ(tri.rc, cli::kFail);
  Result h = run("harmony", opts("ether", {"(new x)('x | (|{x}|)) | (new y)(y | (|{y}|))"}));
  EXPECT_EQ(h.rc, 0);
}

TEST(Cli, EncodeVerbs) {
  Result p = run("encode-pip", opts("pi", {"a/b"}));
  EXPECT_EQ(p.out, "(|{b<a}|)\n");
  EXPECT_EQ(run("encode-pip", opts("pi", {"a/b | b/c", "a/c"})).rc, cli::kFail);
  cli::Options o = opts("pi", {"'a.'b + c.'d"});
  o.check_choice = true;
  Result c = run("encode-choice", o);
  EXPECT_EQ(c.rc, 0);
  EXPECT_NE(c.out.find("PASS forward 0, backward 0"), std::string::npos);
}

TEST(Cli, CorpusVerbIsDeterministic) {
  cli::Options o = opts("pi", {});
  o.seed = 5;
  o.count = 20;
  Result a = run("corpus", o), b = run("corpus", o);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(lines(a.out).size(), 21u);
}
