#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "oracles.hpp"
#include "psi/corpus.hpp"
#include "psi/encodings.hpp"
#include "psi/syntax.hpp"

using namespace psi;

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<Proc> sum_corpus(const Instance& inst, std::uint64_t seed, std::size_t count) {
  CorpusBounds b;
  b.max_size = 6;
  b.count = count;
  b.sums_only = true;
  return corpus_generate(seed, b, inst);
}

NameSet with_one_fresh(NameSet u) {
  u.insert(fresh_name(u, "f"));
  return u;
}

// a <-> b on the printed term; the generator only uses a and b free.
PipPtr swap_ab(const PipPtr& p) {
  std::string s = print_pip(p);
  s = std::regex_replace(s, std::regex(R"(\ba\b)"), "\x01");
  s = std::regex_replace(s, std::regex(R"(\bb\b)"), "a");
  s = std::regex_replace(s, std::regex("\x01"), "b");
  return parse_pip(s);
}

}  // namespace

TEST(PiP, GoldenEncodings) {
  PreorderInstance pre;
  std::size_t seen = 0;
  for (const auto& e : std::filesystem::directory_iterator(std::string(PSI_GOLDEN_DIR) + "/pip")) {
    if (e.path().extension() != ".pip") continue;
    auto want_path = e.path();
    want_path.replace_extension(".psi");
    PipPtr src = parse_pip(read_file(e.path()));
    Proc want = parse_process(read_file(want_path), pre);
    Proc got = encode_pip(src);
    EXPECT_TRUE(alpha_eq(got, want)) << e.path().filename() << ": " << print(got, pre) << " vs " << print(want, pre);
    ++seen;
  }
  EXPECT_GE(seen, 4u);
}

TEST(PiP, PrintParseRoundTrip) {
  for (const auto& p : oracle::pip_generate(81, 60, 5)) {
    PipPtr q = parse_pip(print_pip(p));
    EXPECT_EQ(print_pip(q), print_pip(p));
  }
}

TEST(PiP, EncodedStepsMatchOracle) {
  PreorderInstance pre;
  for (const auto& p : oracle::pip_generate(82, 80, 5)) {
    Proc e = encode_pip(p);
    NameSet u = with_one_fresh(free_names(e));
    EXPECT_EQ(oracle::engine_keys(pre, pre.unit(), e, u), oracle::pip_oracle_keys(p, u)) << print_pip(p);
  }
}

TEST(PiP, CorrespondenceMatchesOracle) {
  auto ps = oracle::pip_generate(83, 40, 4);
  std::size_t decided = 0, equal = 0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const PipPtr& p = ps[i];
    // Alternate unrelated pairs with pairs that should be bisimilar.
    PipPtr q = i % 2 ? ps[(i * 7 + 3) % ps.size()] : pip_par(p, pip_nil());
    auto want = oracle::pip_bisim_oracle(p, q);
    Verdict v = pip_correspondence(p, q);
    if (!want || v.inconclusive()) continue;
    ++decided;
    equal += *want;
    EXPECT_EQ(*want, v.equivalent()) << print_pip(p) << " vs " << print_pip(q);
  }
  EXPECT_GE(decided, 30u);
  EXPECT_GE(equal, 10u);
}

TEST(PiP, FramesDistinguishArcs) {
  Verdict v = pip_correspondence(parse_pip("a/b | b/c"), parse_pip("a/c"));
  ASSERT_TRUE(v.distinguished());
  EXPECT_EQ(v.failure_kind, Verdict::Failure::Static);
}

TEST(PiP, UnreachableGuardIsInvisible) {
  // c is local and never placed below anything, so the guard never holds.
  EXPECT_TRUE(pip_correspondence(parse_pip("(new c)[c<a]tau.'a(y).0"), parse_pip("(new c)[c<a]tau.b(z).0")).equivalent());
  EXPECT_TRUE(pip_correspondence(parse_pip("'a(y).0"), parse_pip("'a(y).0")).equivalent());
}

TEST(PiP, EncodingCommutesWithSwap) {
  Name a = named("a"), b = named("b");
  Permutation pm = Permutation::swap(a, b);
  for (const auto& p : oracle::pip_generate(84, 60, 5))
    EXPECT_TRUE(alpha_eq(encode_pip(swap_ab(p)), apply_perm(pm, encode_pip(p)))) << print_pip(p);
}

TEST(Choice, SumFreeIsUnchanged) {
  PiInstance pi;
  CorpusBounds b;
  b.allow_sum = false;
  b.count = 60;
  for (const auto& p : corpus_generate(85, b, pi)) EXPECT_TRUE(alpha_eq(encode_choice(p), p)) << print(p, pi);
}

TEST(Choice, EncodingShape) {
  PiInstance pi;
  auto tagged = make_instance("tagged:pi");
  Proc got = encode_choice(parse_process("'a.'b + c.'d", pi));
  Proc want = parse_process("(new t)('a@t.('b | (|1 / {t}|)) | c@t.('d | (|1 / {t}|)))", *tagged);
  EXPECT_TRUE(alpha_eq(got, want)) << print(got, *tagged);
  EXPECT_THROW(encode_choice(sum({par(parse_process("'a", pi), nil()), parse_process("b", pi)})), ChoiceError);
}

TEST(Choice, ExampleOutputSummandFires) {
  PiInstance pi;
  auto tagged = make_instance("tagged:pi");
  const Instance& t = *tagged;
  Proc r = encode_choice(parse_process("'a.'b + c.'d", pi));
  std::vector<Transition> outs;
  // The untagged subject, via a@t <-> a.
  for (const auto& tr : transitions(t, t.unit(), r))
    if (tr.label.kind == Label::Kind::Out && tr.label.subj == Term::of(named("a"))) outs.push_back(tr);
  ASSERT_EQ(outs.size(), 1u);
  Proc target = tidy(outs[0].target);
  Proc want = parse_process("(new t)('b | (|1 / {t}|) | c@t.('d | (|1 / {t}|)))", t);
  EXPECT_TRUE(congruent(target, want)) << print(target, t);

  Proc s = parse_process("(new t)((|1 / {t}|) | c@t.('d | (|1 / {t}|)))", t);
  EXPECT_TRUE(transitions(t, t.unit(), s).empty());
  EXPECT_TRUE(strong_bisim(t, t.unit(), s, nil()).equivalent());
  EXPECT_TRUE(strong_bisim(t, t.unit(), outs[0].target, parse_process("'b", t)).equivalent());
}

TEST(Choice, NoTauBetweenSummands) {
  auto tagged = make_instance("tagged:pi");
  PiInstance pi;
  for (const char* text : {"'a + a", "'a<b> + a(x).'x", "'a.'c + a.'d + b"}) {
    Proc e = encode_choice(parse_process(text, pi));
    for (const auto& tr : transitions(*tagged, tagged->unit(), e)) EXPECT_FALSE(tr.label.is_tau()) << text;
  }
}

TEST(Choice, CorrespondenceOnSums) {
  PiInstance pi;
  auto tagged = make_instance("tagged:pi");
  std::size_t sums = 0;
  for (const auto& p : sum_corpus(pi, 86, 60)) {
    auto r = choice_correspondence(pi, *tagged, pi.unit(), p);
    EXPECT_TRUE(r.ok()) << print(p, pi) << ": " << r.forward_failures << "/" << r.backward_failures << "/"
                        << r.inconclusive << "/" << r.inter_summand_taus << "/" << r.post_commit_firings;
    sums += r.sums;
  }
  EXPECT_GT(sums, 30u);
}

TEST(Choice, CorrespondenceOnEtherUnderEnv) {
  EtherInstance e;
  auto tagged = make_instance("tagged:ether");
  Assertion env = oracle::enabling_env(e);
  for (const auto& p : sum_corpus(e, 87, 30)) {
    auto r = choice_correspondence(e, *tagged, env, p);
    EXPECT_TRUE(r.ok()) << print(p, e);
  }
}

TEST(Choice, BarbsPreservedAndReflected) {
  PiInstance pi;
  auto tagged = make_instance("tagged:pi");
  for (const auto& p : sum_corpus(pi, 88, 60)) {
    std::set<std::string> src, tgt;
    for (const auto& l : barbs(pi, p)) src.insert(label_key(l));
    for (const auto& l : barbs(*tagged, encode_choice(p))) tgt.insert(label_key(untag_label(l)));
    EXPECT_EQ(src, tgt) << print(p, pi);
  }
}

TEST(Choice, EncodingCommutesWithPermutation) {
  PiInstance pi;
  Permutation pm = Permutation::swap(named("a"), named("c"));
  for (const auto& p : sum_corpus(pi, 89, 60))
    EXPECT_TRUE(alpha_eq(encode_choice(apply_perm(pm, p)), apply_perm(pm, encode_choice(p)))) << print(p, pi);
}

TEST(Choice, UntagLabel) {
  Name m = named("m"), n = named("n"), x = named("x");
  Label l = Label::out(Term::tagged(m, x), {}, Term::of(n));
  EXPECT_EQ(label_key(untag_label(l)), label_key(Label::out(Term::of(m), {}, Term::of(n))));
  EXPECT_TRUE(untag_label(Label::tau()).is_tau());
  Label plain = Label::in(Term::of(m), Term::of(n));
  EXPECT_EQ(label_key(untag_label(plain)), label_key(plain));
}

TEST(Choice, FullAbstractionAgrees) {
  PiInstance pi;
  auto tagged = make_instance("tagged:pi");
  const char* pairs[][2] = {{"'a + b", "b + 'a"}, {"'a + b", "'a | b"}, {"'a.'b + 'a.'b", "'a.'b"}, {"'a + b", "'a"}};
  for (auto& pr : pairs) {
    auto r = choice_full_abstraction(pi, *tagged, parse_process(pr[0], pi), parse_process(pr[1], pi));
    EXPECT_TRUE(r.agree()) << pr[0] << " vs " << pr[1] << ": " << to_string(r.source.result) << " / "
                           << to_string(r.target.result);
  }
}

TEST(Choice, TaggedConnectivity) {
  auto tagged = make_instance("tagged:pi");
  auto separate = make_instance("separate:pi");
  Name a = named("a"), b = named("b"), t = named("t"), u = named("u");
  std::vector<Term> terms{Term::of(a), Term::of(b), Term::tagged(a, t), Term::tagged(a, u), Term::tagged(b, t)};
  auto conn = [](const Instance& i, const Term& x, const Term& y) {
    return i.entails(i.unit(), Condition::conn(x, y));
  };
  // Same tag: no connection, so not reflexive.
  EXPECT_FALSE(conn(*tagged, Term::tagged(a, t), Term::tagged(a, t)));
  EXPECT_TRUE(conn(*tagged, Term::tagged(a, t), Term::tagged(a, u)));
  // Without the distinct-tag clause symmetry and transitivity carry over.
  for (const auto& x : terms)
    for (const auto& y : terms) {
      EXPECT_EQ(conn(*separate, x, y), conn(*separate, y, x));
      for (const auto& z : terms)
        if (conn(*separate, x, y) && conn(*separate, y, z)) EXPECT_TRUE(conn(*separate, x, z));
    }
}
