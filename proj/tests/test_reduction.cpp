#include <gtest/gtest.h>

#include "oracles.hpp"
#include "psi/corpus.hpp"
#include "psi/reduction.hpp"
#include "psi/syntax.hpp"

using namespace psi;

namespace {

Name n(const char* s) { return named(s); }

std::vector<Proc> corpus_of(const Instance& inst, std::uint64_t seed, std::size_t count) {
  CorpusBounds b;
  b.max_size = 6;
  b.count = count;
  return corpus_generate(seed, b, inst);
}

}  // namespace

TEST(Reduction, ContextHolesAndFill) {
  PiInstance pi;
  Proc g = parse_process("'b", pi);
  ContextPtr c = Context::par(Context::hole(), Context::par(Context::of(g), Context::hole()));
  EXPECT_EQ(holes(c), 2u);
  Proc p = parse_process("'a", pi), q = parse_process("a", pi);
  EXPECT_TRUE(alpha_eq(fill(c, {p, q}), par(p, par(g, q))));
  EXPECT_THROW(fill(c, {p}), FillError);
  EXPECT_TRUE(conds(c).empty());
  EXPECT_TRUE(congruent(ppr(c), g));
}

TEST(Reduction, CaseContextConds) {
  PiInstance pi;
  Condition phi = Condition::eq(Term::of(n("a")), Term::of(n("a")));
  ContextPtr c = Context::case_of({Branch{phi, parse_process("'b", pi)}}, 1, phi, Context::hole());
  EXPECT_EQ(holes(c), 1u);
  ASSERT_EQ(conds(c).size(), 1u);
  EXPECT_EQ(alpha_key(conds(c)[0]), alpha_key(phi));
  EXPECT_TRUE(congruent(ppr(c), nil()));
}

TEST(Reduction, SimpleCommunication) {
  PiInstance pi;
  auto rs = reductions(pi, parse_process("'a<b>.'b | a(x).'x", pi));
  ASSERT_EQ(rs.size(), 1u);
  EXPECT_TRUE(congruent(rs[0].target, parse_process("'b | 'b", pi)));
}

TEST(Reduction, TriangleCannotReduce) {
  TriangleInstance t;
  EXPECT_TRUE(reductions(t, parse_process("(new b)('a | c | (|{a->a, a->b, b->b, b->c, c->c}|))", t)).empty());
}

TEST(Reduction, EtherThroughMedium) {
  EtherInstance e;
  auto rs = reductions(e, parse_process("(new x)('x | (|{x}|)) | (new y)(y | (|{y}|))", e));
  EXPECT_EQ(rs.size(), 1u);
}

TEST(Reduction, HarmonyOnCorpora) {
  for (const char* name : {"pi", "ether", "triangle", "preorder"}) {
    auto inst = make_instance(name);
    Proc env = assertion(oracle::enabling_env(*inst));
    auto ps = corpus_of(*inst, 51, 80);
    auto rs = oracle::redex_corpus(*inst, 51, 80);
    ps.insert(ps.end(), rs.begin(), rs.end());
    std::size_t reds = 0;
    for (const auto& p : ps) {
      auto r = harmony_check(*inst, par(env, p));
      EXPECT_TRUE(r.ok()) << name << " " << print(p, *inst) << ": " << r.unmatched_reductions.size() << "/"
                          << r.unmatched_taus.size();
      reds += r.reductions;
    }
    EXPECT_GT(reds, 20u) << name;
  }
}

TEST(Reduction, DerivedParOnCorpora) {
  PiInstance pi;
  Proc q = parse_process("'c | d(x).'x", pi);
  for (const auto& p : corpus_of(pi, 52, 60)) {
    auto r = derived_par(pi, p, q);
    EXPECT_TRUE(r.ok) << print(p, pi);
  }
  EtherInstance e;
  EXPECT_THROW(derived_par(e, nil(), parse_process("'a | (|{a}|)", e)), std::invalid_argument);
}

TEST(Reduction, WitnessRefillsToSource) {
  PiInstance pi;
  for (const auto& p : corpus_of(pi, 53, 60)) {
    for (const auto& r : reductions(pi, p)) {
      ASSERT_TRUE(r.context);
      EXPECT_EQ(holes(r.context), 2u);
      Proc a = r.output_first ? r.out_prefix : r.in_prefix;
      Proc b = r.output_first ? r.in_prefix : r.out_prefix;
      std::vector<Proc> parts;
      for (const auto& as : r.assertions) parts.push_back(assertion(as));
      parts.push_back(fill(r.context, {a, b}));
      EXPECT_TRUE(congruent(res_all(r.binders, par_all(parts)), r.source)) << print(p, pi);
    }
  }
}
