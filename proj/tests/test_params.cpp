#include <gtest/gtest.h>

#include <random>

#include "psi/params.hpp"
#include "psi/process.hpp"
#include "psi/syntax.hpp"

using namespace psi;

namespace {

Name n(const char* s) { return named(s); }
Term t(const char* s) { return Term::of(named(s)); }

// Random assertions in the instance's language over a, b, c.
std::vector<Assertion> random_assertions(const Instance& inst, std::uint64_t seed, std::size_t count) {
  std::mt19937_64 rng(seed);
  auto gens = inst.assertion_generators(NameSet{n("a"), n("b"), n("c")});
  std::vector<Assertion> out{inst.unit()};
  if (gens.empty()) return out;
  while (out.size() < count) {
    Assertion a = inst.unit();
    for (std::size_t k = rng() % 4; k > 0; --k) a = inst.compose(a, gens[rng() % gens.size()]);
    out.push_back(a);
  }
  return out;
}

NameSet abc() { return NameSet{n("a"), n("b"), n("c"), n("d")}; }

}  // namespace

TEST(Params, EtherEntailment) {
  EtherInstance e;
  EXPECT_TRUE(e.entails(Assertion::of_names({n("x"), n("y")}), Condition::conn(t("x"), t("y"))));
  EXPECT_FALSE(e.entails(Assertion::of_names({n("x")}), Condition::conn(t("x"), t("y"))));
}

TEST(Params, PreorderEntailmentMatchesClosure) {
  PreorderInstance p;
  // arcs (lo, hi): b below a
  Assertion arcs = Assertion::of_pairs({{n("b"), n("a")}});
  EXPECT_TRUE(p.entails(arcs, Condition::prec(t("b"), t("a"))));
  EXPECT_FALSE(p.entails(arcs, Condition::prec(t("a"), t("b"))));
  EXPECT_TRUE(p.entails(arcs, Condition::prec(t("c"), t("c"))));
  Assertion chain = Assertion::of_pairs({{n("a"), n("b")}, {n("b"), n("c")}});
  EXPECT_TRUE(p.entails(chain, Condition::prec(t("a"), t("c"))));
  Assertion vee = Assertion::of_pairs({{n("a"), n("c")}, {n("b"), n("c")}});
  EXPECT_TRUE(p.entails(vee, Condition::conn(t("a"), t("b"))));
  EXPECT_FALSE(p.entails(chain, Condition::conn(t("a"), t("d"))));
}

TEST(Params, StaticEquivalence) {
  EtherInstance e;
  Assertion xy = Assertion::of_names({n("x"), n("y")}), yx = Assertion::of_names({n("y"), n("x")});
  NameSet u{n("x"), n("y")};
  EXPECT_TRUE(e.static_equiv(xy, xy, u));
  EXPECT_TRUE(e.static_equiv(xy, yx, u));
  EXPECT_FALSE(e.static_equiv(Assertion::of_names({n("x")}), xy, u));
}

TEST(Params, Composition) {
  EtherInstance e;
  EXPECT_EQ(e.compose(Assertion::of_names({n("x")}), Assertion::of_names({n("y")})),
            Assertion::of_names({n("x"), n("y")}));
  auto tagged = make_instance("tagged:ether");
  Assertion l = Assertion::of_names({n("a")}).with_disabled({n("x")});
  Assertion r = Assertion::of_names({n("b")}).with_disabled({n("y")});
  Assertion lr = tagged->compose(l, r);
  EXPECT_EQ(lr.names, (Assertion::of_names({n("a"), n("b")}).names));
  EXPECT_TRUE(lr.is_disabled(n("x")));
  EXPECT_TRUE(lr.is_disabled(n("y")));
}

TEST(Params, AbelianMonoidUpToStaticEquivalence) {
  for (const char* name : {"pi", "ether", "triangle", "preorder", "tagged:ether"}) {
    auto inst = make_instance(name);
    auto as = random_assertions(*inst, 17, 25);
    for (const auto& x : as)
      for (const auto& y : as) {
        EXPECT_TRUE(inst->static_equiv(inst->compose(x, y), inst->compose(y, x), abc())) << name;
        EXPECT_TRUE(inst->static_equiv(inst->compose(x, inst->unit()), x, abc())) << name;
        for (std::size_t k = 0; k < 3; ++k) {
          const auto& z = as[(k * 7) % as.size()];
          EXPECT_TRUE(inst->static_equiv(inst->compose(x, inst->compose(y, z)), inst->compose(inst->compose(x, y), z),
                                         abc()))
              << name;
        }
      }
  }
}

TEST(Params, StaticEquivalencePreservedByComposition) {
  for (const char* name : {"ether", "triangle", "preorder"}) {
    auto inst = make_instance(name);
    auto as = random_assertions(*inst, 23, 20);
    for (const auto& x : as)
      for (const auto& y : as) {
        if (!inst->static_equiv(x, y, abc())) continue;
        for (const auto& z : as)
          EXPECT_TRUE(inst->static_equiv(inst->compose(x, z), inst->compose(y, z), abc())) << name;
      }
  }
}

TEST(Params, ChannelEnumerationIsSoundAndComplete) {
  for (const char* name : {"pi", "ether", "triangle", "preorder", "tagged:pi"}) {
    auto inst = make_instance(name);
    for (const auto& psi : random_assertions(*inst, 5, 15)) {
      for (const Term& m : inst->channel_candidates(abc())) {
        auto outs = inst->out_channels(psi, m, abc());
        auto ins = inst->in_channels(psi, m, abc());
        for (const Term& k : inst->channel_candidates(abc())) {
          bool o = std::find(outs.begin(), outs.end(), k) != outs.end();
          bool i = std::find(ins.begin(), ins.end(), k) != ins.end();
          EXPECT_EQ(o, inst->entails(psi, inst->connectivity(m, k))) << name;
          EXPECT_EQ(i, inst->entails(psi, inst->connectivity(k, m))) << name;
        }
      }
    }
  }
}

TEST(Params, PiConnectivityIsAnEquivalence) {
  PiInstance pi;
  auto u = abc().elems();
  for (Name x : u)
    for (Name y : u) {
      EXPECT_TRUE(pi.entails({}, pi.connectivity(Term::of(x), Term::of(x))));
      EXPECT_EQ(pi.entails({}, pi.connectivity(Term::of(x), Term::of(y))),
                pi.entails({}, pi.connectivity(Term::of(y), Term::of(x))));
      for (Name z : u)
        if (pi.entails({}, pi.connectivity(Term::of(x), Term::of(y))) &&
            pi.entails({}, pi.connectivity(Term::of(y), Term::of(z))))
          EXPECT_TRUE(pi.entails({}, pi.connectivity(Term::of(x), Term::of(z))));
    }
}

TEST(Params, TaggedConnectivityIsNeitherReflexiveNorTransitive) {
  auto tagged = make_instance("tagged:pi");
  Term ax = Term::tagged(n("a"), n("x")), ay = Term::tagged(n("a"), n("y"));
  // Same tag: not connected to itself.
  EXPECT_FALSE(tagged->entails({}, tagged->connectivity(ax, ax)));
  // a_x <-> a_y <-> a_x' but a_x and a_x do not connect.
  EXPECT_TRUE(tagged->entails({}, tagged->connectivity(ax, ay)));
  EXPECT_TRUE(tagged->entails({}, tagged->connectivity(ay, ax)));
  // A disabled tag blocks connectivity.
  Assertion off = Assertion{}.with_disabled({n("x")});
  EXPECT_FALSE(tagged->entails(off, tagged->connectivity(ax, ay)));
  EXPECT_TRUE(tagged->entails(off, Condition::tag(n("x"))));
  EXPECT_FALSE(tagged->entails({}, Condition::tag(n("x"))));
  // Untagged connectivity defers to the base.
  EXPECT_TRUE(tagged->entails({}, tagged->connectivity(t("a"), t("a"))));
}

TEST(Params, TaggedSubstitutionRejectsTaggedObjects) {
  auto tagged = make_instance("tagged:pi");
  EXPECT_THROW(tagged->check_subst(Subst{{n("x")}, {Term::tagged(n("a"), n("t"))}}), SubstError);
  EXPECT_NO_THROW(tagged->check_subst(Subst{{n("x")}, {t("a")}}));
}

TEST(Params, Substitution) {
  PiInstance pi;
  EXPECT_EQ(subst(t("x"), Subst{{n("x")}, {t("y")}}), t("y"));
  EXPECT_THROW((Subst{{n("x"), n("x")}, {t("a"), t("b")}}.require_well_formed()), SubstError);
  EXPECT_THROW((Subst{{n("x")}, {t("a"), t("b")}}.require_well_formed()), SubstError);

  // Capture avoidance: ((new z)'a<z>)[a := z] = (new z')'z<z'>.
  Proc p = parse_process("(new z)'a<z>", pi);
  Proc q = subst(p, Subst{{n("a")}, {t("z")}});
  EXPECT_TRUE(alpha_eq(q, parse_process("(new w)'z<w>", pi)));
  EXPECT_FALSE(alpha_eq(q, parse_process("(new z)'z<z>", pi)));
}

TEST(Params, SubstitutionOfFreshNamesIsASwap) {
  EtherInstance e;
  Proc p = parse_process("'a<b>.(|{a, c}|) | c(\\x)x.'x<a>", e);
  Name f1 = fresh_name(all_names(p)), f2 = fresh_name(all_names(p));
  Proc s = subst(p, Subst{{n("a"), n("c")}, {Term::of(f1), Term::of(f2)}});
  Proc w = apply_perm(Permutation::swap(n("a"), f1).compose(Permutation::swap(n("c"), f2)), p);
  EXPECT_TRUE(alpha_eq(s, w));
}
