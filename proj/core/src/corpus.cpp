#include "psi/corpus.hpp"

#include <random>
#include <set>
#include <string>

#include "psi/syntax.hpp"

namespace psi {

std::vector<Name> corpus_names(std::size_t n) {
  std::vector<Name> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(named(std::string(1, static_cast<char>('a' + i % 26)) +
                                                         (i >= 26 ? std::to_string(i / 26) : "")));
  return out;
}

namespace {

class Gen {
 public:
  Gen(std::uint64_t seed, const CorpusBounds& b, const Instance& inst) : rng_(seed), b_(b), inst_(inst) {}

  Proc any(std::size_t budget, std::vector<Name>& scope) {
    enum Opt { Nil, Assert, Prefix, Par, Res, Bang, Case, Sum };
    std::vector<Opt> opts{Nil};
    if (b_.allow_assert && !b_.sums_only && !assertions(scope).empty()) opts.push_back(Assert);
    if (budget >= 2) opts.push_back(Prefix);
    if (budget >= 3) opts.push_back(Par);
    if (budget >= 2 && b_.allow_res) opts.push_back(Res);
    if (budget >= 3 && b_.allow_bang && !b_.sums_only) opts.push_back(Bang);
    if (budget >= 3 && b_.allow_case && !b_.sums_only && !conditions(scope).empty()) opts.push_back(Case);
    if (budget >= 5 && (b_.allow_sum || b_.sums_only)) opts.push_back(Sum);
    // Prefixes twice as likely; they carry the behaviour.
    if (budget >= 2) opts.push_back(Prefix);

    switch (opts[pick(opts.size())]) {
      case Nil:
        return nil();
      case Assert: {
        auto as = assertions(scope);
        return assertion(as[pick(as.size())]);
      }
      case Prefix:
        return prefix(budget, scope);
      case Par: {
        std::size_t l = 1 + pick(budget - 2);
        Proc left = any(l, scope);
        return par(left, any(budget - 1 - l, scope));
      }
      case Res: {
        Name x = bound_name(scope);
        scope.push_back(x);
        Proc body = any(budget - 1, scope);
        scope.pop_back();
        return res(x, body);
      }
      case Bang:
        return bang(b_.finite_bang ? leaf_prefix(scope) : prefix(budget - 1, scope));
      case Case: {
        auto cs = conditions(scope);
        std::size_t n = budget >= 5 && coin() ? 2 : 1;
        std::size_t per = (budget - 1) / n;
        std::vector<Branch> bs;
        for (std::size_t i = 0; i < n; ++i) bs.push_back({cs[pick(cs.size())], guarded(per, scope)});
        return case_of(std::move(bs));
      }
      case Sum: {
        std::size_t l = 2 + pick(budget - 4);
        Proc left = prefix(l, scope);
        return sum({left, prefix(budget - 1 - l, scope)});
      }
    }
    return nil();
  }

 private:
  std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  bool coin() { return pick(2) == 0; }

  Name any_name(const std::vector<Name>& scope) { return scope[pick(scope.size())]; }

  Name bound_name(const std::vector<Name>& scope) {
    return named("x" + std::to_string(scope.size() - b_.names + 1));
  }

  Proc guarded(std::size_t budget, std::vector<Name>& scope) {
    if (budget < 2) return nil();
    return prefix(budget, scope);
  }

  Proc prefix(std::size_t budget, std::vector<Name>& scope) {
    Term subj = Term::of(any_name(scope));
    if (coin()) {
      // Nullary output about a third of the time.
      Term msg = pick(3) == 0 ? Term::unit() : Term::of(any_name(scope));
      return out(subj, msg, any(budget - 1, scope));
    }
    if (pick(3) == 0) return in(subj, {}, Term::unit(), any(budget - 1, scope));
    Name x = bound_name(scope);
    scope.push_back(x);
    Proc cont = any(budget - 1, scope);
    scope.pop_back();
    return in(subj, {x}, Term::of(x), cont);
  }

  Proc leaf_prefix(const std::vector<Name>& scope) {
    Term subj = Term::of(any_name(scope));
    if (coin()) return out(subj, coin() ? Term::unit() : Term::of(any_name(scope)), nil());
    return coin() ? in(subj, {}, Term::unit(), nil()) : in_var(subj.name, named("x0"), nil());
  }

  NameSet universe(const std::vector<Name>& scope) const { return NameSet(scope); }

  std::vector<Assertion> assertions(const std::vector<Name>& scope) const {
    std::vector<Assertion> out;
    for (auto& a : inst_.assertion_generators(universe(scope)))
      if (!a.empty() && inst_.valid_assertion(a)) out.push_back(a);
    return out;
  }

  std::vector<Condition> conditions(const std::vector<Name>& scope) const {
    std::vector<Condition> out;
    for (auto& c : inst_.condition_basis(universe(scope)))
      if (inst_.valid_condition(c)) out.push_back(c);
    return out;
  }

  std::mt19937_64 rng_;
  const CorpusBounds& b_;
  const Instance& inst_;
};

// The non-transitive triangle and its reflexive variant.
std::vector<Proc> triangle_seeds(const Instance& inst) {
  const char* texts[] = {
      "(new b)('a.0 | c.0 | (|{a->b, b->c}|))",
      "(new b)('a.0 | c.0 | (|{a->b, b->c, a->a, b->b, c->c}|))",
      "'a.0 | c.0 | (|{a->b, b->c}|)",
      "(new b)('a<a>.0 | c(\\x)x.0 | (|{a->b, b->c}|))",
  };
  std::vector<Proc> out;
  for (const char* t : texts) out.push_back(parse_process(t, inst));
  return out;
}

bool has_sum(const Proc& p) {
  switch (p->kind) {
    case Kind::Sum:
      return true;
    case Kind::Case:
      for (const auto& b : p->branches)
        if (has_sum(b.body)) return true;
      return false;
    case Kind::Nil:
    case Kind::Assert:
      return false;
    case Kind::Par:
      return has_sum(p->left) || has_sum(p->right);
    default:
      return has_sum(p->left);
  }
}

}  // namespace

std::vector<Proc> corpus_generate(std::uint64_t seed, const CorpusBounds& bounds, const Instance& inst) {
  std::vector<Proc> out;
  std::set<std::string> seen;
  auto keep = [&](const Proc& p) {
    if (out.size() >= bounds.count) return;
    if (!check_well_formed(p, inst).empty()) return;
    if (bounds.sums_only && !has_sum(p)) return;
    if (seen.insert(alpha_key(p)).second) out.push_back(p);
  };
  if (inst.name() == "triangle")
    for (const auto& p : triangle_seeds(inst)) keep(p);

  Gen gen(seed, bounds, inst);
  std::mt19937_64 sizes(seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<Name> scope = corpus_names(bounds.names);
  std::size_t max = std::max<std::size_t>(1, bounds.max_size);
  for (std::size_t attempt = 0; out.size() < bounds.count && attempt < bounds.count * 200; ++attempt) {
    std::size_t budget = std::uniform_int_distribution<std::size_t>(1, max)(sizes);
    keep(gen.any(budget, scope));
  }
  return out;
}

}  // namespace psi
