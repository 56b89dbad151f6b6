#include "psi/reduction.hpp"

#include <map>
#include <set>

namespace psi {

ContextPtr Context::hole() { return std::make_shared<Context>(); }

ContextPtr Context::of(Proc p) {
  auto c = std::make_shared<Context>();
  c->kind = Kind::Leaf;
  c->leaf = std::move(p);
  return c;
}

ContextPtr Context::par(ContextPtr l, ContextPtr r) {
  auto c = std::make_shared<Context>();
  c->kind = Kind::Par;
  c->left = std::move(l);
  c->right = std::move(r);
  return c;
}

ContextPtr Context::case_of(std::vector<Branch> others, std::size_t pos, std::optional<Condition> guard,
                            ContextPtr inner) {
  auto c = std::make_shared<Context>();
  c->kind = Kind::Case;
  c->branches = std::move(others);
  c->hole_branch = pos;
  c->guard = guard;
  c->inner = std::move(inner);
  return c;
}

std::size_t holes(const ContextPtr& c) {
  switch (c->kind) {
    case Context::Kind::Leaf:
      return 0;
    case Context::Kind::Hole:
      return 1;
    case Context::Kind::Par:
      return holes(c->left) + holes(c->right);
    case Context::Kind::Case:
      return holes(c->inner);
  }
  return 0;
}

std::vector<Condition> conds(const ContextPtr& c) {
  switch (c->kind) {
    case Context::Kind::Leaf:
    case Context::Kind::Hole:
      return {};
    case Context::Kind::Par: {
      auto l = conds(c->left);
      auto r = conds(c->right);
      for (auto& x : r)
        if (std::find(l.begin(), l.end(), x) == l.end()) l.push_back(x);
      return l;
    }
    case Context::Kind::Case: {
      auto r = conds(c->inner);
      if (c->guard && std::find(r.begin(), r.end(), *c->guard) == r.end()) r.insert(r.begin(), *c->guard);
      return r;
    }
  }
  return {};
}

Proc ppr(const ContextPtr& c) {
  switch (c->kind) {
    case Context::Kind::Leaf:
      return c->leaf;
    case Context::Kind::Hole:
      return nil();
    case Context::Kind::Par:
      return par(ppr(c->left), ppr(c->right));
    case Context::Kind::Case:
      return ppr(c->inner);
  }
  return nil();
}

namespace {

Proc fill_at(const ContextPtr& c, const std::vector<Proc>& ps, std::size_t& next) {
  switch (c->kind) {
    case Context::Kind::Leaf:
      return c->leaf;
    case Context::Kind::Hole:
      return ps[next++];
    case Context::Kind::Par: {
      Proc l = fill_at(c->left, ps, next);
      return par(l, fill_at(c->right, ps, next));
    }
    case Context::Kind::Case: {
      Proc body = fill_at(c->inner, ps, next);
      if (!c->guard) {
        std::vector<Proc> ss;
        for (const auto& b : c->branches) ss.push_back(b.body);
        ss.insert(ss.begin() + static_cast<std::ptrdiff_t>(c->hole_branch), body);
        return sum(std::move(ss));
      }
      std::vector<Branch> bs = c->branches;
      bs.insert(bs.begin() + static_cast<std::ptrdiff_t>(c->hole_branch), Branch{*c->guard, body});
      return case_of(std::move(bs));
    }
  }
  return nil();
}

}  // namespace

Proc fill(const ContextPtr& c, const std::vector<Proc>& ps) {
  if (holes(c) != ps.size())
    throw FillError("context has " + std::to_string(holes(c)) + " holes, got " + std::to_string(ps.size()));
  std::size_t next = 0;
  return fill_at(c, ps, next);
}

namespace {

// The source with replications unfolded as far as the fuel allows. Copy k
// of a replication costs k + 1 unfoldings.
struct XNode {
  Proc orig;
  std::vector<XNode> kids;
};

XNode expand(const Proc& p, int budget) {
  XNode x{p, {}};
  switch (p->kind) {
    case Kind::Par:
      x.kids.push_back(expand(p->left, budget));
      x.kids.push_back(expand(p->right, budget));
      break;
    case Kind::Res:
      x.kids.push_back(expand(p->left, budget));
      break;
    case Kind::Case:
      for (const auto& b : p->branches) x.kids.push_back(expand(b.body, budget));
      break;
    case Kind::Sum:
      for (const auto& s : p->summands) x.kids.push_back(expand(s, budget));
      break;
    case Kind::Bang:
      for (int k = 0; k + 1 <= budget; ++k) x.kids.push_back(expand(freshen(p->left), budget - (k + 1)));
      break;
    default:
      break;
  }
  return x;
}

struct Site {
  std::vector<std::size_t> path;
  const XNode* node;
};

void collect_sites(const XNode& x, std::vector<std::size_t>& path, std::vector<Site>& out) {
  Kind k = x.orig->kind;
  if (k == Kind::Out || k == Kind::In) {
    out.push_back({path, &x});
    return;
  }
  for (std::size_t i = 0; i < x.kids.size(); ++i) {
    path.push_back(i);
    collect_sites(x.kids[i], path, out);
    path.pop_back();
  }
}

const XNode& at(const XNode& root, const std::vector<std::size_t>& path, std::size_t depth) {
  const XNode* n = &root;
  for (std::size_t i = 0; i < depth; ++i) n = &n->kids[path[i]];
  return *n;
}

// Two distinct sites can meet in one context unless they sit in different
// branches of the same choice.
bool compatible(const XNode& root, const Site& a, const Site& b) {
  std::size_t d = 0;
  while (d < a.path.size() && d < b.path.size() && a.path[d] == b.path[d]) ++d;
  if (d == a.path.size() || d == b.path.size()) return false;
  Kind k = at(root, a.path, d).orig->kind;
  return k == Kind::Par || k == Kind::Bang;
}

// Builds the context around the two sites and collects hoisted binders and
// unguarded assertions. `hole_order` records which site each hole stands for.
struct Decomp {
  std::vector<Name> binders;
  std::vector<Assertion> assertions;
  std::vector<int> hole_order;
};

bool on_path(const std::vector<std::size_t>& path, const std::vector<std::size_t>& prefix) {
  return prefix.size() <= path.size() && std::equal(prefix.begin(), prefix.end(), path.begin());
}

ContextPtr decompose(const XNode& x, std::vector<std::size_t>& path, const Site& s0, const Site& s1, Decomp& d) {
  bool in0 = on_path(s0.path, path);
  bool in1 = on_path(s1.path, path);
  if (in0 && path.size() == s0.path.size()) {
    d.hole_order.push_back(0);
    return Context::hole();
  }
  if (in1 && path.size() == s1.path.size()) {
    d.hole_order.push_back(1);
    return Context::hole();
  }
  const Proc& p = x.orig;
  auto child = [&](std::size_t i) {
    path.push_back(i);
    ContextPtr c = decompose(x.kids[i], path, s0, s1, d);
    path.pop_back();
    return c;
  };
  switch (p->kind) {
    case Kind::Par:
      return Context::par(child(0), child(1));
    case Kind::Res:
      d.binders.push_back(p->bound);
      return child(0);
    case Kind::Assert:
      d.assertions.push_back(p->assertion);
      return Context::of(nil());
    case Kind::Case:
    case Kind::Sum: {
      if (!in0 && !in1) return Context::of(p);
      std::size_t i = (in0 ? s0 : s1).path[path.size()];
      std::vector<Branch> others;
      std::optional<Condition> guard;
      if (p->kind == Kind::Case) {
        for (std::size_t j = 0; j < p->branches.size(); ++j)
          if (j != i) others.push_back(p->branches[j]);
        guard = p->branches[i].cond;
      } else {
        for (std::size_t j = 0; j < p->summands.size(); ++j)
          if (j != i) others.push_back(Branch{Condition{}, p->summands[j]});
      }
      return Context::case_of(std::move(others), i, guard, child(i));
    }
    case Kind::Bang: {
      if (!in0 && !in1) return Context::of(p);
      std::size_t used = 0;
      if (in0) used = std::max(used, s0.path[path.size()]);
      if (in1) used = std::max(used, s1.path[path.size()]);
      // Copies 0..used, then the replication itself.
      ContextPtr acc = Context::of(p);
      for (std::size_t k = used + 1; k-- > 0;) {
        bool live = (in0 && s0.path[path.size()] == k) || (in1 && s1.path[path.size()] == k);
        acc = Context::par(live ? child(k) : Context::of(x.kids[k].orig), acc);
      }
      return acc;
    }
    default:
      return Context::of(p);
  }
}

}  // namespace

std::vector<ReductionStep> reductions(const Instance& inst, const Proc& p, Fuel fuel) {
  Proc source = freshen(p);
  XNode root = expand(source, fuel.rep_depth);
  std::vector<Site> sites;
  std::vector<std::size_t> path;
  collect_sites(root, path, sites);

  std::vector<ReductionStep> out;
  for (const Site& o : sites) {
    if (o.node->orig->kind != Kind::Out) continue;
    for (const Site& i : sites) {
      if (i.node->orig->kind != Kind::In || !compatible(root, o, i)) continue;
      Decomp d;
      std::vector<std::size_t> walk;
      ContextPtr ctx = decompose(root, walk, o, i, d);
      Assertion env = inst.unit();
      for (const auto& a : d.assertions) env = inst.compose(env, a);

      const Proc& op = o.node->orig;
      const Proc& ip = i.node->orig;
      if (!inst.entails(env, inst.connectivity(op->subj, ip->subj))) continue;
      bool guards = true;
      for (const auto& c : conds(ctx))
        if (!inst.entails(env, c)) {
          guards = false;
          break;
        }
      if (!guards) continue;

      for (auto& ts : inst.match_pattern(ip->vars, ip->obj, op->obj)) {
        Subst s{ip->vars, ts};
        try {
          inst.check_subst(s);
        } catch (const SubstError&) {
          continue;
        }
        std::vector<Proc> parts;
        for (const auto& a : d.assertions) parts.push_back(assertion(a));
        parts.push_back(op->left);
        parts.push_back(subst(ip->left, s));
        parts.push_back(ppr(ctx));
        Proc target = res_all(d.binders, par_all(parts));
        out.push_back({source, target, d.binders, d.assertions, ctx, op, ip, s, d.hole_order.front() == 0});
      }
    }
  }
  return out;
}

DerivedParReport derived_par(const Instance& inst, const Proc& p, const Proc& q_guarded, Fuel fuel) {
  if (!is_assertion_guarded(q_guarded)) throw std::invalid_argument("parallel component must be guarded");
  std::set<std::string> have;
  for (const auto& r : reductions(inst, par(p, q_guarded), fuel)) have.insert(congruence_key(r.target));
  DerivedParReport rep;
  for (const auto& r : reductions(inst, p, fuel)) {
    std::string k = congruence_key(par(r.target, q_guarded));
    if (!have.count(k)) {
      rep.ok = false;
      rep.missing.push_back(k);
    }
  }
  return rep;
}

HarmonyReport harmony_check(const Instance& inst, const Proc& p, Fuel fuel) {
  HarmonyReport rep;
  std::map<std::string, Proc> red, tau;
  for (const auto& r : reductions(inst, p, fuel)) red.emplace(congruence_key(r.target), r.target);
  for (const auto& t : transitions(inst, inst.unit(), p, fuel))
    if (t.label.is_tau()) tau.emplace(congruence_key(t.target), t.target);
  rep.reductions = red.size();
  rep.taus = tau.size();
  for (const auto& [k, q] : red)
    if (!tau.count(k)) rep.unmatched_reductions.push_back(q);
  for (const auto& [k, q] : tau)
    if (!red.count(k)) rep.unmatched_taus.push_back(q);
  return rep;
}

}  // namespace psi
