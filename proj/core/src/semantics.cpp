#include "psi/semantics.hpp"

#include <algorithm>
#include <map>

namespace psi {

Provenance prov_pushdown(const Provenance& p) {
  if (p.bot) return p;
  Provenance r = p;
  r.inner = p.outer;
  r.inner.insert(r.inner.end(), p.inner.begin(), p.inner.end());
  r.outer.clear();
  return r;
}

Provenance prov_append(const Provenance& p, const std::vector<Name>& zs) {
  if (p.bot) return p;
  Provenance r = p;
  r.outer.insert(r.outer.end(), zs.begin(), zs.end());
  return r;
}

Provenance prov_scope(Name b, const Provenance& p) { return prov_scope(std::vector<Name>{b}, p); }

Provenance prov_scope(const std::vector<Name>& bs, const Provenance& p) {
  if (p.bot) return p;
  Provenance r = p;
  r.outer.insert(r.outer.begin(), bs.begin(), bs.end());
  return r;
}

std::string alpha_key(const Provenance& p) {
  if (p.bot) return "_";
  std::vector<Name> all = p.outer;
  all.insert(all.end(), p.inner.begin(), p.inner.end());
  return std::to_string(p.outer.size()) + ";" + std::to_string(p.inner.size()) + ";" + alpha_key(p.term, all);
}

bool prov_alpha_eq(const Provenance& a, const Provenance& b) { return alpha_key(a) == alpha_key(b); }

EnumContext default_context(const Assertion& psi, const std::vector<Proc>& ps) {
  NameSet u = names_of(psi);
  for (const auto& p : ps) u.insert_all(free_names(p));
  u.insert(pool_fresh(u, 1)[0]);
  return {u};
}

namespace {

struct Wrap {
  enum class Kind : std::uint8_t { ParL, ParR, Res } kind;
  Proc other;
  Name b;
};

// A transition whose label subject (and, for inputs, message) is still
// open. Taus carry their complete target in `cont`.
struct Pre {
  Label::Kind kind = Label::Kind::Tau;
  Assertion env;  // environment at the prefix
  Term pfx;
  Term obj;  // message or pattern
  std::vector<Name> vars;
  std::vector<Name> extruded;
  Proc cont;
  std::vector<Wrap> wraps;  // innermost first
  NameSet avoid;            // binders the label must not mention
  Provenance prov;
};

Proc rebuild(const Pre& pre, Proc leaf) {
  for (const auto& w : pre.wraps) {
    switch (w.kind) {
      case Wrap::Kind::ParL:
        leaf = par(leaf, w.other);
        break;
      case Wrap::Kind::ParR:
        leaf = par(w.other, leaf);
        break;
      case Wrap::Kind::Res:
        leaf = res(w.b, leaf);
        break;
    }
  }
  return leaf;
}

bool clear_of(const NameSet& avoid, const Term& t) {
  if (avoid.empty()) return true;
  return !names_of(t).intersects(avoid);
}

// Continuation after receiving `msg`; nullopt if the pattern does not match
// or the substitution is rejected by the instance.
std::vector<Proc> receive(const Instance& inst, const Pre& in, const Term& msg) {
  std::vector<Proc> out;
  for (auto& ts : inst.match_pattern(in.vars, in.obj, msg)) {
    Subst s{in.vars, ts};
    try {
      inst.check_subst(s);
    } catch (const SubstError&) {
      continue;
    }
    out.push_back(subst(in.cont, s));
  }
  return out;
}

class Engine {
 public:
  Engine(const Instance& inst, const NameSet& universe, bool legacy, bool reorient)
      : inst_(inst), universe_(universe), legacy_(legacy), reorient_(reorient) {}

  std::vector<Pre> gen(const Assertion& env, const Proc& p, int fuel) {
    std::vector<Pre> out;
    switch (p->kind) {
      case Kind::Nil:
      case Kind::Assert:
        break;
      case Kind::Out: {
        Pre pre;
        pre.kind = Label::Kind::Out;
        pre.env = env;
        pre.pfx = p->subj;
        pre.obj = p->obj;
        pre.cont = p->left;
        pre.prov = Provenance::at(p->subj);
        out.push_back(std::move(pre));
        break;
      }
      case Kind::In: {
        Pre pre;
        pre.kind = Label::Kind::In;
        pre.env = env;
        pre.pfx = p->subj;
        pre.obj = p->obj;
        pre.vars = p->vars;
        pre.cont = p->left;
        pre.prov = Provenance::at(p->subj);
        out.push_back(std::move(pre));
        break;
      }
      case Kind::Case:
        for (const auto& b : p->branches) {
          if (!inst_.entails(env, b.cond)) continue;
          for (auto& pre : gen(env, b.body, fuel)) {
            pre.prov = prov_pushdown(pre.prov);
            out.push_back(std::move(pre));
          }
        }
        break;
      case Kind::Sum:
        for (const auto& s : p->summands)
          for (auto& pre : gen(env, s, fuel)) {
            pre.prov = prov_pushdown(pre.prov);
            out.push_back(std::move(pre));
          }
        break;
      case Kind::Par:
        gen_par(env, p, fuel, out);
        break;
      case Kind::Res:
        for (auto& pre : gen(env, p->left, fuel)) {
          Name b = p->bound;
          if (pre.kind == Label::Kind::Out && names_of(pre.obj).contains(b)) {
            pre.extruded.insert(pre.extruded.begin(), b);
          } else {
            pre.wraps.push_back({Wrap::Kind::Res, nullptr, b});
          }
          pre.avoid.insert(b);
          pre.prov = prov_scope(b, pre.prov);
          out.push_back(std::move(pre));
        }
        break;
      case Kind::Bang: {
        if (fuel <= 0) break;
        Proc unfolded = par(freshen(p->left), p);
        for (auto& pre : gen(env, unfolded, fuel - 1)) {
          pre.prov = prov_pushdown(pre.prov);
          out.push_back(std::move(pre));
        }
        break;
      }
    }
    return out;
  }

  // Standalone labels for a pre-transition at the top.
  void resolve(const Pre& pre, const Assertion& psi, const Proc& source, std::vector<Transition>& out) {
    if (pre.kind == Label::Kind::Tau) {
      out.push_back({psi, source, Label::tau(), Provenance::bottom(), rebuild(pre, pre.cont)});
      return;
    }
    if (pre.kind == Label::Kind::Out) {
      Proc target;
      for (const Term& k : inst_.channel_candidates(universe_)) {
        if (!clear_of(pre.avoid, k)) continue;
        if (!inst_.entails(pre.env, inst_.connectivity(pre.pfx, k))) continue;
        if (!target) target = rebuild(pre, pre.cont);
        out.push_back({psi, source, Label::out(k, pre.extruded, pre.obj), pre.prov, target});
      }
      return;
    }
    std::vector<Term> msgs;
    for (const Term& l : inst_.message_basis(universe_))
      if (clear_of(pre.avoid, l)) msgs.push_back(l);
    for (const Term& k : inst_.channel_candidates(universe_)) {
      if (!clear_of(pre.avoid, k)) continue;
      Condition c = legacy_ && !reorient_ ? inst_.connectivity(pre.pfx, k) : inst_.connectivity(k, pre.pfx);
      if (!inst_.entails(pre.env, c)) continue;
      for (const Term& l : msgs)
        for (Proc& cont : receive(inst_, pre, l))
          out.push_back({psi, source, Label::in(k, l), pre.prov, rebuild(pre, cont)});
    }
  }

 private:
  void gen_par(const Assertion& env, const Proc& p, int fuel, std::vector<Pre>& out) {
    Frame f1 = frame_syntactic(p->left);
    Frame f2 = frame_syntactic(p->right);
    std::vector<Pre> left = gen(inst_.compose(f2.assertion, env), p->left, fuel);
    std::vector<Pre> right = gen(inst_.compose(f1.assertion, env), p->right, fuel);

    for (const Pre& o : left)
      if (o.kind == Label::Kind::Out)
        for (const Pre& i : right)
          if (i.kind == Label::Kind::In) com(env, f1, f2, o, i, true, out);
    for (const Pre& o : right)
      if (o.kind == Label::Kind::Out)
        for (const Pre& i : left)
          if (i.kind == Label::Kind::In) com(env, f2, f1, o, i, false, out);

    for (auto& pre : left) {
      pre.wraps.push_back({Wrap::Kind::ParL, p->right, {}});
      pre.prov = prov_append(pre.prov, f2.binders);
      out.push_back(std::move(pre));
    }
    for (auto& pre : right) {
      pre.wraps.push_back({Wrap::Kind::ParR, p->left, {}});
      pre.prov = prov_scope(f1.binders, pre.prov);
      out.push_back(std::move(pre));
    }
  }

  // `o_left` says whether the output came from the left component.
  void com(const Assertion& env, const Frame& fo, const Frame& fi, const Pre& o, const Pre& i, bool o_left,
           std::vector<Pre>& out) {
    if (legacy_ ? !legacy_com_ok(env, fo, fi, o, i) : !com_ok(o, i)) return;
    Proc o_target = rebuild(o, o.cont);
    for (Proc& cont : receive(inst_, i, o.obj)) {
      Proc i_target = rebuild(i, cont);
      Pre tau;
      tau.kind = Label::Kind::Tau;
      tau.cont = res_all(o.extruded, o_left ? par(o_target, i_target) : par(i_target, o_target));
      tau.prov = Provenance::bottom();
      out.push_back(std::move(tau));
    }
  }

  bool com_ok(const Pre& o, const Pre& i) const {
    // The output's label subject is the input prefix and vice versa.
    if (!clear_of(o.avoid, i.pfx)) return false;
    if (!clear_of(i.avoid, o.pfx) || !clear_of(i.avoid, o.obj)) return false;
    Condition c = inst_.connectivity(o.pfx, i.pfx);
    return inst_.entails(o.env, c) && inst_.entails(i.env, c);
  }

  bool legacy_com_ok(const Assertion& env, const Frame& fo, const Frame& fi, const Pre& o, const Pre& i) const {
    if (!clear_of(i.avoid, o.obj)) return false;
    NameSet u = universe_;
    Assertion all = inst_.compose(inst_.compose(env, fo.assertion), fi.assertion);
    u.insert_all(names_of(all));
    u.insert_all(names_of(o.pfx));
    u.insert_all(names_of(i.pfx));
    NameSet o_avoid = o.avoid;
    for (Name b : fo.binders) o_avoid.insert(b);
    NameSet i_avoid = i.avoid;
    for (Name b : fi.binders) i_avoid.insert(b);

    std::vector<Term> cands = inst_.channel_candidates(u);
    std::vector<Term> ms, ks;
    for (const Term& m : cands)
      if (clear_of(o_avoid, m) && inst_.entails(o.env, inst_.connectivity(o.pfx, m))) ms.push_back(m);
    for (const Term& k : cands) {
      if (!clear_of(i_avoid, k)) continue;
      Condition c = reorient_ ? inst_.connectivity(k, i.pfx) : inst_.connectivity(i.pfx, k);
      if (inst_.entails(i.env, c)) ks.push_back(k);
    }
    for (const Term& m : ms)
      for (const Term& k : ks)
        if (inst_.entails(all, inst_.connectivity(m, k))) return true;
    return false;
  }

  const Instance& inst_;
  const NameSet& universe_;
  bool legacy_;
  bool reorient_;
};

std::vector<Transition> run(const Instance& inst, const Assertion& psi, const Proc& p, Fuel fuel,
                            const EnumContext* ctx, bool legacy, bool reorient) {
  EnumContext local;
  if (!ctx) {
    local = default_context(psi, {p});
    ctx = &local;
  }
  Proc source = freshen(p);
  Engine engine(inst, ctx->universe, legacy, reorient);
  std::vector<Transition> raw;
  for (const Pre& pre : engine.gen(psi, source, fuel.rep_depth)) engine.resolve(pre, psi, source, raw);

  std::map<std::string, Transition> uniq;
  for (auto& t : raw) uniq.emplace(transition_key(t), std::move(t));
  std::vector<Transition> out;
  out.reserve(uniq.size());
  for (auto& [k, t] : uniq) out.push_back(std::move(t));
  return out;
}

}  // namespace

std::vector<Transition> transitions(const Instance& inst, const Assertion& psi, const Proc& p, Fuel fuel,
                                    const EnumContext* ctx) {
  return run(inst, psi, p, fuel, ctx, false, false);
}

std::vector<Step> legacy_transitions(const Instance& inst, const Assertion& psi, const Proc& p, Fuel fuel,
                                     LegacyOptions opts, const EnumContext* ctx) {
  return erase_provenance(run(inst, psi, p, fuel, ctx, true, opts.reorient_input));
}

std::vector<Step> erase_provenance(const std::vector<Transition>& ts) {
  std::map<std::string, Step> uniq;
  for (const auto& t : ts) {
    Step s{t.env, t.source, t.label, t.target};
    uniq.emplace(step_key(s), std::move(s));
  }
  std::vector<Step> out;
  for (auto& [k, s] : uniq) out.push_back(std::move(s));
  return out;
}

std::string label_key(const Label& l) {
  switch (l.kind) {
    case Label::Kind::Tau:
      return "t";
    case Label::Kind::In:
      return "i" + alpha_key(l.subj) + "." + alpha_key(l.obj);
    case Label::Kind::Out:
      return "o" + alpha_key(l.subj) + "." + std::to_string(l.bound.size()) + "." + alpha_key(l.obj, l.bound);
  }
  return {};
}

std::string step_key(const Step& s) {
  std::string k = label_key(s.label);
  k += '|';
  k += alpha_key(s.target, s.label.bound);
  return k;
}

std::string transition_key(const Transition& t) {
  std::string k = label_key(t.label);
  k += '|';
  k += alpha_key(t.prov);
  k += '|';
  k += alpha_key(t.target, t.label.bound);
  return k;
}

std::optional<std::string> check_provenance(const Instance& inst, const Transition& t) {
  if (t.label.is_tau() != t.prov.bot) return "label is tau iff provenance is bottom";
  if (t.label.is_tau()) return std::nullopt;
  Frame f = frame_syntactic(t.source);
  if (f.binders != t.prov.outer) return "outer provenance binders differ from the frame binders";
  Assertion env = inst.compose(t.env, f.assertion);
  Condition c = t.label.kind == Label::Kind::Out ? inst.connectivity(t.prov.term, t.label.subj)
                                                 : inst.connectivity(t.label.subj, t.prov.term);
  if (!inst.entails(env, c)) return "subject is not connected to the provenance";
  for (Name b : t.label.bound)
    if (free_names(t.source).contains(b) || names_of(t.env).contains(b)) return "extruded name is not fresh";
  return std::nullopt;
}

ConservativityReport conservativity_check(const Instance& inst, const Assertion& psi, const Proc& p, Fuel fuel,
                                          LegacyOptions opts) {
  EnumContext ctx = default_context(psi, {p});
  std::map<std::string, Step> now, old;
  for (auto& s : erase_provenance(transitions(inst, psi, p, fuel, &ctx))) now.emplace(step_key(s), s);
  for (auto& s : legacy_transitions(inst, psi, p, fuel, opts, &ctx)) old.emplace(step_key(s), s);
  ConservativityReport rep;
  rep.steps = now.size();
  for (const auto& [k, s] : now)
    if (!old.count(k)) rep.only_new.push_back(s);
  for (const auto& [k, s] : old)
    if (!now.count(k)) rep.only_legacy.push_back(s);
  return rep;
}

std::vector<Proc> tau_successors(const Instance& inst, const Assertion& psi, const Proc& p, Fuel fuel,
                                 const EnumContext* ctx) {
  std::vector<Proc> out;
  for (const auto& t : transitions(inst, psi, p, fuel, ctx))
    if (t.label.is_tau()) out.push_back(t.target);
  return out;
}

}  // namespace psi
