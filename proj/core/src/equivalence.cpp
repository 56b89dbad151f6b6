#include "psi/equivalence.hpp"

#include <deque>
#include <functional>
#include <map>
#include <set>
#include <unordered_map>

#include "psi/syntax.hpp"

namespace psi {

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::Equivalent:
      return "equivalent-under-config";
    case Outcome::Distinguished:
      return "distinguished";
    case Outcome::Inconclusive:
      return "inconclusive";
  }
  return "?";
}

namespace {

void flatten_par(const Proc& p, std::vector<Proc>& out) {
  if (p->kind == Kind::Par) {
    flatten_par(p->left, out);
    flatten_par(p->right, out);
  } else {
    out.push_back(p);
  }
}

// Subjects of the prefixes that can fire without first firing another.
void active_subjects(const Proc& p, std::vector<Term>& out) {
  switch (p->kind) {
    case Kind::Out:
    case Kind::In:
      out.push_back(p->subj);
      break;
    case Kind::Par:
      active_subjects(p->left, out);
      active_subjects(p->right, out);
      break;
    case Kind::Res:
    case Kind::Bang:
      active_subjects(p->left, out);
      break;
    case Kind::Case:
      for (const auto& b : p->branches) active_subjects(b.body, out);
      break;
    case Kind::Sum:
      for (const auto& s : p->summands) active_subjects(s, out);
      break;
    default:
      break;
  }
}

bool dead_tagged(const Proc& c) {
  if (c->kind != Kind::Res) return false;
  Proc fc = freshen(c);
  Frame f = frame_syntactic(fc);
  if (!TaggedInstance::base_part(f.assertion).empty()) return false;
  auto bound = [&](Name t) { return std::find(f.binders.begin(), f.binders.end(), t) != f.binders.end(); };
  for (Name t : f.assertion.disabled)
    if (!bound(t)) return false;
  std::vector<Term> subjects;
  active_subjects(fc, subjects);
  for (const Term& m : subjects)
    if (!m.is_tagged() || !f.assertion.is_disabled(m.tag) || !bound(m.tag)) return false;
  return true;
}

}  // namespace

Proc tidy(const Proc& p, const Instance* inst) {
  bool tagged = inst && inst->is_tagged();
  switch (p->kind) {
    case Kind::Res: {
      Proc body = tidy(p->left, inst);
      if (tagged && body->kind != Kind::Nil && dead_tagged(res(p->bound, body))) return nil();
      if (!free_names(body).contains(p->bound)) return body;
      return body == p->left ? p : res(p->bound, body);
    }
    case Kind::Par: {
      std::vector<Proc> parts;
      flatten_par(p, parts);
      std::set<std::string> bodies;
      for (auto& c : parts) {
        c = tidy(c, inst);
        if (c->kind == Kind::Bang) bodies.insert(alpha_key(c->left));
      }
      std::vector<Proc> kept;
      for (const auto& c : parts) {
        if (c->kind == Kind::Nil) continue;
        if (c->kind != Kind::Bang && !bodies.empty() && bodies.count(alpha_key(c))) continue;
        kept.push_back(c);
      }
      return par_all(kept);
    }
    case Kind::Bang: {
      // !(P | 0) unfolds to copies that tidy to P; keep the body in that form.
      Proc body = tidy(p->left, inst);
      if (body->kind == Kind::Nil) return body;
      return body == p->left ? p : bang(body);
    }
    default:
      return p;
  }
}

std::pair<Label, Proc> canonical_extrusion(const Step& s, const NameSet& avoid) {
  if (s.label.bound.empty()) return {s.label, s.target};
  std::vector<Name> cs = pool_fresh(avoid, s.label.bound.size());
  Permutation perm;
  for (std::size_t i = 0; i < cs.size(); ++i) perm = perm.compose(Permutation::swap(s.label.bound[i], cs[i]));
  Label l = s.label;
  l.obj = apply_perm(perm, l.obj);
  l.subj = apply_perm(perm, l.subj);
  l.bound = cs;
  return {l, apply_perm(perm, s.target)};
}

namespace {

void collect_assertions(const Proc& p, std::vector<Assertion>& out) {
  switch (p->kind) {
    case Kind::Assert:
      out.push_back(p->assertion);
      break;
    case Kind::Out:
    case Kind::In:
    case Kind::Res:
    case Kind::Bang:
      collect_assertions(p->left, out);
      break;
    case Kind::Par:
      collect_assertions(p->left, out);
      collect_assertions(p->right, out);
      break;
    case Kind::Case:
      for (const auto& b : p->branches) collect_assertions(b.body, out);
      break;
    case Kind::Sum:
      for (const auto& s : p->summands) collect_assertions(s, out);
      break;
    default:
      break;
  }
}

NameSet state_names(const Assertion& env, const Proc& p, const Proc& q) {
  NameSet u = names_of(env);
  u.insert_all(free_names(p));
  u.insert_all(free_names(q));
  return u;
}

NameSet with_fresh(NameSet u, std::size_t k) {
  for (Name n : pool_fresh(u, k)) u.insert(n);
  return u;
}

std::string state_key(const GameState& s, int mode) {
  std::string k = std::to_string(mode);
  k += '/';
  k += std::to_string(s.ext);
  k += '/';
  k += alpha_key(s.env);
  k += '|';
  k += alpha_key(s.p);
  k += '|';
  k += alpha_key(s.q);
  return k;
}

Assertion frame_env(const Instance& inst, const Assertion& psi, const Proc& p) {
  return inst.compose(psi, frame_of(p).assertion);
}

std::optional<Condition> separating_condition(const Instance& inst, const Assertion& a, const Assertion& b,
                                              const NameSet& u) {
  for (const Condition& c : inst.condition_basis(u))
    if (inst.entails(a, c) != inst.entails(b, c)) return c;
  return std::nullopt;
}

// Canonical steps of one side of a position, grouped by label key.
struct SideSteps {
  std::vector<std::pair<Label, Proc>> steps;
  std::multimap<std::string, std::size_t> by_label;
};

SideSteps side_steps(const Instance& inst, const Assertion& env, const Proc& p, const NameSet& avoid,
                     const EnumContext& ctx, Fuel fuel) {
  SideSteps s;
  std::set<std::string> seen;
  for (const Step& st : erase_provenance(transitions(inst, env, p, fuel, &ctx))) {
    auto [l, t] = canonical_extrusion(st, avoid);
    t = tidy(t, &inst);
    std::string lk = label_key(l);
    if (!seen.insert(lk + "#" + alpha_key(t)).second) continue;
    s.by_label.emplace(lk, s.steps.size());
    s.steps.emplace_back(std::move(l), std::move(t));
  }
  return s;
}

// --- the game graph ---------------------------------------------------------

struct Req {
  WitnessStep::Move move = WitnessStep::Move::Left;
  std::optional<Label> label;
  Assertion extension;
  Proc context;
  std::string note;
  Verdict::Failure on_empty = Verdict::Failure::Unmatched;
  std::vector<int> options;
};

struct GNode {
  GameState st;
  int mode = 0;
  bool local_ok = true;
  Verdict::Failure local_kind = Verdict::Failure::None;
  std::string local_reason;
  std::vector<Req> reqs;
  bool alive = true;
  std::size_t stamp = 0;
  int failed_req = -1;
};

class Game {
 public:
  explicit Game(std::size_t cap) : cap_(cap) {}

  int intern(const GameState& s, int mode = 0) {
    std::string k = state_key(s, mode);
    auto it = index_.find(k);
    if (it != index_.end()) return it->second;
    if (nodes.size() >= cap_) {
      overflow = true;
      return -1;
    }
    int id = static_cast<int>(nodes.size());
    GNode n;
    n.st = s;
    n.mode = mode;
    nodes.push_back(std::move(n));
    index_.emplace(std::move(k), id);
    todo_.push_back(id);
    return id;
  }

  // Expands every reachable node; false on overflow.
  bool explore(const std::function<void(int)>& expand) {
    while (!todo_.empty() && !overflow) {
      int id = todo_.front();
      todo_.pop_front();
      expand(id);
    }
    return !overflow;
  }

  void add(int id, Req r) {
    std::sort(r.options.begin(), r.options.end());
    r.options.erase(std::unique(r.options.begin(), r.options.end()), r.options.end());
    r.options.erase(std::remove(r.options.begin(), r.options.end(), -1), r.options.end());
    nodes[id].reqs.push_back(std::move(r));
  }

  void fail(int id, Verdict::Failure kind, std::string reason) {
    nodes[id].local_ok = false;
    nodes[id].local_kind = kind;
    nodes[id].local_reason = std::move(reason);
  }

  // Greatest fixpoint: a node survives while its local check holds and every
  // requirement keeps a surviving option.
  void solve() {
    std::size_t n = nodes.size();
    std::vector<std::vector<std::size_t>> count(n);
    std::vector<std::vector<std::pair<int, int>>> preds(n);
    for (std::size_t i = 0; i < n; ++i) {
      count[i].resize(nodes[i].reqs.size());
      for (std::size_t r = 0; r < nodes[i].reqs.size(); ++r) {
        count[i][r] = nodes[i].reqs[r].options.size();
        for (int o : nodes[i].reqs[r].options) preds[o].emplace_back(static_cast<int>(i), static_cast<int>(r));
      }
    }
    std::deque<int> dead;
    std::size_t clock = 0;
    auto kill = [&](int i, int r) {
      nodes[i].alive = false;
      nodes[i].stamp = ++clock;
      nodes[i].failed_req = r;
      dead.push_back(i);
    };
    for (std::size_t i = 0; i < n; ++i) {
      if (!nodes[i].local_ok) {
        kill(static_cast<int>(i), -1);
        continue;
      }
      for (std::size_t r = 0; r < count[i].size(); ++r)
        if (count[i][r] == 0) {
          kill(static_cast<int>(i), static_cast<int>(r));
          break;
        }
    }
    while (!dead.empty()) {
      int x = dead.front();
      dead.pop_front();
      for (auto [pi, r] : preds[x]) {
        if (!nodes[pi].alive) continue;
        if (--count[pi][r] == 0) kill(pi, r);
      }
    }
  }

  Verdict verdict(int root, const std::string& game, const EquivalenceConfig& cfg) {
    Verdict v;
    v.game = game;
    v.states = nodes.size();
    if (overflow || root < 0) {
      v.result = Outcome::Inconclusive;
      v.note = "state space exceeds max_states=" + std::to_string(cap_);
      return v;
    }
    solve();
    if (nodes[root].alive) {
      v.result = Outcome::Equivalent;
      if (cfg.keep_relation)
        for (const auto& n : nodes)
          if (n.alive && n.mode == 0) v.relation.push_back(n.st);
      return v;
    }
    v.result = Outcome::Distinguished;
    int cur = root;
    WitnessStep start;
    start.state = nodes[root].st;
    v.witness.push_back(start);
    for (;;) {
      const GNode& n = nodes[cur];
      if (n.failed_req < 0) {
        v.failure_kind = n.local_kind;
        v.failure = n.local_reason;
        break;
      }
      const Req& r = n.reqs[n.failed_req];
      if (r.options.empty()) {
        v.failure_kind = r.on_empty;
        v.failure_label = r.label;
        v.failure_left = r.move != WitnessStep::Move::Right;
        v.failure = r.note.empty() ? "no answer" : r.note;
        break;
      }
      int best = r.options.front();
      for (int o : r.options)
        if (nodes[o].stamp < nodes[best].stamp) best = o;
      WitnessStep w;
      w.move = r.move;
      w.label = r.label;
      w.extension = r.extension;
      w.context = r.context;
      w.text = r.note;
      w.state = nodes[best].st;
      v.witness.push_back(w);
      cur = best;
    }
    return v;
  }

  std::vector<GNode> nodes;
  bool overflow = false;

 private:
  std::size_t cap_;
  std::unordered_map<std::string, int> index_;
  std::deque<int> todo_;
};

std::string basis_note(const std::vector<Assertion>& basis, const EquivalenceConfig& cfg) {
  return "assertion basis " + std::to_string(basis.size()) + ", extension depth " +
         std::to_string(cfg.extension_depth) + ", replication fuel " + std::to_string(cfg.fuel.rep_depth);
}

// τ-closure with memo, bounded by cfg.weak_depth.
class Closure {
 public:
  Closure(const Instance& inst, const EquivalenceConfig& cfg) : inst_(inst), cfg_(cfg) {}

  const std::vector<Proc>& of(const Assertion& env, const Proc& p) {
    std::string k = alpha_key(env) + "#" + alpha_key(p);
    auto it = memo_.find(k);
    if (it != memo_.end()) return it->second;
    std::vector<Proc> out{p};
    std::set<std::string> seen{alpha_key(p)};
    std::vector<Proc> frontier{p};
    for (int d = 0; d < cfg_.weak_depth && !frontier.empty(); ++d) {
      std::vector<Proc> next;
      for (const auto& x : frontier)
        for (const auto& y : tau_successors(inst_, env, x, cfg_.fuel)) {
          Proc t = tidy(y, &inst_);
          if (seen.insert(alpha_key(t)).second) {
            out.push_back(t);
            next.push_back(t);
          }
        }
      frontier = std::move(next);
    }
    return memo_.emplace(std::move(k), std::move(out)).first->second;
  }

 private:
  const Instance& inst_;
  const EquivalenceConfig& cfg_;
  std::unordered_map<std::string, std::vector<Proc>> memo_;
};

std::vector<Assertion> basis_for(const Instance& inst, const Assertion& psi, const std::vector<Proc>& ps,
                                 const EquivalenceConfig& cfg) {
  if (cfg.assertion_basis) return *cfg.assertion_basis;
  return default_assertion_basis(inst, psi, ps);
}

}  // namespace

std::vector<Assertion> default_assertion_basis(const Instance& inst, const Assertion& psi,
                                               const std::vector<Proc>& ps) {
  NameSet fn = names_of(psi);
  for (const auto& p : ps) fn.insert_all(free_names(p));
  std::vector<Assertion> cands = inst.assertion_generators(with_fresh(fn, 1));
  for (const auto& p : ps) collect_assertions(p, cands);
  // Assertions under binders only matter with their binders free.
  NameSet allowed = with_fresh(fn, 1);
  std::vector<Assertion> out;
  std::set<Assertion> seen;
  for (const auto& a : cands) {
    if (a == inst.unit() || !inst.valid_assertion(a)) continue;
    if (set_minus(names_of(a), allowed).empty() && seen.insert(a).second) out.push_back(a);
  }
  return out;
}

// --- strong bisimulation ------------------------------------------------------

Verdict strong_bisim(const Instance& inst, const Assertion& psi, const Proc& p, const Proc& q,
                     const EquivalenceConfig& cfg) {
  std::vector<Assertion> basis = basis_for(inst, psi, {p, q}, cfg);
  Game g(cfg.max_states);
  int root = g.intern({psi, p, q, 0});

  auto expand = [&](int id) {
    GameState s = g.nodes[id].st;
    NameSet avoid = state_names(s.env, s.p, s.q);
    NameSet u = with_fresh(avoid, cfg.fresh_names);
    Assertion ep = frame_env(inst, s.env, s.p), eq = frame_env(inst, s.env, s.q);
    if (!inst.static_equiv(ep, eq, u)) {
      std::string why = "frames not statically equivalent";
      if (auto c = separating_condition(inst, ep, eq, u)) {
        Printer pr(inst);
        why += ": " + pr.condition(*c) + (inst.entails(ep, *c) ? " holds only on the left" : " holds only on the right");
      }
      g.fail(id, Verdict::Failure::Static, why);
      return;
    }
    if (s.ext < cfg.extension_depth)
      for (const auto& a : basis) {
        Req r;
        r.move = WitnessStep::Move::Extend;
        r.extension = a;
        r.options.push_back(g.intern({inst.compose(s.env, a), s.p, s.q, s.ext + 1}));
        g.add(id, std::move(r));
      }
    EnumContext ctx{u};
    SideSteps sp = side_steps(inst, s.env, s.p, avoid, ctx, cfg.fuel);
    SideSteps sq = side_steps(inst, s.env, s.q, avoid, ctx, cfg.fuel);
    for (const auto& [l, t] : sp.steps) {
      Req r;
      r.move = WitnessStep::Move::Left;
      r.label = l;
      auto range = sq.by_label.equal_range(label_key(l));
      for (auto it = range.first; it != range.second; ++it)
        r.options.push_back(g.intern({s.env, t, sq.steps[it->second].second, s.ext}));
      g.add(id, std::move(r));
    }
    for (const auto& [l, t] : sq.steps) {
      Req r;
      r.move = WitnessStep::Move::Right;
      r.label = l;
      auto range = sp.by_label.equal_range(label_key(l));
      for (auto it = range.first; it != range.second; ++it)
        r.options.push_back(g.intern({s.env, sp.steps[it->second].second, t, s.ext}));
      g.add(id, std::move(r));
    }
  };
  g.explore(expand);
  Verdict v = g.verdict(root, "strong", cfg);
  if (v.note.empty()) v.note = basis_note(basis, cfg);
  return v;
}

// --- weak ---------------------------------------------------------------------

std::vector<Proc> weak_transitions(const Instance& inst, const Assertion& psi, const Proc& p,
                                   const std::optional<Label>& alpha, const EquivalenceConfig& cfg) {
  Closure cl(inst, cfg);
  const std::vector<Proc>& pre = cl.of(psi, p);
  if (!alpha) return pre;
  std::string want = label_key(*alpha);
  std::vector<Proc> out;
  std::set<std::string> seen;
  NameSet u = with_fresh(set_union(names_of(psi), set_union(free_names(p), [&] {
                           NameSet s = names_of(alpha->subj);
                           s.insert_all(names_of(alpha->obj));
                           for (Name b : alpha->bound) s.erase(b);
                           return s;
                         }())),
                         cfg.fresh_names);
  EnumContext ctx{u};
  for (const auto& x : pre)
    for (const Step& st : erase_provenance(transitions(inst, psi, x, cfg.fuel, &ctx))) {
      if (label_key(st.label) != want) continue;
      Proc t = st.target;
      if (!st.label.bound.empty()) {
        Permutation perm;
        for (std::size_t i = 0; i < st.label.bound.size(); ++i)
          perm = perm.compose(Permutation::swap(st.label.bound[i], alpha->bound[i]));
        t = apply_perm(perm, t);
      }
      for (const auto& y : cl.of(psi, tidy(t, &inst)))
        if (seen.insert(alpha_key(y)).second) out.push_back(y);
    }
  return out;
}

bool static_implies(const Instance& inst, const Assertion& psi, const Proc& p, const Proc& q) {
  NameSet u = default_context(psi, {p, q}).universe;
  return inst.static_implies(frame_env(inst, psi, p), frame_env(inst, psi, q), u);
}

namespace {

// Weak bisimulation clauses, shared by weak_bisim and weak_congruence.
struct WeakGame {
  const Instance& inst;
  const EquivalenceConfig& cfg;
  std::vector<Assertion> basis;
  Game g;
  Closure cl;

  WeakGame(const Instance& i, const EquivalenceConfig& c, std::vector<Assertion> b)
      : inst(i), cfg(c), basis(std::move(b)), g(c.max_states), cl(i, c) {}

  std::vector<Assertion> extensions(int ext) const {
    std::vector<Assertion> xs{inst.unit()};
    if (ext < cfg.extension_depth) xs.insert(xs.end(), basis.begin(), basis.end());
    return xs;
  }

  void expand(int id) {
    GameState s = g.nodes[id].st;
    NameSet avoid = state_names(s.env, s.p, s.q);
    NameSet u = with_fresh(avoid, cfg.fresh_names);
    Assertion ep = frame_env(inst, s.env, s.p);
    auto implied = [&](const Proc& x) { return inst.static_implies(ep, frame_env(inst, s.env, x), u); };
    const std::vector<Proc> qs = cl.of(s.env, s.q);
    std::vector<Proc> implied_qs;
    for (const auto& x : qs)
      if (implied(x)) implied_qs.push_back(x);

    // Weak static implication.
    for (const auto& a : extensions(s.ext)) {
      Req r;
      r.move = WitnessStep::Move::Extend;
      r.extension = a;
      r.on_empty = Verdict::Failure::Static;
      r.note = "weak static implication";
      Assertion env2 = inst.compose(s.env, a);
      int ext2 = a == inst.unit() ? s.ext : s.ext + 1;
      for (const auto& x : implied_qs)
        for (const auto& y : cl.of(env2, x)) r.options.push_back(g.intern({env2, s.p, y, ext2}));
      g.add(id, std::move(r));
    }
    {
      Req r;
      r.move = WitnessStep::Move::Swap;
      r.options.push_back(g.intern({s.env, s.q, s.p, s.ext}));
      g.add(id, std::move(r));
    }
    if (s.ext < cfg.extension_depth)
      for (const auto& a : basis) {
        Req r;
        r.move = WitnessStep::Move::Extend;
        r.extension = a;
        r.options.push_back(g.intern({inst.compose(s.env, a), s.p, s.q, s.ext + 1}));
        g.add(id, std::move(r));
      }

    EnumContext ctx{u};
    SideSteps sp = side_steps(inst, s.env, s.p, avoid, ctx, cfg.fuel);
    std::map<std::string, std::vector<std::pair<Label, Proc>>> answers;  // by label key, from implied Q'''
    bool answers_built = false;
    for (const auto& [l, t] : sp.steps) {
      if (l.is_tau()) {
        Req r;
        r.move = WitnessStep::Move::Left;
        r.label = l;
        for (const auto& y : qs) r.options.push_back(g.intern({s.env, t, y, s.ext}));
        g.add(id, std::move(r));
        continue;
      }
      if (!answers_built) {
        for (const auto& x : implied_qs) {
          SideSteps sx = side_steps(inst, s.env, x, avoid, ctx, cfg.fuel);
          for (auto& st : sx.steps) answers[label_key(st.first)].push_back(st);
        }
        answers_built = true;
      }
      auto it = answers.find(label_key(l));
      for (const auto& a : extensions(s.ext)) {
        Req r;
        r.move = WitnessStep::Move::Left;
        r.label = l;
        r.extension = a;
        Assertion env2 = inst.compose(s.env, a);
        int ext2 = a == inst.unit() ? s.ext : s.ext + 1;
        if (it != answers.end())
          for (const auto& [ql, qt] : it->second)
            for (const auto& y : cl.of(env2, qt)) r.options.push_back(g.intern({env2, t, y, ext2}));
        g.add(id, std::move(r));
      }
    }
  }

  // τ-steps of P answered by at least one τ from Q, into weakly bisimilar
  // states; both directions.
  void expand_root(int id) {
    GameState s = g.nodes[id].st;
    {
      Req r;
      r.move = WitnessStep::Move::Extend;
      r.note = "weak bisimulation";
      r.options.push_back(g.intern({s.env, s.p, s.q, 0}));
      g.add(id, std::move(r));
    }
    auto plus = [&](const Proc& x) {
      std::vector<Proc> out;
      for (const auto& y : tau_successors(inst, s.env, x, cfg.fuel))
        for (const auto& z : cl.of(s.env, tidy(y, &inst))) out.push_back(z);
      return out;
    };
    std::vector<Proc> qp = plus(s.q), pp = plus(s.p);
    for (const auto& t : tau_successors(inst, s.env, s.p, cfg.fuel)) {
      Req r;
      r.move = WitnessStep::Move::Left;
      r.label = Label::tau();
      r.note = "τ not answered by at least one τ";
      for (const auto& y : qp) r.options.push_back(g.intern({s.env, tidy(t, &inst), y, 0}));
      g.add(id, std::move(r));
    }
    for (const auto& t : tau_successors(inst, s.env, s.q, cfg.fuel)) {
      Req r;
      r.move = WitnessStep::Move::Right;
      r.label = Label::tau();
      r.note = "τ not answered by at least one τ";
      for (const auto& y : pp) r.options.push_back(g.intern({s.env, y, tidy(t, &inst), 0}));
      g.add(id, std::move(r));
    }
  }
};

}  // namespace

Verdict weak_bisim(const Instance& inst, const Assertion& psi, const Proc& p, const Proc& q,
                   const EquivalenceConfig& cfg) {
  WeakGame w(inst, cfg, basis_for(inst, psi, {p, q}, cfg));
  int root = w.g.intern({psi, p, q, 0});
  w.g.explore([&](int id) { w.expand(id); });
  Verdict v = w.g.verdict(root, "weak", cfg);
  if (v.note.empty()) v.note = basis_note(w.basis, cfg) + ", weak depth " + std::to_string(cfg.weak_depth);
  return v;
}

Verdict weak_congruence(const Instance& inst, const Proc& p, const Proc& q, const EquivalenceConfig& cfg) {
  std::vector<Assertion> envs{inst.unit()};
  for (const auto& a : basis_for(inst, inst.unit(), {p, q}, cfg)) envs.push_back(a);
  std::vector<SubstitutionSeq> sigmas;
  if (cfg.substitution_basis) {
    sigmas = *cfg.substitution_basis;
  } else {
    sigmas.push_back({});
    NameSet fn = set_union(free_names(p), free_names(q));
    for (Name x : fn)
      for (Name y : fn) {
        if (x == y) continue;
        Subst s{{x}, {Term::of(y)}};
        try {
          inst.check_subst(s);
        } catch (const SubstError&) {
          continue;
        }
        sigmas.push_back({s});
      }
  }

  WeakGame w(inst, cfg, basis_for(inst, inst.unit(), {p, q}, cfg));
  int top = w.g.intern({inst.unit(), p, q, 0}, 2);
  std::vector<std::pair<std::string, int>> roots;
  Printer pr(inst);
  pr.reserve(set_union(free_names(p), free_names(q)));
  for (const auto& env : envs)
    for (const auto& seq : sigmas) {
      Proc ps = subst_seq(p, seq), qs = subst_seq(q, seq);
      std::string note = "environment " + pr.assertion(env);
      for (const auto& s : seq) {
        note += " σ=[";
        for (std::size_t i = 0; i < s.xs.size(); ++i)
          note += (i ? "," : "") + pr.name(s.xs[i]) + ":=" + pr.term(s.ts[i]);
        note += "]";
      }
      Req r;
      r.move = WitnessStep::Move::Instantiate;
      r.extension = env;
      r.note = note;
      r.options.push_back(w.g.intern({env, ps, qs, 0}, 1));
      w.g.add(top, std::move(r));
    }
  w.g.explore([&](int id) {
    int mode = w.g.nodes[id].mode;
    if (mode == 1)
      w.expand_root(id);
    else if (mode == 0)
      w.expand(id);
  });
  Verdict v = w.g.verdict(top, "weak-cong", cfg);
  if (v.note.empty())
    v.note = basis_note(w.basis, cfg) + ", " + std::to_string(sigmas.size()) + " substitution sequences";
  return v;
}

// --- barbs --------------------------------------------------------------------

std::vector<Label> barbs(const Instance& inst, const Proc& p, Fuel fuel) {
  std::vector<Label> out;
  std::set<std::string> seen;
  for (const Step& s : erase_provenance(transitions(inst, inst.unit(), p, fuel))) {
    if (s.label.kind != Label::Kind::Out) continue;
    Label l = canonical_extrusion(s, free_names(p)).first;
    if (seen.insert(label_key(l)).second) out.push_back(l);
  }
  return out;
}

bool exposes(const Instance& inst, const Proc& p, const Term& subj, Fuel fuel) {
  for (const auto& l : barbs(inst, p, fuel))
    if (l.subj == subj) return true;
  return false;
}

bool weakly_exposes(const Instance& inst, const Proc& p, const Term& subj, const EquivalenceConfig& cfg) {
  for (const auto& x : weak_transitions(inst, inst.unit(), p, std::nullopt, cfg))
    if (exposes(inst, x, subj, cfg.fuel)) return true;
  return false;
}

std::vector<Proc> default_context_basis(const Instance& inst, const Proc& p, const Proc& q) {
  NameSet fn = set_union(free_names(p), free_names(q));
  NameSet u = with_fresh(fn, 1);
  std::vector<Proc> out;
  std::set<std::string> seen;
  auto push = [&](const Proc& r) {
    if (seen.insert(alpha_key(r)).second) out.push_back(r);
  };
  for (const auto& a : default_assertion_basis(inst, inst.unit(), {p, q})) push(assertion(a));
  for (const Term& k : inst.channel_candidates(fn)) {
    for (const Term& m : inst.message_basis(u)) push(psi::out(k, m, nil()));
    push(psi::out(k, Term::unit(), nil()));
    Name x = fresh_name({}, "x");
    push(in(k, {x}, Term::of(x), nil()));
    push(in(k, {}, Term::unit(), nil()));
  }
  return out;
}

namespace {

int prefix_depth(const Proc& p) {
  switch (p->kind) {
    case Kind::Out:
    case Kind::In:
      return 1 + prefix_depth(p->left);
    case Kind::Res:
    case Kind::Bang:
      return prefix_depth(p->left);
    case Kind::Par:
      return std::max(prefix_depth(p->left), prefix_depth(p->right));
    case Kind::Case: {
      int d = 0;
      for (const auto& b : p->branches) d = std::max(d, prefix_depth(b.body));
      return d;
    }
    case Kind::Sum: {
      int d = 0;
      for (const auto& s : p->summands) d = std::max(d, prefix_depth(s));
      return d;
    }
    default:
      return 0;
  }
}

std::vector<Proc> reduction_targets(const Instance& inst, const Proc& p, Fuel fuel) {
  std::vector<Proc> out;
  std::set<std::string> seen;
  for (const auto& r : reductions(inst, p, fuel)) {
    Proc t = tidy(r.target, &inst);
    if (seen.insert(alpha_key(t)).second) out.push_back(t);
  }
  return out;
}

std::set<std::string> barb_keys(const Instance& inst, const Proc& p, const NameSet& avoid, Fuel fuel) {
  std::set<std::string> out;
  for (const Step& s : erase_provenance(transitions(inst, inst.unit(), p, fuel)))
    if (s.label.kind == Label::Kind::Out) out.insert(label_key(canonical_extrusion(s, avoid).first));
  return out;
}

}  // namespace

Verdict barbed_bisim(const Instance& inst, const Proc& p, const Proc& q, const EquivalenceConfig& cfg,
                     const std::optional<std::vector<Proc>>& context_basis) {
  std::vector<Proc> basis = context_basis ? *context_basis : default_context_basis(inst, p, q);
  constexpr int kStride = 16;
  int depth = cfg.context_depth > 0 ? cfg.context_depth
                                    : std::min(3, 1 + std::max(prefix_depth(p), prefix_depth(q)));
  auto play = [&](int max_testers) {
    Game g(cfg.max_states);
    int root = g.intern({inst.unit(), p, q, 0});
    auto expand = [&](int id) {
      GameState s = g.nodes[id].st;
      NameSet avoid = state_names(s.env, s.p, s.q);
      if (barb_keys(inst, s.p, avoid, cfg.fuel) != barb_keys(inst, s.q, avoid, cfg.fuel)) {
        g.fail(id, Verdict::Failure::Barbs, "barbs differ");
        return;
      }
      auto rp = reduction_targets(inst, s.p, cfg.fuel);
      auto rq = reduction_targets(inst, s.q, cfg.fuel);
      for (const auto& t : rp) {
        Req r;
        r.move = WitnessStep::Move::Left;
        r.label = Label::tau();
        r.note = "reduction not answered";
        for (const auto& y : rq) r.options.push_back(g.intern({s.env, t, y, s.ext}));
        g.add(id, std::move(r));
      }
      for (const auto& t : rq) {
        Req r;
        r.move = WitnessStep::Move::Right;
        r.label = Label::tau();
        r.note = "reduction not answered";
        for (const auto& y : rp) r.options.push_back(g.intern({s.env, y, t, s.ext}));
        g.add(id, std::move(r));
      }
      // Assertion contexts only enable channels, so they are budgeted apart
      // from testers: ext = testers + kStride * assertions.
      int testers = s.ext % kStride, asserts = s.ext / kStride;
      for (const auto& c : basis) {
        bool is_assert = c->kind == Kind::Assert;
        if (is_assert ? asserts >= cfg.extension_depth : testers >= max_testers) continue;
        Req r;
        r.move = WitnessStep::Move::Context;
        r.context = c;
        r.options.push_back(g.intern({s.env, par(s.p, c), par(s.q, c), s.ext + (is_assert ? kStride : 1)}));
        g.add(id, std::move(r));
      }
    };
    g.explore(expand);
    return g.verdict(root, "barbed", cfg);
  };
  // Fewer contexts give a coarser relation, so a shallow distinction is final.
  Verdict v;
  for (int d = 1; d <= depth; ++d) {
    v = play(d);
    if (!v.equivalent()) break;
  }
  if (v.note.empty())
    v.note = std::to_string(basis.size()) + " static contexts, context depth " + std::to_string(depth);
  return v;
}

// --- witnesses ------------------------------------------------------------------

namespace {

bool has_step(const Instance& inst, const GameState& prev, const Proc& from, const Label& l, const Proc& to,
              const EquivalenceConfig& cfg) {
  NameSet avoid = state_names(prev.env, prev.p, prev.q);
  EnumContext ctx{with_fresh(avoid, cfg.fresh_names)};
  SideSteps s = side_steps(inst, prev.env, from, avoid, ctx, cfg.fuel);
  auto range = s.by_label.equal_range(label_key(l));
  for (auto it = range.first; it != range.second; ++it)
    if (!to || alpha_eq(s.steps[it->second].second, to)) return true;
  return false;
}

bool has_reduction(const Instance& inst, const Proc& from, const Proc& to, Fuel fuel) {
  for (const auto& t : reduction_targets(inst, from, fuel))
    if (!to || alpha_eq(t, to)) return true;
  return false;
}

}  // namespace

std::optional<std::string> replay_witness(const Instance& inst, const Verdict& v, const EquivalenceConfig& cfg) {
  if (!v.distinguished()) return "verdict is not distinguished";
  if (v.witness.empty()) return "empty witness";
  bool barbed = v.game == "barbed";
  bool weak = v.game == "weak" || v.game == "weak-cong";
  using M = WitnessStep::Move;
  for (std::size_t i = 1; i < v.witness.size(); ++i) {
    const GameState& a = v.witness[i - 1].state;
    const WitnessStep& w = v.witness[i];
    const GameState& b = w.state;
    std::string at = "step " + std::to_string(i) + ": ";
    switch (w.move) {
      case M::Start:
      case M::Instantiate:
        break;
      case M::Extend:
        if (!(b.env == inst.compose(a.env, w.extension)) || !alpha_eq(a.p, b.p))
          return at + "extension does not match";
        if (!weak && !alpha_eq(a.q, b.q)) return at + "extension changed a process";
        break;
      case M::Swap:
        if (!alpha_eq(a.p, b.q) || !alpha_eq(a.q, b.p)) return at + "swap does not match";
        break;
      case M::Context:
        if (!alpha_eq(par(a.p, w.context), b.p) || !alpha_eq(par(a.q, w.context), b.q))
          return at + "context does not match";
        break;
      case M::Left:
      case M::Right: {
        bool left = w.move == M::Left;
        const Proc& from = left ? a.p : a.q;
        const Proc& to = left ? b.p : b.q;
        if (barbed) {
          if (!has_reduction(inst, from, to, cfg.fuel)) return at + "attacker reduction not derivable";
          if (!has_reduction(inst, left ? a.q : a.p, left ? b.q : b.p, cfg.fuel))
            return at + "answering reduction not derivable";
        } else {
          if (!has_step(inst, a, from, *w.label, to, cfg)) return at + "attacker transition not derivable";
          if (!weak && !has_step(inst, a, left ? a.q : a.p, *w.label, left ? b.q : b.p, cfg))
            return at + "answering transition not derivable";
        }
        break;
      }
    }
  }
  const GameState& last = v.witness.back().state;
  NameSet avoid = state_names(last.env, last.p, last.q);
  NameSet u = with_fresh(avoid, cfg.fresh_names);
  switch (v.failure_kind) {
    case Verdict::Failure::Static: {
      Assertion ep = frame_env(inst, last.env, last.p);
      if (!weak) {
        if (inst.static_equiv(ep, frame_env(inst, last.env, last.q), u)) return "frames are statically equivalent";
        return std::nullopt;
      }
      for (const auto& x : weak_transitions(inst, last.env, last.q, std::nullopt, cfg))
        if (inst.static_implies(ep, frame_env(inst, last.env, x), u)) return "a τ-descendant is statically implied";
      return std::nullopt;
    }
    case Verdict::Failure::Barbs:
      if (barb_keys(inst, last.p, avoid, cfg.fuel) == barb_keys(inst, last.q, avoid, cfg.fuel))
        return "barbs agree";
      return std::nullopt;
    case Verdict::Failure::Unmatched: {
      if (!v.failure_label) return "missing failing label";
      const Proc& att = v.failure_left ? last.p : last.q;
      const Proc& def = v.failure_left ? last.q : last.p;
      if (barbed) {
        if (!has_reduction(inst, att, nullptr, cfg.fuel)) return "attacker has no reduction";
        if (has_reduction(inst, def, nullptr, cfg.fuel)) return "defender has a reduction";
        return std::nullopt;
      }
      if (!has_step(inst, last, att, *v.failure_label, nullptr, cfg)) return "attacker transition not derivable";
      if (!weak) {
        if (has_step(inst, last, def, *v.failure_label, nullptr, cfg)) return "defender can answer";
        return std::nullopt;
      }
      if (v.failure_label->is_tau()) {
        if (!tau_successors(inst, last.env, def, cfg.fuel).empty()) return "defender has a τ-step";
        return std::nullopt;
      }
      Assertion ea = frame_env(inst, last.env, att);
      for (const auto& x : weak_transitions(inst, last.env, def, std::nullopt, cfg))
        if (inst.static_implies(ea, frame_env(inst, last.env, x), u) &&
            has_step(inst, last, x, *v.failure_label, nullptr, cfg))
          return "defender can answer weakly";
      return std::nullopt;
    }
    case Verdict::Failure::None:
      return "no failure recorded";
  }
  return std::nullopt;
}

std::string describe(const Instance& inst, const Verdict& v) {
  std::string out = to_string(v.result) + " (" + v.game + ")";
  if (!v.note.empty()) out += "; " + v.note;
  out += "; " + std::to_string(v.states) + " states\n";
  if (!v.distinguished()) return out;
  Printer pr(inst);
  for (const auto& w : v.witness) {
    pr.reserve(free_names(w.state.p));
    pr.reserve(free_names(w.state.q));
    pr.reserve(names_of(w.state.env));
  }
  using M = WitnessStep::Move;
  for (std::size_t i = 0; i < v.witness.size(); ++i) {
    const auto& w = v.witness[i];
    std::string move;
    switch (w.move) {
      case M::Start:
        move = "start";
        break;
      case M::Instantiate:
        move = "instantiate " + w.text;
        break;
      case M::Extend:
        move = w.extension == inst.unit() ? (w.text.empty() ? "extend 1" : w.text)
                                          : "extend " + pr.assertion(w.extension);
        break;
      case M::Swap:
        move = "swap";
        break;
      case M::Left:
        move = "left " + pr.label(*w.label);
        break;
      case M::Right:
        move = "right " + pr.label(*w.label);
        break;
      case M::Context:
        move = "context | " + pr.proc(w.context);
        break;
    }
    out += "  " + std::to_string(i) + ". " + move + ": env " + pr.assertion(w.state.env) + ", P = " +
           pr.proc(w.state.p) + ", Q = " + pr.proc(w.state.q) + "\n";
  }
  out += "  fails: " + v.failure;
  if (v.failure_label) out += std::string(v.failure_left ? " (left " : " (right ") + pr.label(*v.failure_label) + ")";
  out += "\n";
  return out;
}

}  // namespace psi
