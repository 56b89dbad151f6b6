#include "psi/process.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

namespace psi {

namespace {

std::shared_ptr<Node> make(Kind k) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  return n;
}

Proc finish(std::shared_ptr<Node> n) {
  NameSet fn;
  std::size_t sz = 1;
  switch (n->kind) {
    case Kind::Nil:
      break;
    case Kind::Assert:
      fn = names_of(n->assertion);
      break;
    case Kind::Out:
      fn = set_union(set_union(names_of(n->subj), names_of(n->obj)), n->left->free);
      sz += n->left->size;
      break;
    case Kind::In: {
      NameSet inner = set_union(names_of(n->obj), n->left->free);
      for (Name x : n->vars) inner.erase(x);
      fn = set_union(names_of(n->subj), inner);
      sz += n->left->size;
      break;
    }
    case Kind::Case:
      for (const auto& b : n->branches) {
        fn.insert_all(set_union(names_of(b.cond), b.body->free));
        sz += b.body->size;
      }
      break;
    case Kind::Sum:
      for (const auto& s : n->summands) {
        fn.insert_all(s->free);
        sz += s->size;
      }
      break;
    case Kind::Par:
      fn = set_union(n->left->free, n->right->free);
      sz += n->left->size + n->right->size;
      break;
    case Kind::Res:
      fn = n->left->free;
      fn.erase(n->bound);
      sz += n->left->size;
      break;
    case Kind::Bang:
      fn = n->left->free;
      sz += n->left->size;
      break;
  }
  n->free = std::move(fn);
  n->size = sz;
  return n;
}

}  // namespace

Proc nil() {
  static const Proc zero = finish(make(Kind::Nil));
  return zero;
}

Proc assertion(Assertion a) {
  auto n = make(Kind::Assert);
  n->assertion = std::move(a);
  return finish(std::move(n));
}

Proc out(Term subj, Term msg, Proc cont) {
  auto n = make(Kind::Out);
  n->subj = subj;
  n->obj = msg;
  n->left = std::move(cont);
  return finish(std::move(n));
}

Proc in(Term subj, std::vector<Name> vars, Term pattern, Proc cont) {
  auto n = make(Kind::In);
  n->subj = subj;
  n->vars = std::move(vars);
  n->obj = pattern;
  n->left = std::move(cont);
  return finish(std::move(n));
}

Proc case_of(std::vector<Branch> branches) {
  auto n = make(Kind::Case);
  n->branches = std::move(branches);
  return finish(std::move(n));
}

Proc sum(std::vector<Proc> summands) {
  auto n = make(Kind::Sum);
  n->summands = std::move(summands);
  return finish(std::move(n));
}

Proc par(Proc p, Proc q) {
  auto n = make(Kind::Par);
  n->left = std::move(p);
  n->right = std::move(q);
  return finish(std::move(n));
}

Proc par_all(const std::vector<Proc>& ps) {
  if (ps.empty()) return nil();
  Proc acc = ps.back();
  for (std::size_t i = ps.size() - 1; i-- > 0;) acc = par(ps[i], acc);
  return acc;
}

Proc res(Name x, Proc p) {
  auto n = make(Kind::Res);
  n->bound = x;
  n->left = std::move(p);
  return finish(std::move(n));
}

Proc res_all(const std::vector<Name>& xs, Proc p) {
  for (std::size_t i = xs.size(); i-- > 0;) p = res(xs[i], std::move(p));
  return p;
}

Proc bang(Proc p) {
  auto n = make(Kind::Bang);
  n->left = std::move(p);
  return finish(std::move(n));
}

Proc out_name(Name subj, Name msg, Proc cont) {
  return out(Term::of(subj), msg.valid() ? Term::of(msg) : Term::unit(), std::move(cont));
}

Proc in_var(Name subj, Name var, Proc cont) {
  if (!var.valid()) return in(Term::of(subj), {}, Term::unit(), std::move(cont));
  return in(Term::of(subj), {var}, Term::of(var), std::move(cont));
}

const NameSet& free_names(const Proc& p) { return p->free; }

bool is_fresh(const std::vector<Name>& as, const Proc& p) {
  return std::none_of(as.begin(), as.end(), [&](Name a) { return p->free.contains(a); });
}

std::size_t size_of(const Proc& p) { return p->size; }

namespace {

void collect_names(const Proc& p, std::vector<Name>& out) {
  auto add = [&](const NameSet& s) { out.insert(out.end(), s.begin(), s.end()); };
  switch (p->kind) {
    case Kind::Nil:
      break;
    case Kind::Assert:
      add(names_of(p->assertion));
      break;
    case Kind::Out:
      add(names_of(p->subj));
      add(names_of(p->obj));
      collect_names(p->left, out);
      break;
    case Kind::In:
      add(names_of(p->subj));
      add(names_of(p->obj));
      out.insert(out.end(), p->vars.begin(), p->vars.end());
      collect_names(p->left, out);
      break;
    case Kind::Case:
      for (const auto& b : p->branches) {
        add(names_of(b.cond));
        collect_names(b.body, out);
      }
      break;
    case Kind::Sum:
      for (const auto& s : p->summands) collect_names(s, out);
      break;
    case Kind::Par:
      collect_names(p->left, out);
      collect_names(p->right, out);
      break;
    case Kind::Res:
      out.push_back(p->bound);
      collect_names(p->left, out);
      break;
    case Kind::Bang:
      collect_names(p->left, out);
      break;
  }
}

}  // namespace

NameSet all_names(const Proc& p) {
  std::vector<Name> out;
  collect_names(p, out);
  return NameSet(std::move(out));
}

Proc apply_perm(const Permutation& perm, const Proc& p) {
  switch (p->kind) {
    case Kind::Nil:
      return p;
    case Kind::Assert:
      return assertion(apply_perm(perm, p->assertion));
    case Kind::Out:
      return out(apply_perm(perm, p->subj), apply_perm(perm, p->obj), apply_perm(perm, p->left));
    case Kind::In: {
      std::vector<Name> vs;
      for (Name v : p->vars) vs.push_back(perm.apply(v));
      return in(apply_perm(perm, p->subj), std::move(vs), apply_perm(perm, p->obj), apply_perm(perm, p->left));
    }
    case Kind::Case: {
      std::vector<Branch> bs;
      for (const auto& b : p->branches) bs.push_back({apply_perm(perm, b.cond), apply_perm(perm, b.body)});
      return case_of(std::move(bs));
    }
    case Kind::Sum: {
      std::vector<Proc> ss;
      for (const auto& s : p->summands) ss.push_back(apply_perm(perm, s));
      return sum(std::move(ss));
    }
    case Kind::Par:
      return par(apply_perm(perm, p->left), apply_perm(perm, p->right));
    case Kind::Res:
      return res(perm.apply(p->bound), apply_perm(perm, p->left));
    case Kind::Bang:
      return bang(apply_perm(perm, p->left));
  }
  return p;
}

// --- substitution ----------------------------------------------------------

namespace {

// Substitution with binder handling. `fresh_all` renames every binder.
struct Subster {
  bool fresh_all = false;

  // Returns the substitution to use under binders `bs` and the renamed
  // binders.
  std::pair<Subst, std::vector<Name>> enter(const Subst& s, const std::vector<Name>& bs) const {
    Subst inner;
    for (std::size_t i = 0; i < s.xs.size(); ++i)
      if (std::find(bs.begin(), bs.end(), s.xs[i]) == bs.end()) {
        inner.xs.push_back(s.xs[i]);
        inner.ts.push_back(s.ts[i]);
      }
    NameSet range;
    for (const Term& t : inner.ts) range.insert_all(names_of(t));
    std::vector<Name> renamed = bs;
    for (Name& b : renamed) {
      if (fresh_all || range.contains(b)) {
        Name nb = fresh_like(b);
        inner.xs.push_back(b);
        inner.ts.push_back(Term::of(nb));
        b = nb;
      }
    }
    return {std::move(inner), std::move(renamed)};
  }

  bool touches(const Proc& p, const Subst& s) const {
    if (fresh_all) return true;
    for (Name x : s.xs)
      if (p->free.contains(x)) return true;
    return false;
  }

  Proc run(const Proc& p, const Subst& s) const {
    if (!touches(p, s)) return p;
    switch (p->kind) {
      case Kind::Nil:
        return p;
      case Kind::Assert:
        return assertion(subst(p->assertion, s));
      case Kind::Out:
        return out(subst(p->subj, s), subst(p->obj, s), run(p->left, s));
      case Kind::In: {
        auto [inner, vs] = enter(s, p->vars);
        return in(subst(p->subj, s), vs, subst(p->obj, inner), run(p->left, inner));
      }
      case Kind::Case: {
        std::vector<Branch> bs;
        for (const auto& b : p->branches) bs.push_back({subst(b.cond, s), run(b.body, s)});
        return case_of(std::move(bs));
      }
      case Kind::Sum: {
        std::vector<Proc> ss;
        for (const auto& x : p->summands) ss.push_back(run(x, s));
        return sum(std::move(ss));
      }
      case Kind::Par:
        return par(run(p->left, s), run(p->right, s));
      case Kind::Res: {
        auto [inner, bs] = enter(s, {p->bound});
        return res(bs[0], run(p->left, inner));
      }
      case Kind::Bang:
        return bang(run(p->left, s));
    }
    return p;
  }
};

}  // namespace

Proc subst(const Proc& p, const Subst& s) {
  s.require_well_formed();
  return Subster{}.run(p, s);
}

Proc subst_seq(const Proc& p, const SubstitutionSeq& seq) {
  Proc r = p;
  for (const Subst& s : seq) r = subst(r, s);
  return r;
}

Proc freshen(const Proc& p) { return Subster{true}.run(p, Subst{}); }

// --- canonical keys --------------------------------------------------------

namespace {

class KeyWriter {
 public:
  explicit KeyWriter(const std::vector<Name>& outer) {
    for (Name n : outer) bind(n);
  }

  std::string take() { return std::move(out_); }

  void tag(char c) { out_.push_back(c); }

  void num(std::uint64_t v) {
    do {
      unsigned char byte = v & 0x7f;
      v >>= 7;
      if (v) byte |= 0x80;
      out_.push_back(static_cast<char>(byte));
    } while (v);
  }

  std::uint64_t code(Name n) const {
    for (std::size_t i = stack_.size(); i-- > 0;)
      if (stack_[i].first == n) return (std::uint64_t{1} << 33) | stack_[i].second;
    return n.id;
  }

  void name(Name n) { num(code(n)); }

  void term(const Term& t) {
    if (t.is_unit()) {
      tag('u');
    } else if (t.is_tagged()) {
      tag('g');
      name(t.name);
      name(t.tag);
    } else {
      tag('n');
      name(t.name);
    }
  }

  void assertion(const Assertion& a) {
    tag('A');
    auto sorted_codes = [&](const std::vector<Name>& ns) {
      std::vector<std::uint64_t> cs;
      for (Name n : ns) cs.push_back(code(n));
      std::sort(cs.begin(), cs.end());
      num(cs.size());
      for (auto c : cs) num(c);
    };
    sorted_codes(a.names);
    std::vector<std::pair<std::uint64_t, std::uint64_t>> ps;
    for (auto [x, y] : a.pairs) ps.emplace_back(code(x), code(y));
    std::sort(ps.begin(), ps.end());
    num(ps.size());
    for (auto [x, y] : ps) {
      num(x);
      num(y);
    }
    sorted_codes(a.disabled);
  }

  void condition(const Condition& c) {
    tag('C');
    num(static_cast<unsigned>(c.kind));
    term(c.a);
    term(c.b);
  }

  void bind(Name n) { stack_.emplace_back(n, next_++); }
  void unbind(std::size_t count) { stack_.resize(stack_.size() - count); }

  void proc(const Proc& p) {
    switch (p->kind) {
      case Kind::Nil:
        tag('0');
        break;
      case Kind::Assert:
        tag('a');
        assertion(p->assertion);
        break;
      case Kind::Out:
        tag('o');
        term(p->subj);
        term(p->obj);
        proc(p->left);
        break;
      case Kind::In:
        tag('i');
        term(p->subj);
        num(p->vars.size());
        for (Name v : p->vars) bind(v);
        term(p->obj);
        proc(p->left);
        unbind(p->vars.size());
        break;
      case Kind::Case:
        tag('c');
        num(p->branches.size());
        for (const auto& b : p->branches) {
          condition(b.cond);
          proc(b.body);
        }
        break;
      case Kind::Sum:
        tag('s');
        num(p->summands.size());
        for (const auto& s : p->summands) proc(s);
        break;
      case Kind::Par:
        tag('|');
        proc(p->left);
        proc(p->right);
        break;
      case Kind::Res:
        tag('v');
        bind(p->bound);
        proc(p->left);
        unbind(1);
        break;
      case Kind::Bang:
        tag('!');
        proc(p->left);
        break;
    }
  }

 private:
  std::string out_;
  std::vector<std::pair<Name, std::uint64_t>> stack_;
  std::uint64_t next_ = 0;
};

}  // namespace

std::string alpha_key(const Proc& p, const std::vector<Name>& outer) {
  KeyWriter w(outer);
  w.proc(p);
  return w.take();
}

std::string alpha_key(const Assertion& a, const std::vector<Name>& outer) {
  KeyWriter w(outer);
  w.assertion(a);
  return w.take();
}

std::string alpha_key(const Condition& c, const std::vector<Name>& outer) {
  KeyWriter w(outer);
  w.condition(c);
  return w.take();
}

std::string alpha_key(const Term& t, const std::vector<Name>& outer) {
  KeyWriter w(outer);
  w.term(t);
  return w.take();
}

bool alpha_eq(const Proc& p, const Proc& q) {
  if (p == q) return true;
  if (p->free != q->free || p->size != q->size) return false;
  return alpha_key(p) == alpha_key(q);
}

bool structurally_equal(const Proc& p, const Proc& q) {
  if (p == q) return true;
  if (p->kind != q->kind) return false;
  switch (p->kind) {
    case Kind::Nil:
      return true;
    case Kind::Assert:
      return p->assertion == q->assertion;
    case Kind::Out:
      return p->subj == q->subj && p->obj == q->obj && structurally_equal(p->left, q->left);
    case Kind::In:
      return p->subj == q->subj && p->vars == q->vars && p->obj == q->obj && structurally_equal(p->left, q->left);
    case Kind::Case:
      if (p->branches.size() != q->branches.size()) return false;
      for (std::size_t i = 0; i < p->branches.size(); ++i)
        if (p->branches[i].cond != q->branches[i].cond ||
            !structurally_equal(p->branches[i].body, q->branches[i].body))
          return false;
      return true;
    case Kind::Sum:
      if (p->summands.size() != q->summands.size()) return false;
      for (std::size_t i = 0; i < p->summands.size(); ++i)
        if (!structurally_equal(p->summands[i], q->summands[i])) return false;
      return true;
    case Kind::Par:
      return structurally_equal(p->left, q->left) && structurally_equal(p->right, q->right);
    case Kind::Res:
      return p->bound == q->bound && structurally_equal(p->left, q->left);
    case Kind::Bang:
      return structurally_equal(p->left, q->left);
  }
  return false;
}

// --- well-formedness -------------------------------------------------------

bool is_assertion_guarded(const Proc& p) {
  switch (p->kind) {
    case Kind::Assert:
      return false;
    case Kind::Par:
      return is_assertion_guarded(p->left) && is_assertion_guarded(p->right);
    case Kind::Res:
      return is_assertion_guarded(p->left);
    case Kind::Case:
      return std::all_of(p->branches.begin(), p->branches.end(),
                         [](const Branch& b) { return is_assertion_guarded(b.body); });
    case Kind::Sum:
      return std::all_of(p->summands.begin(), p->summands.end(), is_assertion_guarded);
    case Kind::Bang:
      return is_assertion_guarded(p->left);
    default:
      return true;
  }
}

bool is_prefix_guarded(const Proc& p) { return p->kind == Kind::Out || p->kind == Kind::In; }

namespace {

void check_wf(const Proc& p, const std::string& path, const Instance* inst, std::vector<Diagnostic>& out) {
  auto here = [&](std::string msg) { out.push_back({path.empty() ? "/" : path, std::move(msg)}); };
  switch (p->kind) {
    case Kind::Nil:
      break;
    case Kind::Assert:
      if (inst && !inst->valid_assertion(p->assertion)) here("assertion not in the language of " + inst->name());
      break;
    case Kind::Out:
      check_wf(p->left, path + "/out", inst, out);
      break;
    case Kind::In: {
      NameSet pat = names_of(p->obj);
      std::vector<Name> seen;
      for (Name v : p->vars) {
        if (!pat.contains(v)) here("input variable " + hint_of(v) + " does not occur in the pattern");
        if (std::find(seen.begin(), seen.end(), v) != seen.end())
          here("input variables are not pairwise distinct");
        seen.push_back(v);
      }
      check_wf(p->left, path + "/in", inst, out);
      break;
    }
    case Kind::Case:
      for (std::size_t i = 0; i < p->branches.size(); ++i) {
        std::string sub = path + "/case[" + std::to_string(i) + "]";
        const Branch& b = p->branches[i];
        if (inst && !inst->valid_condition(b.cond)) out.push_back({sub, "condition not in the language of " + inst->name()});
        if (!is_assertion_guarded(b.body)) out.push_back({sub, "case branch is not guarded"});
        check_wf(b.body, sub, inst, out);
      }
      break;
    case Kind::Sum:
      for (std::size_t i = 0; i < p->summands.size(); ++i) {
        std::string sub = path + "/sum[" + std::to_string(i) + "]";
        if (!is_assertion_guarded(p->summands[i])) out.push_back({sub, "summand is not guarded"});
        check_wf(p->summands[i], sub, inst, out);
      }
      break;
    case Kind::Par:
      check_wf(p->left, path + "/par.0", inst, out);
      check_wf(p->right, path + "/par.1", inst, out);
      break;
    case Kind::Res:
      check_wf(p->left, path + "/new", inst, out);
      break;
    case Kind::Bang:
      if (!is_assertion_guarded(p->left)) here("replicated process is not guarded");
      check_wf(p->left, path + "/bang", inst, out);
      break;
  }
}

}  // namespace

std::vector<Diagnostic> check_well_formed(const Proc& p) {
  std::vector<Diagnostic> out;
  check_wf(p, "", nullptr, out);
  return out;
}

std::vector<Diagnostic> check_well_formed(const Proc& p, const Instance& inst) {
  std::vector<Diagnostic> out;
  check_wf(p, "", &inst, out);
  return out;
}

// --- frames ----------------------------------------------------------------

Frame frame_syntactic(const Proc& p) {
  switch (p->kind) {
    case Kind::Assert:
      return {{}, p->assertion};
    case Kind::Par: {
      Frame l = frame_syntactic(p->left);
      Frame r = frame_syntactic(p->right);
      l.binders.insert(l.binders.end(), r.binders.begin(), r.binders.end());
      l.assertion = union_of(l.assertion, r.assertion);
      return l;
    }
    case Kind::Res: {
      Frame f = frame_syntactic(p->left);
      f.binders.insert(f.binders.begin(), p->bound);
      return f;
    }
    default:
      return {};
  }
}

Frame frame_of(const Proc& p) { return frame_syntactic(freshen(p)); }

std::string alpha_key(const Frame& f) {
  // Binders that do not occur in the assertion are still part of the frame.
  std::string k = std::to_string(f.binders.size()) + ":";
  return k + alpha_key(f.assertion, f.binders);
}

bool frame_alpha_eq(const Frame& f, const Frame& g) { return alpha_key(f) == alpha_key(g); }

bool frame_entails(const Instance& inst, const Assertion& psi, const Proc& p, const Condition& phi) {
  Frame f = frame_of(p);
  // Fresh binders never occur in phi.
  return inst.entails(inst.compose(psi, f.assertion), phi);
}

// --- normal forms ----------------------------------------------------------

namespace {

void hoist(const Proc& p, NormalForm& nf, std::vector<Proc>& comps) {
  switch (p->kind) {
    case Kind::Nil:
      return;
    case Kind::Assert:
      nf.assertions.push_back(p->assertion);
      return;
    case Kind::Par:
      hoist(p->left, nf, comps);
      hoist(p->right, nf, comps);
      return;
    case Kind::Res: {
      Name x = fresh_like(p->bound);
      nf.binders.push_back(x);
      hoist(subst(p->left, Subst{{p->bound}, {Term::of(x)}}), nf, comps);
      return;
    }
    default:
      comps.push_back(p);
  }
}

}  // namespace

NormalForm normal_form(const Proc& p) {
  NormalForm nf;
  std::vector<Proc> comps;
  hoist(p, nf, comps);
  nf.guarded = par_all(comps);
  return nf;
}

Proc reassemble(const NormalForm& nf) {
  std::vector<Proc> parts;
  for (const auto& a : nf.assertions) parts.push_back(assertion(a));
  parts.push_back(nf.guarded);
  return res_all(nf.binders, par_all(parts));
}

namespace {

struct Flat {
  std::vector<Name> binders;
  std::vector<Assertion> assertions;
  std::vector<Proc> comps;
};

void bang_bodies(const Proc& p, std::vector<std::string>& out) {
  switch (p->kind) {
    case Kind::Par:
      bang_bodies(p->left, out);
      bang_bodies(p->right, out);
      break;
    case Kind::Res:
      bang_bodies(p->left, out);
      break;
    case Kind::Bang:
      out.push_back(alpha_key(p->left));
      break;
    default:
      break;
  }
}

// `p` must have distinct binders, so hoisting needs no renaming.
void congruence_flatten(const Proc& p, const std::vector<std::string>& bodies, Flat& f) {
  if (!bodies.empty() && p->kind != Kind::Bang && p->kind != Kind::Par &&
      std::find(bodies.begin(), bodies.end(), alpha_key(p)) != bodies.end())
    return;  // idle copy of a replication: R | !R == !R
  switch (p->kind) {
    case Kind::Nil:
      break;
    case Kind::Assert:
      f.assertions.push_back(p->assertion);
      break;
    case Kind::Par:
      congruence_flatten(p->left, bodies, f);
      congruence_flatten(p->right, bodies, f);
      break;
    case Kind::Res:
      f.binders.push_back(p->bound);
      congruence_flatten(p->left, bodies, f);
      break;
    default:
      f.comps.push_back(p);
  }
}

std::string keyed(const Flat& f, const std::vector<Name>& order) {
  std::vector<std::string> parts;
  for (const auto& a : f.assertions) parts.push_back("A" + alpha_key(a, order));
  for (const auto& c : f.comps) parts.push_back("P" + alpha_key(c, order));
  std::sort(parts.begin(), parts.end());
  std::string k = std::to_string(order.size()) + "#";
  for (const auto& s : parts) {
    k += std::to_string(s.size());
    k += ':';
    k += s;
  }
  return k;
}

}  // namespace

std::string congruence_key(const Proc& p) {
  Proc q = freshen(p);
  std::vector<std::string> bodies;
  bang_bodies(q, bodies);
  Flat f;
  congruence_flatten(q, bodies, f);
  // Binders that occur nowhere can be dropped: (νa)P ≡ P when a # P.
  NameSet used;
  for (const auto& a : f.assertions) used.insert_all(names_of(a));
  for (const auto& c : f.comps) used.insert_all(c->free);
  std::vector<Name> bs;
  for (Name b : f.binders)
    if (used.contains(b)) bs.push_back(b);

  if (bs.size() <= 6) {
    std::sort(bs.begin(), bs.end());
    std::string best;
    bool first = true;
    do {
      std::string k = keyed(f, bs);
      if (first || k < best) best = std::move(k);
      first = false;
    } while (std::next_permutation(bs.begin(), bs.end()));
    return best;
  }
  // Large binder sets: order by first occurrence in the sorted parts.
  std::vector<std::pair<std::string, Name>> firsts;
  for (Name b : bs) {
    std::string mark;
    for (const auto& c : f.comps)
      if (c->free.contains(b)) {
        std::string k = alpha_key(c);
        if (mark.empty() || k < mark) mark = k;
      }
    firsts.emplace_back(mark, b);
  }
  std::stable_sort(firsts.begin(), firsts.end(),
                   [](const auto& x, const auto& y) { return x.first < y.first; });
  std::vector<Name> order;
  for (auto& [k, b] : firsts) order.push_back(b);
  return keyed(f, order);
}

bool congruent(const Proc& p, const Proc& q) { return congruence_key(p) == congruence_key(q); }

// --- sums ------------------------------------------------------------------

namespace {

Name top_hint(const Proc& p) {
  if (!p->free.empty()) return *p->free.begin();
  return named("top");
}

}  // namespace

Proc desugar_sum(const Instance& inst, const Proc& p, const Proc& q) {
  if (!is_assertion_guarded(p) || !is_assertion_guarded(q))
    throw SumError("summands of + must be guarded");
  auto t = inst.top(top_hint(par(p, q)));
  if (!t) throw SumError("instance " + inst.name() + " has no always-entailed condition; + cannot be expressed");
  return case_of({{*t, p}, {*t, q}});
}

Proc desugar_sums(const Instance& inst, const Proc& p) {
  switch (p->kind) {
    case Kind::Nil:
    case Kind::Assert:
      return p;
    case Kind::Out:
      return out(p->subj, p->obj, desugar_sums(inst, p->left));
    case Kind::In:
      return in(p->subj, p->vars, p->obj, desugar_sums(inst, p->left));
    case Kind::Case: {
      std::vector<Branch> bs;
      for (const auto& b : p->branches) bs.push_back({b.cond, desugar_sums(inst, b.body)});
      return case_of(std::move(bs));
    }
    case Kind::Sum: {
      if (p->summands.empty()) return nil();
      Proc acc = desugar_sums(inst, p->summands[0]);
      if (p->summands.size() == 1) return acc;
      for (std::size_t i = 1; i < p->summands.size(); ++i) acc = desugar_sum(inst, acc, desugar_sums(inst, p->summands[i]));
      return acc;
    }
    case Kind::Par:
      return par(desugar_sums(inst, p->left), desugar_sums(inst, p->right));
    case Kind::Res:
      return res(p->bound, desugar_sums(inst, p->left));
    case Kind::Bang:
      return bang(desugar_sums(inst, p->left));
  }
  return p;
}

}  // namespace psi
