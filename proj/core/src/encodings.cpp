#include "psi/encodings.hpp"

#include <cctype>
#include <map>
#include <set>

#include "psi/syntax.hpp"

namespace psi {

// --- πP syntax ----------------------------------------------------------------

PipPtr pip_nil() { return std::make_shared<PipProc>(); }

PipPtr pip_arc(Name a, Name b) {
  auto p = std::make_shared<PipProc>();
  p->kind = PipProc::Kind::Arc;
  p->a = a;
  p->b = b;
  return p;
}

PipPtr pip_sum(std::vector<PipSummand> ss) {
  auto p = std::make_shared<PipProc>();
  p->summands = std::move(ss);
  return p;
}

PipPtr pip_prefix(PipPrefix pre, PipPtr cont) { return pip_sum({PipSummand{pre, std::move(cont)}}); }

PipPtr pip_par(PipPtr l, PipPtr r) {
  auto p = std::make_shared<PipProc>();
  p->kind = PipProc::Kind::Par;
  p->left = std::move(l);
  p->right = std::move(r);
  return p;
}

PipPtr pip_res(Name x, PipPtr body) {
  auto p = std::make_shared<PipProc>();
  p->kind = PipProc::Kind::Res;
  p->bound = x;
  p->left = std::move(body);
  return p;
}

namespace {

void pip_fn(const PipPtr& p, std::vector<Name>& bound, std::vector<Name>& out) {
  auto see = [&](Name n) {
    if (std::find(bound.begin(), bound.end(), n) != bound.end()) return;
    if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
  };
  switch (p->kind) {
    case PipProc::Kind::Arc:
      see(p->a);
      see(p->b);
      break;
    case PipProc::Kind::Par:
      pip_fn(p->left, bound, out);
      pip_fn(p->right, bound, out);
      break;
    case PipProc::Kind::Res:
      bound.push_back(p->bound);
      pip_fn(p->left, bound, out);
      bound.pop_back();
      break;
    case PipProc::Kind::Sum:
      for (const auto& s : p->summands) {
        const PipPrefix& pre = s.prefix;
        if (pre.kind == PipPrefix::Kind::CondTau) {
          see(pre.cond.a.name);
          see(pre.cond.b.name);
          pip_fn(s.cont, bound, out);
        } else {
          see(pre.subj);
          bound.push_back(pre.obj);
          pip_fn(s.cont, bound, out);
          bound.pop_back();
        }
      }
      break;
  }
}

}  // namespace

std::vector<Name> pip_free_names(const PipPtr& p) {
  std::vector<Name> bound, out;
  pip_fn(p, bound, out);
  return out;
}

std::size_t pip_size(const PipPtr& p) {
  switch (p->kind) {
    case PipProc::Kind::Arc:
      return 1;
    case PipProc::Kind::Par:
      return 1 + pip_size(p->left) + pip_size(p->right);
    case PipProc::Kind::Res:
      return 1 + pip_size(p->left);
    case PipProc::Kind::Sum: {
      std::size_t n = 1;
      for (const auto& s : p->summands) n += pip_size(s.cont);
      return n;
    }
  }
  return 1;
}

namespace {

class PipParser {
 public:
  explicit PipParser(std::string_view s) : s_(s) {}

  PipPtr run() {
    PipPtr p = par();
    skip();
    if (i_ != s_.size()) fail("trailing input");
    return p;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) {
    std::size_t line = 1, col = 1;
    for (std::size_t k = 0; k < i_ && k < s_.size(); ++k) {
      if (s_[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw SyntaxError(msg, line, col);
  }

  void skip() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }

  bool accept(std::string_view sym) {
    skip();
    if (s_.substr(i_, sym.size()) != sym) return false;
    i_ += sym.size();
    return true;
  }

  void expect(std::string_view sym) {
    if (!accept(sym)) fail("expected '" + std::string(sym) + "'");
  }

  bool at_ident() {
    skip();
    return i_ < s_.size() && (std::isalpha(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_');
  }

  std::string ident() {
    if (!at_ident()) fail("expected a name");
    std::size_t j = i_;
    while (j < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[j])) || s_[j] == '_')) ++j;
    std::string out(s_.substr(i_, j - i_));
    i_ = j;
    return out;
  }

  Name use(const std::string& x) {
    auto it = scope_.find(x);
    if (it != scope_.end() && !it->second.empty()) return it->second.back();
    return named(x);
  }

  Name bind(const std::string& x) {
    Name n = fresh_name({}, x);
    scope_[x].push_back(n);
    return n;
  }

  void unbind(const std::string& x) { scope_[x].pop_back(); }

  PipPtr par() {
    PipPtr p = sum();
    if (accept("|")) return pip_par(p, par());
    return p;
  }

  PipPtr sum() {
    PipPtr p = atom();
    if (!(skip(), s_.substr(i_, 1) == "+")) return p;
    std::vector<PipSummand> ss;
    auto take = [&](const PipPtr& q) {
      if (q->kind != PipProc::Kind::Sum) fail("summands must be prefixed");
      ss.insert(ss.end(), q->summands.begin(), q->summands.end());
    };
    take(p);
    while (accept("+")) take(atom());
    return pip_sum(std::move(ss));
  }

  PipPtr cont() {
    if (accept(".")) return atom();
    return pip_nil();
  }

  PipPtr atom() {
    skip();
    if (accept("0")) return pip_nil();
    if (accept("(")) {
      skip();
      if (s_.substr(i_, 3) == "new" && i_ + 3 < s_.size() && !std::isalnum(static_cast<unsigned char>(s_[i_ + 3]))) {
        i_ += 3;
        std::vector<std::string> xs;
        while (at_ident()) xs.push_back(ident());
        if (xs.empty()) fail("expected a name after 'new'");
        expect(")");
        std::vector<Name> ns;
        for (const auto& x : xs) ns.push_back(bind(x));
        PipPtr body = atom();
        for (std::size_t k = xs.size(); k-- > 0;) {
          unbind(xs[k]);
          body = pip_res(ns[k], body);
        }
        return body;
      }
      PipPtr p = par();
      expect(")");
      return p;
    }
    if (accept("[")) {
      Name x = use(ident());
      Condition c;
      if (accept("<->"))
        c = Condition::conn(Term::of(x), Term::of(use(ident())));
      else if (accept("<"))
        c = Condition::prec(Term::of(x), Term::of(use(ident())));
      else
        fail("expected '<' or '<->'");
      expect("]");
      if (ident() != "tau") fail("expected 'tau'");
      return pip_prefix(PipPrefix::cond_tau(c), cont());
    }
    bool output = accept("'");
    Name a = use(ident());
    if (!output && accept("/")) return pip_arc(a, use(ident()));
    expect("(");
    std::string x = ident();
    expect(")");
    Name xn = bind(x);
    PipPtr k = cont();
    unbind(x);
    return pip_prefix(output ? PipPrefix::out(a, xn) : PipPrefix::in(a, xn), k);
  }

  std::string_view s_;
  std::size_t i_ = 0;
  std::map<std::string, std::vector<Name>> scope_;
};

struct PipPrinter {
  std::map<Name, std::string> shown;
  std::set<std::string> used;

  explicit PipPrinter(const PipPtr& p) {
    for (Name n : pip_free_names(p)) {
      std::string s = is_interned(n) ? hint_of(n) : hint_of(n) + "#" + std::to_string(n.id);
      shown[n] = s;
      used.insert(s);
    }
  }

  std::string name(Name n) {
    auto it = shown.find(n);
    if (it != shown.end()) return it->second;
    return is_interned(n) ? hint_of(n) : hint_of(n) + "#" + std::to_string(n.id);
  }

  std::string bind(Name n) {
    std::string base = hint_of(n).empty() ? "x" : hint_of(n);
    std::string s = base;
    for (int k = 1; used.count(s); ++k) s = base + std::to_string(k);
    used.insert(s);
    shown[n] = s;
    return s;
  }

  std::string proc(const PipPtr& p, int level) {
    switch (p->kind) {
      case PipProc::Kind::Arc:
        return name(p->a) + "/" + name(p->b);
      case PipProc::Kind::Par: {
        std::string s = proc(p->left, 1) + " | " + proc(p->right, 0);
        return level > 0 ? "(" + s + ")" : s;
      }
      case PipProc::Kind::Res: {
        std::string x = bind(p->bound);
        return "(new " + x + ")" + proc(p->left, 2);
      }
      case PipProc::Kind::Sum: {
        if (p->summands.empty()) return "0";
        std::string s;
        for (std::size_t i = 0; i < p->summands.size(); ++i) {
          if (i) s += " + ";
          s += summand(p->summands[i]);
        }
        return p->summands.size() > 1 && level > 0 ? "(" + s + ")" : s;
      }
    }
    return "0";
  }

  std::string summand(const PipSummand& s) {
    std::string pre;
    const PipPrefix& x = s.prefix;
    if (x.kind == PipPrefix::Kind::CondTau) {
      pre = "[" + name(x.cond.a.name) + (x.cond.kind == CondKind::Conn ? " <-> " : " < ") + name(x.cond.b.name) +
            "]tau";
    } else {
      std::string a = name(x.subj);
      pre = (x.kind == PipPrefix::Kind::Out ? "'" : "") + a + "(" + bind(x.obj) + ")";
    }
    bool nil = s.cont->kind == PipProc::Kind::Sum && s.cont->summands.empty();
    return nil ? pre : pre + "." + proc(s.cont, 2);
  }
};

}  // namespace

PipPtr parse_pip(std::string_view text) { return PipParser(text).run(); }

std::string print_pip(const PipPtr& p) {
  PipPrinter pr(p);
  return pr.proc(p, 0);
}

// --- πP encoding ----------------------------------------------------------------

namespace {

Assertion arc(Name lo, Name hi) { return Assertion::of_pairs({{lo, hi}}); }

Proc encode_summand(const PipSummand& s, const std::function<Proc(const PipPtr&)>& enc) {
  const PipPrefix& pre = s.prefix;
  Proc k = enc(s.cont);
  switch (pre.kind) {
    case PipPrefix::Kind::Out: {
      Name x = fresh_name({}, "x");
      return res_all({x, pre.obj}, out(Term::of(pre.subj), Term::of(x), par(assertion(arc(x, pre.obj)), k)));
    }
    case PipPrefix::Kind::In: {
      Name x = fresh_name({}, "x");
      return res(pre.obj, in(Term::of(pre.subj), {x}, Term::of(x), par(assertion(arc(pre.obj, x)), k)));
    }
    case PipPrefix::Kind::CondTau: {
      Name x = fresh_name({}, "x");
      Name z = fresh_name({}, "x");
      Proc hs = res(x, par(in(Term::of(x), {z}, Term::of(z), nil()), out(Term::of(x), Term::of(x), k)));
      return case_of({Branch{pre.cond, hs}});
    }
  }
  return nil();
}

Proc encode_pip_at(const PipPtr& p) {
  switch (p->kind) {
    case PipProc::Kind::Arc:
      return assertion(arc(p->b, p->a));
    case PipProc::Kind::Par:
      return par(encode_pip_at(p->left), encode_pip_at(p->right));
    case PipProc::Kind::Res:
      return res(p->bound, encode_pip_at(p->left));
    case PipProc::Kind::Sum: {
      if (p->summands.empty()) return nil();
      if (p->summands.size() == 1) return encode_summand(p->summands[0], encode_pip_at);
      auto fn = pip_free_names(p);
      Name a = fn.empty() ? named("top") : fn.front();
      Condition top = Condition::prec(Term::of(a), Term::of(a));
      std::vector<Branch> bs;
      for (const auto& s : p->summands) bs.push_back(Branch{top, encode_summand(s, encode_pip_at)});
      return case_of(std::move(bs));
    }
  }
  return nil();
}

}  // namespace

Proc encode_pip(const PipPtr& p) { return encode_pip_at(p); }

Verdict pip_correspondence(const PipPtr& p, const PipPtr& q, const EquivalenceConfig& cfg) {
  PreorderInstance inst;
  return strong_bisim(inst, inst.unit(), encode_pip(p), encode_pip(q), cfg);
}

// --- choice encoding ----------------------------------------------------------------

namespace {

void require_untagged(const Term& t) {
  if (t.is_tagged()) throw ChoiceError("source process already uses tagged terms");
}

Proc encode_choice_at(const Proc& p) {
  switch (p->kind) {
    case Kind::Nil:
    case Kind::Assert:
      return p;
    case Kind::Out:
      require_untagged(p->subj);
      require_untagged(p->obj);
      return out(p->subj, p->obj, encode_choice_at(p->left));
    case Kind::In:
      require_untagged(p->subj);
      require_untagged(p->obj);
      return in(p->subj, p->vars, p->obj, encode_choice_at(p->left));
    case Kind::Case: {
      std::vector<Branch> bs;
      for (const auto& b : p->branches) bs.push_back(Branch{b.cond, encode_choice_at(b.body)});
      return case_of(std::move(bs));
    }
    case Kind::Par:
      return par(encode_choice_at(p->left), encode_choice_at(p->right));
    case Kind::Res:
      return res(p->bound, encode_choice_at(p->left));
    case Kind::Bang:
      return bang(encode_choice_at(p->left));
    case Kind::Sum: {
      Name x = fresh_name(free_names(p), "t");
      Proc off = assertion(Assertion{}.with_disabled({x}));
      std::vector<Proc> parts;
      for (const auto& s : p->summands) {
        if (s->kind != Kind::Out && s->kind != Kind::In) throw ChoiceError("summand is not prefix-guarded");
        require_untagged(s->subj);
        require_untagged(s->obj);
        Term tagged = Term::tagged(s->subj.name, x);
        Proc k = par(encode_choice_at(s->left), off);
        parts.push_back(s->kind == Kind::Out ? out(tagged, s->obj, k) : in(tagged, s->vars, s->obj, k));
      }
      return res(x, par_all(parts));
    }
  }
  return p;
}

void collect_sums(const Proc& p, std::vector<Proc>& out) {
  switch (p->kind) {
    case Kind::Sum:
      out.push_back(p);
      for (const auto& s : p->summands) collect_sums(s->left, out);
      break;
    case Kind::Out:
    case Kind::In:
    case Kind::Res:
    case Kind::Bang:
      collect_sums(p->left, out);
      break;
    case Kind::Par:
      collect_sums(p->left, out);
      collect_sums(p->right, out);
      break;
    case Kind::Case:
      for (const auto& b : p->branches) collect_sums(b.body, out);
      break;
    default:
      break;
  }
}

// The sum with every continuation replaced by 0.
Proc skeleton(const Proc& s) {
  std::vector<Proc> ss;
  for (const auto& x : s->summands)
    ss.push_back(x->kind == Kind::Out ? out(x->subj, x->obj, nil()) : in(x->subj, x->vars, x->obj, nil()));
  return sum(std::move(ss));
}

}  // namespace

Proc encode_choice(const Proc& p) { return encode_choice_at(p); }

Label untag_label(const Label& l) {
  Label r = l;
  r.subj = l.subj.untagged();
  return r;
}

ChoiceReport choice_correspondence(const Instance& source, const Instance& target, const Assertion& psi,
                                   const Proc& p, const EquivalenceConfig& cfg) {
  ChoiceReport rep;
  Proc enc = encode_choice(p);
  NameSet avoid = set_union(names_of(psi), free_names(p));
  EnumContext ctx = default_context(psi, {p});
  Printer pr(source);
  pr.reserve(avoid);

  std::map<std::string, Outcome> memo;
  auto related = [&](const Proc& x, const Proc& y) {
    std::string k = alpha_key(x) + "~" + alpha_key(y);
    auto it = memo.find(k);
    if (it != memo.end()) return it->second;
    Outcome o = strong_bisim(target, psi, x, y, cfg).result;
    memo.emplace(k, o);
    return o;
  };

  std::vector<std::pair<Label, Proc>> src, tgt;
  for (const Step& s : erase_provenance(transitions(source, psi, p, cfg.fuel, &ctx)))
    src.push_back(canonical_extrusion(s, avoid));
  for (const Step& s : erase_provenance(transitions(target, psi, enc, cfg.fuel, &ctx)))
    tgt.push_back(canonical_extrusion(s, avoid));
  rep.source_transitions = src.size();
  rep.target_transitions = tgt.size();

  // Forward: the encoding matches the exact label.
  for (const auto& [l, t] : src) {
    std::string k = label_key(l);
    Proc want = encode_choice(t);
    bool ok = false, unsure = false;
    for (const auto& [l2, t2] : tgt) {
      if (label_key(l2) != k) continue;
      Outcome o = related(t2, want);
      if (o == Outcome::Equivalent) {
        ok = true;
        break;
      }
      if (o == Outcome::Inconclusive) unsure = true;
    }
    if (ok) continue;
    if (unsure) {
      ++rep.inconclusive;
    } else {
      ++rep.forward_failures;
      rep.details.push_back("forward: " + pr.label(l) + " to " + pr.proc(t) + " unmatched");
    }
  }
  // Backward: every encoded step untags to a source step.
  for (const auto& [l2, t2] : tgt) {
    std::string k = label_key(untag_label(l2));
    bool ok = false, unsure = false;
    for (const auto& [l, t] : src) {
      if (label_key(l) != k) continue;
      Outcome o = related(t2, encode_choice(t));
      if (o == Outcome::Equivalent) {
        ok = true;
        break;
      }
      if (o == Outcome::Inconclusive) unsure = true;
    }
    if (ok) continue;
    if (unsure) {
      ++rep.inconclusive;
    } else {
      ++rep.backward_failures;
      rep.details.push_back("backward: " + pr.label(untag_label(l2)) + " has no source counterpart");
    }
  }

  // Tag checks on every sum, with all its channels enabled.
  std::vector<Proc> sums;
  collect_sums(p, sums);
  rep.sums = sums.size();
  for (const auto& s : sums) {
    Proc sk = skeleton(s);
    Assertion env = psi;
    for (Name n : free_names(sk)) env = source.compose(env, source.enable_channel(n));
    Proc esk = encode_choice(sk);
    EnumContext c2 = default_context(env, {sk});
    for (const auto& t : transitions(target, env, esk, cfg.fuel, &c2)) {
      if (t.label.is_tau()) {
        ++rep.inter_summand_taus;
        rep.details.push_back("inter-summand tau in " + pr.proc(s));
        continue;
      }
      std::size_t after = transitions(target, env, t.target, cfg.fuel, &c2).size();
      if (after > 0) {
        rep.post_commit_firings += after;
        rep.details.push_back("summand still fires after commit in " + pr.proc(s));
      }
    }
  }
  return rep;
}

AbstractionReport choice_full_abstraction(const Instance& source, const Instance& target, const Proc& p,
                                          const Proc& q, const EquivalenceConfig& cfg) {
  AbstractionReport r;
  r.source = strong_bisim(source, source.unit(), p, q, cfg);
  r.target = strong_bisim(target, target.unit(), encode_choice(p), encode_choice(q), cfg);
  return r;
}

}  // namespace psi
