#include "psi/syntax.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

#include "psi/params.hpp"

namespace psi {

SyntaxError::SyntaxError(const std::string& msg, std::size_t l, std::size_t c)
    : std::runtime_error(std::to_string(l) + ":" + std::to_string(c) + ": " + msg), line(l), col(c) {}

namespace {

// --- literal registry --------------------------------------------------------

struct LiteralRegistry {
  std::shared_mutex mu;
  std::unordered_map<std::string, LiteralSyntax> table;
};

LiteralRegistry& literal_registry();

std::vector<Name> name_list(LiteralReader& r, std::string_view close) {
  std::vector<Name> out;
  if (r.accept(close)) return out;
  do {
    out.push_back(r.name());
  } while (r.accept(","));
  r.expect(close);
  return out;
}

std::string join_names(const std::vector<Name>& ns, const NameDisplay& show) {
  std::vector<std::string> ss;
  for (Name n : ns) ss.push_back(show(n));
  std::sort(ss.begin(), ss.end());
  std::string out;
  for (std::size_t i = 0; i < ss.size(); ++i) out += (i ? ", " : "") + ss[i];
  return out;
}

LiteralSyntax pair_syntax(std::string_view arrow, bool reversed) {
  std::string a(arrow);
  LiteralSyntax s;
  s.parse_assertion = [a, reversed](LiteralReader& r) {
    r.expect("{");
    std::vector<std::pair<Name, Name>> ps;
    if (!r.accept("}")) {
      do {
        Name x = r.name();
        r.expect(a);
        Name y = r.name();
        ps.emplace_back(reversed ? y : x, reversed ? x : y);
      } while (r.accept(","));
      r.expect("}");
    }
    return Assertion::of_pairs(std::move(ps));
  };
  s.print_assertion = [a, reversed](const Assertion& as, const NameDisplay& show) {
    std::vector<std::string> items;
    for (auto [x, y] : as.pairs) items.push_back(reversed ? show(y) + a + show(x) : show(x) + a + show(y));
    std::sort(items.begin(), items.end());
    std::string out = "{";
    for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ", " : "") + items[i];
    return out + "}";
  };
  return s;
}

LiteralRegistry& literal_registry() {
  static LiteralRegistry reg;
  static std::once_flag once;
  std::call_once(once, [] {
    LiteralSyntax pi;
    pi.parse_assertion = [](LiteralReader& r) {
      if (r.accept("1")) return Assertion{};
      r.expect("{");
      r.expect("}");
      return Assertion{};
    };
    pi.print_assertion = [](const Assertion&, const NameDisplay&) { return std::string("1"); };
    reg.table["pi"] = pi;

    LiteralSyntax ether;
    ether.parse_assertion = [](LiteralReader& r) {
      r.expect("{");
      return Assertion::of_names(name_list(r, "}"));
    };
    ether.print_assertion = [](const Assertion& a, const NameDisplay& show) {
      return "{" + join_names(a.names, show) + "}";
    };
    reg.table["ether"] = ether;

    reg.table["triangle"] = pair_syntax("->", false);
    // An arc (x, y) means x < y.
    reg.table["preorder"] = pair_syntax("<", false);
  });
  return reg;
}

const LiteralSyntax& literals_of(const Instance& inst) {
  std::string key = inst.name();
  if (inst.is_tagged()) key = static_cast<const TaggedInstance&>(inst).base().name();
  auto& reg = literal_registry();
  std::shared_lock lock(reg.mu);
  auto it = reg.table.find(key);
  if (it == reg.table.end()) throw std::invalid_argument("no literal syntax registered for instance " + key);
  return it->second;
}

// --- lexer -------------------------------------------------------------------

enum class Tok : std::uint8_t { Ident, Number, Sym, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t line, col;
};

const char* const kSymbols[] = {"<->", "(|", "|)", "[]", "->", "'", "<", ">", "(", ")", "|", "+", ".", "!", "\\",
                                ":",   "{",  "}",  ",",  "=",  "/", "@", "#"};

std::vector<Token> lex(std::string_view s, std::size_t line0 = 1) {
  std::vector<Token> out;
  std::size_t line = line0, col = 1;
  std::size_t i = 0;
  auto adv = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (s[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      adv(1);
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
      out.push_back({Tok::Ident, std::string(s.substr(i, j - i)), line, col});
      adv(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      out.push_back({Tok::Number, std::string(s.substr(i, j - i)), line, col});
      adv(j - i);
      continue;
    }
    bool matched = false;
    for (const char* sym : kSymbols) {
      std::string_view v(sym);
      if (s.substr(i, v.size()) == v) {
        out.push_back({Tok::Sym, std::string(v), line, col});
        adv(v.size());
        matched = true;
        break;
      }
    }
    if (!matched) throw SyntaxError(std::string("unexpected character '") + c + "'", line, col);
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

bool is_keyword(std::string_view s) { return s == "new" || s == "case" || s == "dis" || s == "tau" || s == "bot"; }

// --- parser ------------------------------------------------------------------

class Parser : public LiteralReader {
 public:
  Parser(std::vector<Token> toks, const Instance& inst) : toks_(std::move(toks)), inst_(inst) {}

  bool accept(std::string_view sym) override {
    const Token& t = peek();
    if ((t.kind == Tok::Sym || t.kind == Tok::Number || t.kind == Tok::Ident) && t.text == sym) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(std::string_view sym) override {
    if (!accept(sym)) fail("expected '" + std::string(sym) + "'");
  }

  bool at_name() const override {
    const Token& t = peek();
    return t.kind == Tok::Ident && !is_keyword(t.text);
  }

  Name name() override { return resolve(raw_name()); }

  [[noreturn]] void fail(const std::string& msg) override {
    const Token& t = peek();
    std::string got = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    throw SyntaxError(msg + ", got " + got, t.line, t.col);
  }

  void finish() {
    if (peek().kind != Tok::End) fail("trailing input");
  }

  Proc process() { return par_level(); }

  Assertion assertion_literal() {
    Assertion base = literals_of(inst_).parse_assertion(*this);
    if (inst_.is_tagged() && accept("/")) {
      expect("{");
      std::vector<Name> tags;
      if (!accept("}")) {
        do {
          tags.push_back(name());
        } while (accept(","));
        expect("}");
      }
      base = base.with_disabled(std::move(tags));
    }
    return base;
  }

  Condition condition() {
    if (accept("dis")) return Condition::tag(name());
    Term a = term();
    if (accept("<->")) return Condition::conn(a, term());
    if (accept("=")) return Condition::eq(a, term());
    if (accept("<")) return Condition::prec(a, term());
    fail("expected '<->', '=' or '<' in condition");
    return {};
  }

  Term term() {
    Name n = name();
    if (accept("@")) return Term::tagged(n, name());
    return Term::of(n);
  }

 private:
  // Identifier with an optional "#id" suffix naming a specific atom.
  struct RawName {
    std::string text;
    Name atom;  // set when written as text#id
  };

  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }

  RawName raw_name() {
    if (!at_name()) fail("expected a name");
    RawName r{toks_[pos_++].text, {}};
    if (peek().kind == Tok::Sym && peek().text == "#" && peek(1).kind == Tok::Number) {
      pos_ += 2;
      r.atom = name_by_id(static_cast<std::uint32_t>(std::stoul(toks_[pos_ - 1].text)));
      if (!r.atom.valid()) fail("unknown atom id");
    }
    return r;
  }

  Name resolve(const RawName& r) {
    if (r.atom.valid()) {
      for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
        if (it->first == r.text + "#" + std::to_string(r.atom.id)) return it->second;
      return r.atom;
    }
    for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
      if (it->first == r.text) return it->second;
    return named(r.text);
  }

  Name bind(const RawName& r) {
    std::string key = r.atom.valid() ? r.text + "#" + std::to_string(r.atom.id) : r.text;
    Name n = fresh_name({}, r.text);
    scope_.emplace_back(key, n);
    return n;
  }

  // P | Q, right nested.
  Proc par_level() {
    Proc left = sum_level();
    if (peek().kind == Tok::Sym && peek().text == "|") {
      ++pos_;
      return par(left, par_level());
    }
    return left;
  }

  Proc sum_level() {
    std::vector<Proc> items{unary()};
    while (accept("+")) items.push_back(unary());
    if (items.size() == 1) return items[0];
    return sum(std::move(items));
  }

  Proc continuation() {
    if (accept(".")) return unary();
    return nil();
  }

  Proc unary() {
    const Token& t = peek();
    if (t.kind == Tok::Number && t.text == "0") {
      ++pos_;
      return nil();
    }
    if (accept("(|")) {
      Assertion a = assertion_literal();
      expect("|)");
      return assertion(std::move(a));
    }
    if (accept("!")) return bang(unary());
    if (accept("'")) {
      Term subj = term();
      Term msg = Term::unit();
      if (accept("<")) {
        msg = term();
        expect(">");
      }
      return out(subj, msg, continuation());
    }
    if (accept("case")) return case_expr();
    if (t.kind == Tok::Sym && t.text == "(") {
      if (peek(1).kind == Tok::Ident && peek(1).text == "new") {
        pos_ += 2;
        std::size_t mark = scope_.size();
        std::vector<Name> xs;
        while (!accept(")")) xs.push_back(bind(raw_name()));
        if (xs.empty()) fail("empty restriction");
        Proc body = unary();
        scope_.resize(mark);
        return res_all(xs, body);
      }
      ++pos_;
      Proc p = process();
      expect(")");
      return p;
    }
    if (at_name()) return input();
    fail("expected a process");
    return nil();
  }

  Proc input() {
    Term subj = term();
    if (!accept("(")) return in(subj, {}, Term::unit(), continuation());
    std::size_t mark = scope_.size();
    std::vector<Name> vars;
    Term pattern;
    if (peek().kind == Tok::Sym && peek().text == "\\") {
      while (accept("\\")) vars.push_back(bind(raw_name()));
      expect(")");
      pattern = term();
    } else if (accept(")")) {
      pattern = term();
    } else {
      // M(x).P abbreviates M(\x)x.P
      vars.push_back(bind(raw_name()));
      expect(")");
      pattern = Term::of(vars[0]);
    }
    Proc cont = continuation();
    scope_.resize(mark);
    return in(subj, std::move(vars), pattern, cont);
  }

  Proc case_expr() {
    std::vector<Branch> bs;
    do {
      Condition c = condition();
      expect(":");
      bs.push_back({c, unary()});
    } while (accept("[]"));
    return case_of(std::move(bs));
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const Instance& inst_;
  std::vector<std::pair<std::string, Name>> scope_;
};

}  // namespace

void register_literals(const std::string& instance, LiteralSyntax syntax) {
  auto& reg = literal_registry();
  std::unique_lock lock(reg.mu);
  reg.table[instance] = std::move(syntax);
}

Proc parse_process(std::string_view text, const Instance& inst) {
  Parser p(lex(text), inst);
  Proc r = p.process();
  p.finish();
  return r;
}

Assertion parse_assertion(std::string_view text, const Instance& inst) {
  Parser p(lex(text), inst);
  Assertion a = p.assertion_literal();
  p.finish();
  return a;
}

Condition parse_condition(std::string_view text, const Instance& inst) {
  Parser p(lex(text), inst);
  Condition c = p.condition();
  p.finish();
  return c;
}

Term parse_term(std::string_view text, const Instance& inst) {
  Parser p(lex(text), inst);
  Term t = p.term();
  p.finish();
  return t;
}

std::vector<Proc> parse_corpus(std::string_view text, const Instance& inst) {
  std::vector<Proc> out;
  std::size_t line = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line;
    std::string_view l = text.substr(start, end - start);
    if (auto hash = l.find('#'); hash != std::string_view::npos) {
      // '#' directly after a name is an atom id, not a comment.
      std::size_t k = hash;
      while (k != std::string_view::npos) {
        bool atom = k > 0 && (std::isalnum(static_cast<unsigned char>(l[k - 1])) || l[k - 1] == '_') &&
                    k + 1 < l.size() && std::isdigit(static_cast<unsigned char>(l[k + 1]));
        if (!atom) {
          l = l.substr(0, k);
          break;
        }
        k = l.find('#', k + 1);
      }
    }
    bool blank = std::all_of(l.begin(), l.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
    if (!blank) {
      Parser p(lex(l, line), inst);
      Proc r = p.process();
      p.finish();
      out.push_back(r);
    }
    if (end == text.size()) break;
    start = end + 1;
  }
  return out;
}

// --- printer -----------------------------------------------------------------

Printer::Printer(const Instance& inst) : inst_(inst) {}

void Printer::reserve(const NameSet& free) {
  for (Name n : free)
    if (!display_.count(n) && is_interned(n)) taken_.push_back(hint_of(n));
}

std::string Printer::pick(Name n) {
  std::string base = hint_of(n);
  auto hash = base.find('#');
  if (hash != std::string::npos) base = base.substr(0, hash);
  if (base.empty() || !(std::isalpha(static_cast<unsigned char>(base[0])) || base[0] == '_')) base = "n";
  auto used = [&](const std::string& s) {
    if (is_keyword(s)) return true;
    return std::find(taken_.begin(), taken_.end(), s) != taken_.end();
  };
  std::string cand = base;
  for (int k = 1; used(cand); ++k) cand = base + std::to_string(k);
  return cand;
}

std::string Printer::declare(Name n) {
  auto it = display_.find(n);
  if (it != display_.end()) return it->second;
  std::string d = pick(n);
  display_[n] = d;
  taken_.push_back(d);
  return d;
}

std::string Printer::name(Name n) const {
  auto it = display_.find(n);
  if (it != display_.end()) return it->second;
  if (is_interned(n)) return hint_of(n);
  std::string h = hint_of(n);
  if (h.empty() || !(std::isalpha(static_cast<unsigned char>(h[0])) || h[0] == '_')) h = "n";
  return h + "#" + std::to_string(n.id);
}

std::string Printer::term(const Term& t) const {
  if (t.is_unit()) return "()";
  if (t.is_tagged()) return name(t.name) + "@" + name(t.tag);
  return name(t.name);
}

std::string Printer::assertion(const Assertion& a) const {
  NameDisplay show = [this](Name n) { return name(n); };
  std::string s = literals_of(inst_).print_assertion(inst_.is_tagged() ? TaggedInstance::base_part(a) : a, show);
  if (inst_.is_tagged() && !a.disabled.empty()) s += " / {" + join_names(a.disabled, show) + "}";
  return s;
}

std::string Printer::condition(const Condition& c) const {
  switch (c.kind) {
    case CondKind::Tag:
      return "dis " + term(c.a);
    case CondKind::Conn:
      return term(c.a) + " <-> " + term(c.b);
    case CondKind::Eq:
      return term(c.a) + " = " + term(c.b);
    case CondKind::Prec:
      return term(c.a) + " < " + term(c.b);
  }
  return {};
}

namespace {

enum Level { kPar = 0, kSum = 1, kUnary = 2 };

}  // namespace

void Printer::proc_at(const Proc& p, int level, std::string& out) {
  auto scoped = [&](const std::vector<Name>& bs, auto&& body) {
    std::vector<std::pair<Name, std::optional<std::string>>> saved;
    for (Name b : bs) {
      auto it = display_.find(b);
      saved.emplace_back(b, it == display_.end() ? std::nullopt : std::optional<std::string>(it->second));
      display_.erase(b);
    }
    std::size_t mark = taken_.size();
    for (Name b : bs) {
      std::string d = pick(b);
      display_[b] = d;
      taken_.push_back(d);
    }
    body();
    taken_.resize(mark);
    for (auto& [b, d] : saved) {
      if (d) display_[b] = *d;
      else display_.erase(b);
    }
  };
  auto open = [&](int need) {
    bool paren = level > need;
    if (paren) out += "(";
    return paren;
  };

  switch (p->kind) {
    case Kind::Nil:
      out += "0";
      return;
    case Kind::Assert:
      out += "(|" + assertion(p->assertion) + "|)";
      return;
    case Kind::Out:
      out += "'" + term(p->subj);
      if (!p->obj.is_unit()) out += "<" + term(p->obj) + ">";
      if (p->left->kind != Kind::Nil) {
        out += ".";
        proc_at(p->left, kUnary + 1, out);
      }
      return;
    case Kind::In:
      out += term(p->subj);
      scoped(p->vars, [&] {
        if (!p->vars.empty() || !p->obj.is_unit()) {
          bool sugar = p->vars.size() == 1 && !p->obj.is_tagged() && p->obj.name == p->vars[0];
          if (sugar) {
            out += "(" + name(p->vars[0]) + ")";
          } else {
            out += "(";
            for (std::size_t i = 0; i < p->vars.size(); ++i) out += (i ? " \\" : "\\") + name(p->vars[i]);
            out += ")" + term(p->obj);
          }
        }
        if (p->left->kind != Kind::Nil) {
          out += ".";
          proc_at(p->left, kUnary + 1, out);
        }
      });
      return;
    case Kind::Case: {
      bool paren = level > kUnary;
      if (paren) out += "(";
      out += "case ";
      for (std::size_t i = 0; i < p->branches.size(); ++i) {
        if (i) out += " [] ";
        out += condition(p->branches[i].cond) + " : ";
        proc_at(p->branches[i].body, kUnary + 1, out);
      }
      if (paren) out += ")";
      return;
    }
    case Kind::Sum: {
      bool paren = open(kSum);
      for (std::size_t i = 0; i < p->summands.size(); ++i) {
        if (i) out += " + ";
        proc_at(p->summands[i], kUnary, out);
      }
      if (paren) out += ")";
      return;
    }
    case Kind::Par: {
      bool paren = open(kPar);
      proc_at(p->left, kSum, out);
      out += " | ";
      proc_at(p->right, kPar, out);
      if (paren) out += ")";
      return;
    }
    case Kind::Res: {
      std::vector<Name> bs;
      Proc body = p;
      while (body->kind == Kind::Res) {
        bs.push_back(body->bound);
        body = body->left;
      }
      // Repeated binders shadow; split so each group has distinct names.
      std::size_t cut = bs.size();
      for (std::size_t i = 0; i < bs.size() && cut == bs.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
          if (bs[i] == bs[j]) {
            cut = i;
            break;
          }
      if (cut < bs.size()) {
        body = p;
        for (std::size_t i = 0; i < cut; ++i) body = body->left;
        bs.resize(cut);
      }
      scoped(bs, [&] {
        out += "(new";
        for (Name b : bs) out += " " + name(b);
        out += ")";
        proc_at(body, kUnary + 1, out);
      });
      return;
    }
    case Kind::Bang:
      out += "!";
      proc_at(p->left, kUnary + 1, out);
      return;
  }
}

std::string Printer::proc(const Proc& p) {
  reserve(free_names(p));
  std::string out;
  proc_at(p, kPar, out);
  return out;
}

std::string Printer::label(const Label& l) {
  switch (l.kind) {
    case Label::Kind::Tau:
      return "tau";
    case Label::Kind::In:
      return term(l.subj) + (l.obj.is_unit() ? "" : "<" + term(l.obj) + ">");
    case Label::Kind::Out: {
      std::string s = "'" + term(l.subj);
      if (!l.bound.empty()) {
        s += "(new";
        for (Name b : l.bound) s += " " + declare(b);
        s += ")";
      }
      if (!l.obj.is_unit()) s += "<" + term(l.obj) + ">";
      return s;
    }
  }
  return {};
}

std::string Printer::provenance(const Provenance& p) {
  if (p.bot) return "bot";
  std::vector<Name> all = p.outer;
  all.insert(all.end(), p.inner.begin(), p.inner.end());
  std::string s;
  std::vector<std::pair<Name, std::optional<std::string>>> saved;
  for (Name b : all) {
    auto it = display_.find(b);
    saved.emplace_back(b, it == display_.end() ? std::nullopt : std::optional<std::string>(it->second));
    display_.erase(b);
  }
  std::size_t mark = taken_.size();
  auto bind = [&](Name b) {
    std::string d = pick(b);
    display_[b] = d;
    taken_.push_back(d);
    return d;
  };
  std::vector<std::string> outer, inner;
  for (Name b : p.outer) outer.push_back(bind(b));
  for (Name b : p.inner) inner.push_back(bind(b));
  auto join = [](const std::vector<std::string>& v) {
    std::string r;
    for (std::size_t i = 0; i < v.size(); ++i) r += (i ? " " : "") + v[i];
    return r;
  };
  s = "(new " + join(outer) + "; " + join(inner) + ")" + term(p.term);
  taken_.resize(mark);
  for (auto& [b, d] : saved) {
    if (d) display_[b] = *d;
    else display_.erase(b);
  }
  return s;
}

std::string print(const Proc& p, const Instance& inst) {
  Printer pr(inst);
  return pr.proc(p);
}

std::string print(const Assertion& a, const Instance& inst) { return Printer(inst).assertion(a); }

namespace {

template <class T>
std::string record(const Instance& inst, const T& t, const Provenance* prov) {
  Printer pr(inst);
  pr.reserve(names_of(t.env));
  pr.reserve(free_names(t.source));
  pr.reserve(free_names(t.target));
  // Names the enumeration invented (fresh received messages) get a readable
  // display that a re-enumeration reproduces.
  NameSet invented = set_union(free_names(t.target), set_union(names_of(t.label.subj), names_of(t.label.obj)));
  for (Name b : t.label.bound) invented.erase(b);
  for (Name n : invented)
    if (!is_interned(n)) pr.declare(n);
  nlohmann::ordered_json j;
  j["env"] = pr.assertion(t.env);
  j["source"] = pr.proc(t.source);
  j["label"] = pr.label(t.label);
  if (prov) j["provenance"] = pr.provenance(*prov);
  j["target"] = pr.proc(t.target);
  return j.dump();
}

}  // namespace

std::string trace_record(const Instance& inst, const Transition& t) { return record(inst, t, &t.prov); }

std::string trace_record(const Instance& inst, const Step& s) { return record(inst, s, nullptr); }

}  // namespace psi
