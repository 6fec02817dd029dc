#include <algorithm>
#include <cctype>
#include <regex>

#include "liefam/expr.hpp"

namespace liefam {

namespace {

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t pos;
};

std::vector<Token> tokenize(const std::string& s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      while (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.')) ++i;
      if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < s.size() && (s[j] == '+' || s[j] == '-')) ++j;
        if (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) {
          i = j;
          while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        }
      }
      out.push_back({Tok::Number, s.substr(start, i - start), start});
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
      out.push_back({Tok::Ident, s.substr(start, i - start), start});
      continue;
    }
    Tok k;
    switch (c) {
      case '+': k = Tok::Plus; break;
      case '-': k = Tok::Minus; break;
      case '*': k = Tok::Star; break;
      case '/': k = Tok::Slash; break;
      case '^': k = Tok::Caret; break;
      case '(': k = Tok::LParen; break;
      case ')': k = Tok::RParen; break;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", i);
    }
    out.push_back({k, std::string(1, c), i});
    ++i;
  }
  out.push_back({Tok::End, "", s.size()});
  return out;
}

// Exact decimal -> rational ("1.25e-3" -> 1/800).
Rational parse_number(const std::string& text, std::size_t pos) {
  std::string mant = text, ex;
  if (auto e = text.find_first_of("eE"); e != std::string::npos) {
    mant = text.substr(0, e);
    ex = text.substr(e + 1);
  }
  if (std::count(mant.begin(), mant.end(), '.') > 1 || mant == ".")
    throw ParseError("malformed number '" + text + "'", pos);
  std::string digits;
  long scale = 0;
  if (auto dot = mant.find('.'); dot != std::string::npos) {
    digits = mant.substr(0, dot) + mant.substr(dot + 1);
    scale = -static_cast<long>(mant.size() - dot - 1);
  } else {
    digits = mant;
  }
  if (!ex.empty()) scale += std::stol(ex);
  mpz_class num(digits.empty() ? "0" : digits, 10);
  mpz_class p;
  mpz_ui_pow_ui(p.get_mpz_t(), 10, static_cast<unsigned long>(scale < 0 ? -scale : scale));
  Rational q = scale < 0 ? Rational(num, p) : Rational(num * p);
  q.canonicalize();
  return q;
}

class Parser {
 public:
  Parser(const std::string& src, const ParseContext& ctx)
      : toks_(tokenize(src)), ctx_(ctx), names_(ctx.effective_coord_names()) {}

  Expr parse_all() {
    Expr e = expr();
    if (peek().kind != Tok::End) throw ParseError("unexpected '" + peek().text + "'", peek().pos);
    return e;
  }

 private:
  const Token& peek() const { return toks_[i_]; }
  const Token& next() { return toks_[i_++]; }

  void expect(Tok k, const char* what) {
    if (peek().kind != k) {
      std::string got = peek().kind == Tok::End ? "end of input" : "'" + peek().text + "'";
      throw ParseError(std::string("expected ") + what + ", got " + got, peek().pos);
    }
    ++i_;
  }

  Expr expr() {
    Expr e = term();
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      bool plus = next().kind == Tok::Plus;
      Expr r = term();
      e = plus ? add(e, r) : sub(e, r);
    }
    return e;
  }

  Expr term() {
    Expr e = unary();
    while (peek().kind == Tok::Star || peek().kind == Tok::Slash) {
      bool star = next().kind == Tok::Star;
      Expr r = unary();
      e = star ? mul(e, r) : div(e, r);
    }
    return e;
  }

  Expr unary() {
    if (peek().kind == Tok::Minus) {
      next();
      return neg(unary());
    }
    if (peek().kind == Tok::Plus) {
      next();
      return unary();
    }
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (peek().kind != Tok::Caret) return base;
    next();
    Expr ex = unary();
    return rpow(base, ex);
  }

  Expr primary() {
    const Token& tok = next();
    switch (tok.kind) {
      case Tok::Number:
        return rational(parse_number(tok.text, tok.pos));
      case Tok::LParen: {
        Expr e = expr();
        expect(Tok::RParen, "')'");
        return e;
      }
      case Tok::Ident:
        return identifier(tok);
      case Tok::End:
        throw ParseError("unexpected end of input", tok.pos);
      default:
        throw ParseError("unexpected '" + tok.text + "'", tok.pos);
    }
  }

  Expr identifier(const Token& tok) {
    const std::string& id = tok.text;
    if (peek().kind == Tok::LParen) {
      static const std::vector<std::string> fns = {"exp", "ln", "sin", "cos", "sqrt"};
      if (std::find(fns.begin(), fns.end(), id) == fns.end())
        throw ParseError("unknown function '" + id + "'", tok.pos);
      next();
      Expr a = expr();
      expect(Tok::RParen, "')'");
      if (id == "exp") return exp(a);
      if (id == "ln") return ln(a);
      if (id == "sin") return sin(a);
      if (id == "cos") return cos(a);
      return sqrt(a);
    }
    if (id == "t") return time_var();
    if (std::find(ctx_.params.begin(), ctx_.params.end(), id) != ctx_.params.end()) return param(id);
    if (auto o = opaque_symbol(id, tok.pos)) return symbol(*o);
    if (auto s = state_symbol(id, tok.pos)) return symbol(*s);
    throw UndeclaredSymbolError(id, tok.pos);
  }

  std::optional<Symbol> opaque_symbol(const std::string& id, std::size_t pos) const {
    for (const auto& name : ctx_.opaque) {
      int order = -1;
      if (id == name) {
        order = 0;
      } else if (id.size() > name.size() + 1 && id[0] == 'd' &&
                 id.compare(id.size() - name.size(), name.size(), name) == 0) {
        std::string mid = id.substr(1, id.size() - 1 - name.size());
        if (mid.empty()) {
          order = 1;
        } else if (std::all_of(mid.begin(), mid.end(), ::isdigit)) {
          order = std::stoi(mid);
        }
      } else if (id == "d" + name) {
        order = 1;
      }
      if (order < 0) continue;
      if (order > ctx_.max_opaque_order)
        throw ParseError("derivative order of '" + id + "' exceeds cap " +
                             std::to_string(ctx_.max_opaque_order),
                         pos);
      return Symbol::opaque(name, order);
    }
    return std::nullopt;
  }

  std::optional<Symbol> state_symbol(const std::string& id, std::size_t pos) const {
    static const std::regex generic(R"(x(\d+)_(\d+))");
    std::smatch mt;
    if (std::regex_match(id, mt, generic)) return checked(std::stoi(mt[1]), std::stoi(mt[2]), id, pos);
    for (std::size_t i = 0; i < names_.size(); ++i) {
      const std::string& c = names_[i];
      if (id == c) return checked(0, static_cast<int>(i) + 1, id, pos);
      if (id.size() > c.size() && id.compare(0, c.size(), c) == 0) {
        std::string rest = id.substr(c.size());
        if (std::all_of(rest.begin(), rest.end(), ::isdigit))
          return checked(std::stoi(rest), static_cast<int>(i) + 1, id, pos);
      }
    }
    static const std::regex plain(R"(x(\d+))");
    if (ctx_.n > 1 && std::regex_match(id, mt, plain) &&
        std::find(names_.begin(), names_.end(), "x") == names_.end())
      return checked(0, std::stoi(mt[1]), id, pos);
    return std::nullopt;
  }

  Symbol checked(int copy, int coord, const std::string& id, std::size_t pos) const {
    if (copy < 0 || copy > ctx_.m || coord < 1 || coord > ctx_.n) throw UndeclaredSymbolError(id, pos);
    return Symbol::state(copy, coord);
  }

  std::vector<Token> toks_;
  std::size_t i_ = 0;
  const ParseContext& ctx_;
  std::vector<std::string> names_;
};

}  // namespace

Expr parse(const std::string& source, const ParseContext& ctx) {
  return Parser(source, ctx).parse_all();
}

}  // namespace liefam
