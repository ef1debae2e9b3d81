#include "rawq/sql/parser.hpp"

#include <cctype>
#include <charconv>
#include <optional>

#include "rawq/dates.hpp"
#include "rawq/error.hpp"

namespace rawq::sql {
namespace {

enum class Tok {
  End,
  Ident,
  Number,
  String,
  Comma,
  Dot,
  LParen,
  RParen,
  Star,
  Plus,
  Minus,
  Eq,
  Ne,
  Lt,
  Le,
  Gt,
  Ge,
  Semi,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;  // ident spelling, number digits, or string body
  int line = 1;
  int col = 1;
};

[[noreturn]] void fail(int line, int col, const std::string& msg) {
  throw_user("syntax error at line " + std::to_string(line) + " column " +
             std::to_string(col) + ": " + msg);
}

[[noreturn]] void fail(const Token& t, const std::string& msg) {
  fail(t.line, t.col, msg);
}

std::string upper(std::string_view s) {
  std::string r(s);
  for (char& c : r) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return r;
}

std::vector<Token> lex(std::string_view text) {
  std::vector<Token> out;
  int line = 1, col = 1;
  size_t i = 0;
  auto advance = [&](size_t n) {
    for (size_t k = 0; k < n; ++k) {
      if (text[i + k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    i += n;
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.col = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i + 1;
      while (j < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_'))
        ++j;
      t.kind = Tok::Ident;
      t.text.assign(text.substr(i, j - i));
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      if (j < text.size() && text[j] == '.') {
        ++j;
        if (j >= text.size() || !std::isdigit(static_cast<unsigned char>(text[j])))
          fail(line, col, "malformed number");
        while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      }
      // Exponent suffix, accepted so printed floats reparse.
      if (j < text.size() && (text[j] == 'e' || text[j] == 'E')) {
        size_t k = j + 1;
        if (k < text.size() && (text[k] == '+' || text[k] == '-')) ++k;
        if (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]))) {
          while (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]))) ++k;
          j = k;
        }
      }
      t.kind = Tok::Number;
      t.text.assign(text.substr(i, j - i));
      advance(j - i);
    } else if (c == '\'') {
      size_t j = i + 1;
      while (j < text.size() && text[j] != '\'' && text[j] != '\n') ++j;
      if (j >= text.size() || text[j] != '\'')
        fail(line, col, "unterminated string literal");
      t.kind = Tok::String;
      t.text.assign(text.substr(i + 1, j - i - 1));
      advance(j - i + 1);
    } else {
      switch (c) {
        case ',': t.kind = Tok::Comma; advance(1); break;
        case '.': t.kind = Tok::Dot; advance(1); break;
        case '(': t.kind = Tok::LParen; advance(1); break;
        case ')': t.kind = Tok::RParen; advance(1); break;
        case '*': t.kind = Tok::Star; advance(1); break;
        case '+': t.kind = Tok::Plus; advance(1); break;
        case '-': t.kind = Tok::Minus; advance(1); break;
        case ';': t.kind = Tok::Semi; advance(1); break;
        case '=': t.kind = Tok::Eq; advance(1); break;
        case '<':
          if (i + 1 < text.size() && text[i + 1] == '=') {
            t.kind = Tok::Le;
            advance(2);
          } else if (i + 1 < text.size() && text[i + 1] == '>') {
            t.kind = Tok::Ne;
            advance(2);
          } else {
            t.kind = Tok::Lt;
            advance(1);
          }
          break;
        case '>':
          if (i + 1 < text.size() && text[i + 1] == '=') {
            t.kind = Tok::Ge;
            advance(2);
          } else {
            t.kind = Tok::Gt;
            advance(1);
          }
          break;
        case '!':
          if (i + 1 < text.size() && text[i + 1] == '=') {
            t.kind = Tok::Ne;
            advance(2);
            break;
          }
          [[fallthrough]];
        default:
          fail(line, col, std::string("unexpected character '") + c + "'");
      }
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.kind = Tok::End;
  end.line = line;
  end.col = col;
  out.push_back(std::move(end));
  return out;
}

bool is_literal(const Expr& e) {
  return e.is<IntLit>() || e.is<FloatLit>() || e.is<TextLit>() ||
         e.is<DateLit>() || e.is<IntervalLit>();
}

class Parser {
 public:
  explicit Parser(std::string_view text) : toks_(lex(text)) {}

  QueryAst parse_query() {
    expect_keyword("SELECT");
    QueryAst q;
    if (peek().kind == Tok::Star) {
      next();
      q.select_star = true;
    } else {
      q.items.push_back(parse_select_item());
      while (peek().kind == Tok::Comma) {
        next();
        q.items.push_back(parse_select_item());
      }
    }
    expect_keyword("FROM");
    q.from_tables.push_back(expect_ident("table name"));
    while (peek().kind == Tok::Comma) {
      next();
      q.from_tables.push_back(expect_ident("table name"));
    }
    if (is_keyword(peek(), "WHERE")) {
      next();
      std::vector<ExprPtr> preds;
      preds.push_back(parse_pred());
      while (is_keyword(peek(), "AND")) {
        next();
        preds.push_back(parse_pred());
      }
      if (preds.size() == 1) {
        q.where = std::move(preds.front());
      } else {
        q.where = make_expr(And{std::move(preds)});
      }
    }
    if (peek().kind == Tok::Semi) next();
    if (peek().kind != Tok::End) fail(peek(), "trailing input after statement");
    return q;
  }

 private:
  const Token& peek(size_t ahead = 0) const {
    size_t i = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[i];
  }
  const Token& next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }

  static bool is_keyword(const Token& t, std::string_view kw) {
    return t.kind == Tok::Ident && upper(t.text) == kw;
  }
  void expect_keyword(std::string_view kw) {
    if (!is_keyword(peek(), kw))
      fail(peek(), "expected " + std::string(kw) + ", got '" + token_text(peek()) + "'");
    next();
  }
  std::string expect_ident(const char* what) {
    const Token& t = peek();
    if (t.kind != Tok::Ident) fail(t, std::string("expected ") + what);
    if (is_reserved(t.text)) fail(t, "'" + t.text + "' is a reserved word");
    next();
    return t.text;
  }
  void expect(Tok k, const char* what) {
    if (peek().kind != k)
      fail(peek(), std::string("expected ") + what + ", got '" + token_text(peek()) + "'");
    next();
  }

  static bool is_reserved(const std::string& s) {
    std::string u = upper(s);
    return u == "SELECT" || u == "FROM" || u == "WHERE" || u == "AND" ||
           u == "BETWEEN" || u == "AS" || u == "DATE" || u == "INTERVAL" ||
           u == "YEAR" || u == "SUM";
  }

  static std::string token_text(const Token& t) {
    switch (t.kind) {
      case Tok::End: return "<end of input>";
      case Tok::Ident:
      case Tok::Number: return t.text;
      case Tok::String: return "'" + t.text + "'";
      case Tok::Comma: return ",";
      case Tok::Dot: return ".";
      case Tok::LParen: return "(";
      case Tok::RParen: return ")";
      case Tok::Star: return "*";
      case Tok::Plus: return "+";
      case Tok::Minus: return "-";
      case Tok::Eq: return "=";
      case Tok::Ne: return "<>";
      case Tok::Lt: return "<";
      case Tok::Le: return "<=";
      case Tok::Gt: return ">";
      case Tok::Ge: return ">=";
      case Tok::Semi: return ";";
    }
    return "?";
  }

  SelectItem parse_select_item() {
    SelectItem item;
    const Token& t = peek();
    if (t.kind == Tok::Ident && peek(1).kind == Tok::LParen) {
      std::string fn = upper(t.text);
      if (fn == "SUM") {
        next();
        next();
        item.expr = parse_operand();
        item.is_sum = true;
        expect(Tok::RParen, ")");
      } else if (fn == "COUNT" || fn == "AVG" || fn == "MIN" || fn == "MAX") {
        fail(t, "unsupported aggregate '" + t.text + "', only SUM is available");
      } else {
        fail(t, "unknown function '" + t.text + "'");
      }
    } else {
      item.expr = parse_operand();
    }
    if (is_keyword(peek(), "AS")) {
      next();
      item.alias = expect_ident("alias");
    }
    return item;
  }

  ExprPtr parse_pred() {
    const Token& start = peek();
    ExprPtr lhs = parse_operand();
    const Token& t = peek();
    if (is_keyword(t, "BETWEEN")) {
      next();
      Between b;
      b.expr = std::move(lhs);
      b.lo = parse_operand();
      expect_keyword("AND");
      b.hi = parse_operand();
      return make_expr(std::move(b));
    }
    std::optional<CmpOp> op;
    switch (t.kind) {
      case Tok::Eq: op = CmpOp::Eq; break;
      case Tok::Ne: op = CmpOp::Ne; break;
      case Tok::Lt: op = CmpOp::Lt; break;
      case Tok::Le: op = CmpOp::Le; break;
      case Tok::Gt: op = CmpOp::Gt; break;
      case Tok::Ge: op = CmpOp::Ge; break;
      default: fail(start, "expected a comparison or BETWEEN predicate");
    }
    next();
    Cmp c;
    c.op = *op;
    c.lhs = std::move(lhs);
    c.rhs = parse_operand();
    return make_expr(std::move(c));
  }

  // A value expression in operand position; intervals fold into date
  // arithmetic or nothing, so one surviving here is dangling.
  ExprPtr parse_operand() {
    const Token& at = peek();
    ExprPtr e = parse_vexpr();
    if (e->is<IntervalLit>())
      fail(at, "INTERVAL is only valid added to a DATE literal");
    return e;
  }

  ExprPtr parse_vexpr() {
    ExprPtr lhs = parse_term();
    for (;;) {
      const Token& t = peek();
      ArithOp op;
      if (t.kind == Tok::Plus) {
        op = ArithOp::Add;
      } else if (t.kind == Tok::Minus) {
        op = ArithOp::Sub;
      } else {
        return lhs;
      }
      next();
      ExprPtr rhs = parse_term();
      lhs = fold(op, std::move(lhs), std::move(rhs), t);
    }
  }

  ExprPtr parse_term() {
    ExprPtr lhs = parse_factor();
    while (peek().kind == Tok::Star) {
      const Token t = peek();
      next();
      ExprPtr rhs = parse_factor();
      lhs = fold(ArithOp::Mul, std::move(lhs), std::move(rhs), t);
    }
    return lhs;
  }

  ExprPtr parse_factor() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Number: {
        next();
        return number_literal(t, false);
      }
      case Tok::Minus: {
        next();
        const Token& n = peek();
        if (n.kind != Tok::Number) fail(n, "expected a number after unary '-'");
        next();
        return number_literal(n, true);
      }
      case Tok::String: {
        next();
        return make_expr(TextLit{t.text});
      }
      case Tok::LParen: {
        next();
        ExprPtr e = parse_vexpr();
        expect(Tok::RParen, ")");
        return e;
      }
      case Tok::Ident: {
        std::string kw = upper(t.text);
        if (kw == "DATE") return parse_date_literal();
        if (kw == "INTERVAL") return parse_interval_literal();
        if ((kw == "SUM" || kw == "COUNT" || kw == "AVG" || kw == "MIN" ||
             kw == "MAX") &&
            peek(1).kind == Tok::LParen)
          fail(t, "aggregates are only allowed at the top level of the select list");
        if (is_reserved(t.text)) fail(t, "'" + t.text + "' is a reserved word");
        next();
        ColumnRef ref;
        if (peek().kind == Tok::Dot) {
          next();
          ref.table = t.text;
          ref.column = expect_ident("column name");
        } else {
          ref.column = t.text;
        }
        return make_expr(std::move(ref));
      }
      default:
        fail(t, "expected an expression, got '" + token_text(t) + "'");
    }
  }

  ExprPtr number_literal(const Token& t, bool negative) {
    if (t.text.find('.') != std::string::npos ||
        t.text.find('e') != std::string::npos ||
        t.text.find('E') != std::string::npos) {
      double v = 0;
      auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
      if (res.ec != std::errc{} || res.ptr != t.text.data() + t.text.size())
        fail(t, "malformed number '" + t.text + "'");
      return make_expr(FloatLit{negative ? -v : v});
    }
    int64_t v = 0;
    auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (res.ec != std::errc{}) fail(t, "integer literal out of range");
    return make_expr(IntLit{negative ? -v : v});
  }

  ExprPtr parse_date_literal() {
    const Token& kw = peek();
    next();
    const Token& s = peek();
    if (s.kind != Tok::String) fail(kw, "DATE must be followed by a quoted date");
    next();
    auto days = parse_date(s.text);
    if (!days) fail(s, "invalid date literal '" + s.text + "', expected YYYY-MM-DD");
    return make_expr(DateLit{*days});
  }

  ExprPtr parse_interval_literal() {
    const Token& kw = peek();
    next();
    const Token& s = peek();
    if (s.kind != Tok::String) fail(kw, "INTERVAL must be followed by a quoted count");
    next();
    int32_t years = 0;
    auto res = std::from_chars(s.text.data(), s.text.data() + s.text.size(), years);
    if (res.ec != std::errc{} || res.ptr != s.text.data() + s.text.size() ||
        s.text.empty())
      fail(s, "invalid interval count '" + s.text + "'");
    if (!is_keyword(peek(), "YEAR"))
      fail(peek(), "only YEAR intervals are supported");
    next();
    return make_expr(IntervalLit{years});
  }

  // Literal arithmetic folds here, so downstream passes never see it.
  ExprPtr fold(ArithOp op, ExprPtr l, ExprPtr r, const Token& at) {
    const auto* li = l->get_if<IntLit>();
    const auto* lf = l->get_if<FloatLit>();
    const auto* ri = r->get_if<IntLit>();
    const auto* rf = r->get_if<FloatLit>();
    const auto* ld = l->get_if<DateLit>();
    const auto* rv = r->get_if<IntervalLit>();

    if (ld && rv) {
      if (op != ArithOp::Add)
        fail(at, "only '+' combines a date with an interval");
      return make_expr(DateLit{add_years(ld->days, rv->years)});
    }
    if (l->is<IntervalLit>() || r->is<IntervalLit>())
      fail(at, "INTERVAL is only valid added to a DATE literal");

    if (li && ri) {
      int64_t v = 0;
      bool overflow = false;
      switch (op) {
        case ArithOp::Add: overflow = __builtin_add_overflow(li->v, ri->v, &v); break;
        case ArithOp::Sub: overflow = __builtin_sub_overflow(li->v, ri->v, &v); break;
        case ArithOp::Mul: overflow = __builtin_mul_overflow(li->v, ri->v, &v); break;
      }
      if (overflow) fail(at, "integer literal arithmetic overflows");
      return make_expr(IntLit{v});
    }
    if ((li || lf) && (ri || rf)) {
      double a = li ? static_cast<double>(li->v) : lf->v;
      double b = ri ? static_cast<double>(ri->v) : rf->v;
      double v = 0;
      switch (op) {
        case ArithOp::Add: v = a + b; break;
        case ArithOp::Sub: v = a - b; break;
        case ArithOp::Mul: v = a * b; break;
      }
      return make_expr(FloatLit{v});
    }
    if (is_literal(*l) && is_literal(*r))
      fail(at, "arithmetic requires numeric operands");

    Arith node;
    node.op = op;
    node.lhs = std::move(l);
    node.rhs = std::move(r);
    return make_expr(std::move(node));
  }

  std::vector<Token> toks_;
  size_t pos_ = 0;
};

}  // namespace

QueryAst parse(std::string_view text) { return Parser(text).parse_query(); }

}  // namespace rawq::sql
