#include "rawq/sql/ast.hpp"

#include <charconv>

#include "rawq/dates.hpp"
#include "rawq/error.hpp"

namespace rawq::sql {

const char* cmp_op_text(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return "=";
    case CmpOp::Ne: return "<>";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
  }
  throw_internal("bad CmpOp");
}

const char* arith_op_text(ArithOp op) {
  switch (op) {
    case ArithOp::Add: return "+";
    case ArithOp::Sub: return "-";
    case ArithOp::Mul: return "*";
  }
  throw_internal("bad ArithOp");
}

ExprPtr make_expr(Expr::Node node) {
  return std::make_unique<Expr>(Expr{std::move(node)});
}

namespace {

// Shortest round-trip form, so printing stays a fixpoint under reparsing.
std::string float_text(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, res.ptr);
  // Ensure the token still lexes as a float, not an integer.
  if (s.find('.') == std::string::npos && s.find('e') == std::string::npos)
    s += ".0";
  return s;
}

void print_expr(const Expr& e, std::string& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ColumnRef>) {
          if (!n.table.empty()) {
            out += n.table;
            out += '.';
          }
          out += n.column;
        } else if constexpr (std::is_same_v<T, IntLit>) {
          out += std::to_string(n.v);
        } else if constexpr (std::is_same_v<T, FloatLit>) {
          out += float_text(n.v);
        } else if constexpr (std::is_same_v<T, TextLit>) {
          out += '\'';
          out += n.v;
          out += '\'';
        } else if constexpr (std::is_same_v<T, DateLit>) {
          out += "date '";
          out += format_date(n.days);
          out += '\'';
        } else if constexpr (std::is_same_v<T, IntervalLit>) {
          out += "interval '";
          out += std::to_string(n.years);
          out += "' year";
        } else if constexpr (std::is_same_v<T, Arith>) {
          out += '(';
          print_expr(*n.lhs, out);
          out += ' ';
          out += arith_op_text(n.op);
          out += ' ';
          print_expr(*n.rhs, out);
          out += ')';
        } else if constexpr (std::is_same_v<T, Cmp>) {
          print_expr(*n.lhs, out);
          out += ' ';
          out += cmp_op_text(n.op);
          out += ' ';
          print_expr(*n.rhs, out);
        } else if constexpr (std::is_same_v<T, Between>) {
          print_expr(*n.expr, out);
          out += " between ";
          print_expr(*n.lo, out);
          out += " and ";
          print_expr(*n.hi, out);
        } else if constexpr (std::is_same_v<T, And>) {
          bool first = true;
          for (const auto& t : n.terms) {
            if (!first) out += " and ";
            first = false;
            print_expr(*t, out);
          }
        }
      },
      e.node);
}

}  // namespace

std::string print(const Expr& e) {
  std::string out;
  print_expr(e, out);
  return out;
}

std::string print(const QueryAst& q) {
  std::string out = "select ";
  if (q.select_star) {
    out += '*';
  } else {
    bool first = true;
    for (const auto& item : q.items) {
      if (!first) out += ", ";
      first = false;
      if (item.is_sum) {
        out += "sum(";
        print_expr(*item.expr, out);
        out += ')';
      } else {
        print_expr(*item.expr, out);
      }
      if (!item.alias.empty()) {
        out += " as ";
        out += item.alias;
      }
    }
  }
  out += " from ";
  bool first = true;
  for (const auto& t : q.from_tables) {
    if (!first) out += ", ";
    first = false;
    out += t;
  }
  if (q.where) {
    out += " where ";
    print_expr(*q.where, out);
  }
  return out;
}

}  // namespace rawq::sql
