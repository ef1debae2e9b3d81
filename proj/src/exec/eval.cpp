#include "rawq/exec/eval.hpp"

#include "rawq/error.hpp"

namespace rawq::exec {
namespace {

bool is_int_domain(const Value& v) {
  ColumnType t = v.type();
  return t == ColumnType::Int32 || t == ColumnType::Date ||
         t == ColumnType::Bool;
}

int64_t int_domain(const Value& v) {
  switch (v.type()) {
    case ColumnType::Int32: return v.as_i64();
    case ColumnType::Date: return v.as_date();
    case ColumnType::Bool: return v.as_bool() ? 1 : 0;
    default: throw_internal("not an integer-domain value");
  }
}

int cmp3(int64_t a, int64_t b) { return a < b ? -1 : a > b ? 1 : 0; }
int cmp3(double a, double b) { return a < b ? -1 : a > b ? 1 : 0; }

bool apply_cmp(sql::CmpOp op, int c) {
  switch (op) {
    case sql::CmpOp::Eq: return c == 0;
    case sql::CmpOp::Ne: return c != 0;
    case sql::CmpOp::Lt: return c < 0;
    case sql::CmpOp::Le: return c <= 0;
    case sql::CmpOp::Gt: return c > 0;
    case sql::CmpOp::Ge: return c >= 0;
  }
  throw_internal("bad CmpOp");
}

}  // namespace

int compare_values(const Value& a, const Value& b) {
  if (a.type() == ColumnType::Text)
    return a.as_text().compare(b.as_text()) < 0   ? -1
           : a.as_text().compare(b.as_text()) > 0 ? 1
                                                  : 0;
  if (a.type() == ColumnType::Float64 || b.type() == ColumnType::Float64)
    return cmp3(a.numeric(), b.numeric());
  return cmp3(int_domain(a), int_domain(b));
}

Value eval_expr(const sql::Expr& e, const ColumnSource& row) {
  return std::visit(
      [&](const auto& n) -> Value {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, sql::ColumnRef>) {
          return row.column(n.table_idx, n.ordinal);
        } else if constexpr (std::is_same_v<T, sql::IntLit>) {
          return Value::i64(n.v);
        } else if constexpr (std::is_same_v<T, sql::FloatLit>) {
          return Value::f64(n.v);
        } else if constexpr (std::is_same_v<T, sql::TextLit>) {
          return Value::text(n.v);
        } else if constexpr (std::is_same_v<T, sql::DateLit>) {
          return Value::date(n.days);
        } else if constexpr (std::is_same_v<T, sql::Arith>) {
          Value l = eval_expr(*n.lhs, row);
          Value r = eval_expr(*n.rhs, row);
          if (l.is_null() || r.is_null()) return Value::null();
          if (l.type() == ColumnType::Int32 && r.type() == ColumnType::Int32) {
            int64_t a = l.as_i64(), b = r.as_i64();
            switch (n.op) {
              case sql::ArithOp::Add: return Value::i64(a + b);
              case sql::ArithOp::Sub: return Value::i64(a - b);
              case sql::ArithOp::Mul: return Value::i64(a * b);
            }
          }
          double a = l.numeric(), b = r.numeric();
          switch (n.op) {
            case sql::ArithOp::Add: return Value::f64(a + b);
            case sql::ArithOp::Sub: return Value::f64(a - b);
            case sql::ArithOp::Mul: return Value::f64(a * b);
          }
          throw_internal("bad ArithOp");
        } else {
          throw_internal("eval_expr on a predicate node");
        }
      },
      e.node);
}

bool eval_pred(const sql::Expr& e, const ColumnSource& row) {
  if (const auto* c = e.get_if<sql::Cmp>()) {
    Value l = eval_expr(*c->lhs, row);
    Value r = eval_expr(*c->rhs, row);
    if (l.is_null() || r.is_null()) return false;
    return apply_cmp(c->op, compare_values(l, r));
  }
  if (const auto* b = e.get_if<sql::Between>()) {
    Value v = eval_expr(*b->expr, row);
    Value lo = eval_expr(*b->lo, row);
    Value hi = eval_expr(*b->hi, row);
    if (v.is_null() || lo.is_null() || hi.is_null()) return false;
    return compare_values(v, lo) >= 0 && compare_values(v, hi) <= 0;
  }
  if (const auto* a = e.get_if<sql::And>()) {
    for (const auto& t : a->terms)
      if (!eval_pred(*t, row)) return false;
    return true;
  }
  throw_internal("eval_pred on a value node");
}

}  // namespace rawq::exec
