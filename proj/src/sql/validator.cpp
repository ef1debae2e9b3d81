#include "rawq/sql/validator.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "rawq/error.hpp"

namespace rawq::sql {
namespace {

bool types_comparable(ColumnType a, ColumnType b) {
  if (is_numeric(a) && is_numeric(b)) return true;
  return a == b;
}

[[noreturn]] void mismatch(const char* what, ColumnType a, ColumnType b) {
  throw_user(std::string(what) + ": " + std::string(type_name(a)) + " vs " +
             std::string(type_name(b)));
}

class Resolver {
 public:
  Resolver(const Catalog& catalog, ValidatedQuery& vq) : catalog_(catalog), vq_(vq) {}

  void resolve_tables(const std::vector<std::string>& from_tables) {
    for (const auto& name : from_tables) {
      const TableDef& def = catalog_.table(name);
      for (const auto& prev : vq_.tables)
        if (to_lower(prev) == to_lower(def.name))
          throw_user("duplicate table '" + def.name + "' in FROM");
      vq_.tables.push_back(def.name);
    }
  }

  void resolve_column(ColumnRef& ref) {
    if (ref.resolved) return;
    int found_table = -1;
    if (!ref.table.empty()) {
      for (size_t t = 0; t < vq_.tables.size(); ++t)
        if (to_lower(vq_.tables[t]) == to_lower(ref.table)) found_table = static_cast<int>(t);
      if (found_table < 0)
        throw_user("table '" + ref.table + "' is not listed in FROM");
      if (!lookup(found_table, ref))
        throw_user("unknown column '" + ref.column + "' in table '" +
                   vq_.tables[found_table] + "'");
    } else {
      for (size_t t = 0; t < vq_.tables.size(); ++t) {
        ColumnRef probe = ref;
        if (lookup(static_cast<int>(t), probe)) {
          if (found_table >= 0)
            throw_user("ambiguous column '" + ref.column + "' (in '" +
                       vq_.tables[found_table] + "' and '" + vq_.tables[t] + "')");
          found_table = static_cast<int>(t);
        }
      }
      if (found_table < 0) throw_user("unknown column '" + ref.column + "'");
      lookup(found_table, ref);
    }
    ref.table_idx = found_table;
    ref.resolved = true;
    use_column(found_table, ref.ordinal);
  }

  void resolve_value_expr(Expr& e) {
    if (auto* ref = e.get_if<ColumnRef>()) {
      resolve_column(*ref);
      return;
    }
    if (auto* a = e.get_if<Arith>()) {
      resolve_value_expr(*a->lhs);
      resolve_value_expr(*a->rhs);
      ColumnType lt = expr_type(*a->lhs), rt = expr_type(*a->rhs);
      if (!is_numeric(lt) || !is_numeric(rt))
        mismatch("arithmetic requires numeric operands", lt, rt);
      return;
    }
    if (e.is<Cmp>() || e.is<Between>() || e.is<And>())
      throw_user("predicate is not allowed inside a value expression");
    if (e.is<IntervalLit>()) throw_user("unfolded INTERVAL literal");
    // Remaining literal kinds need no resolution.
  }

  void resolve_predicate(Expr& e) {
    if (auto* c = e.get_if<Cmp>()) {
      resolve_value_expr(*c->lhs);
      resolve_value_expr(*c->rhs);
      ColumnType lt = expr_type(*c->lhs), rt = expr_type(*c->rhs);
      if (!types_comparable(lt, rt)) mismatch("type mismatch in comparison", lt, rt);
      return;
    }
    if (auto* b = e.get_if<Between>()) {
      resolve_value_expr(*b->expr);
      resolve_value_expr(*b->lo);
      resolve_value_expr(*b->hi);
      ColumnType et = expr_type(*b->expr);
      ColumnType lo = expr_type(*b->lo), hi = expr_type(*b->hi);
      if (!types_comparable(et, lo)) mismatch("type mismatch in BETWEEN", et, lo);
      if (!types_comparable(et, hi)) mismatch("type mismatch in BETWEEN", et, hi);
      return;
    }
    throw_user("WHERE must be a conjunction of comparisons");
  }

  void use_column(int table, uint32_t ordinal) { used_[table].insert(ordinal); }

  std::vector<std::vector<uint32_t>> projections() const {
    std::vector<std::vector<uint32_t>> out(vq_.tables.size());
    for (const auto& [t, ords] : used_)
      out[t].assign(ords.begin(), ords.end());
    return out;
  }

 private:
  bool lookup(int table, ColumnRef& ref) const {
    auto rc = catalog_.resolve(vq_.tables[table], ref.column);
    if (!rc) return false;
    ref.ordinal = rc->ordinal;
    ref.type = rc->type;
    ref.nullable = rc->nullable;
    return true;
  }

  const Catalog& catalog_;
  ValidatedQuery& vq_;
  std::map<int, std::set<uint32_t>> used_;
};

void collect_tables(const Expr& e, std::set<int>& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ColumnRef>) {
          out.insert(n.table_idx);
        } else if constexpr (std::is_same_v<T, Arith>) {
          collect_tables(*n.lhs, out);
          collect_tables(*n.rhs, out);
        } else if constexpr (std::is_same_v<T, Cmp>) {
          collect_tables(*n.lhs, out);
          collect_tables(*n.rhs, out);
        } else if constexpr (std::is_same_v<T, Between>) {
          collect_tables(*n.expr, out);
          collect_tables(*n.lo, out);
          collect_tables(*n.hi, out);
        } else if constexpr (std::is_same_v<T, And>) {
          for (const auto& t : n.terms) collect_tables(*t, out);
        }
      },
      e.node);
}

// A conjunct spanning two tables is a join only in the tableA.col = tableB.col
// shape; anything else across tables is out of scope.
void classify_conjunct(const Expr& pred, ValidatedQuery& vq) {
  std::set<int> tables;
  collect_tables(pred, tables);
  if (tables.empty())
    throw_user("constant predicates are not supported: " + print(pred));
  if (tables.size() == 1) {
    vq.filters[*tables.begin()].push_back(&pred);
    return;
  }
  if (tables.size() == 2) {
    const auto* c = pred.get_if<Cmp>();
    if (c && c->op == CmpOp::Eq) {
      const auto* l = c->lhs->get_if<ColumnRef>();
      const auto* r = c->rhs->get_if<ColumnRef>();
      if (l && r) {
        // Key type compatibility was already enforced by resolve_predicate.
        JoinPred jp;
        const ColumnRef* a = l;
        const ColumnRef* b = r;
        if (a->table_idx > b->table_idx) std::swap(a, b);
        jp.left_table = a->table_idx;
        jp.left_ord = a->ordinal;
        jp.left_type = a->type;
        jp.left_nullable = a->nullable;
        jp.right_table = b->table_idx;
        jp.right_ord = b->ordinal;
        jp.right_type = b->type;
        jp.right_nullable = b->nullable;
        vq.join_preds.push_back(jp);
        return;
      }
    }
    throw_user("only column = column joins are supported across tables: " +
               print(pred));
  }
  throw_user("predicate references more than two tables: " + print(pred));
}

}  // namespace

ColumnType expr_type(const Expr& e) {
  return std::visit(
      [](const auto& n) -> ColumnType {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ColumnRef>) {
          if (!n.resolved) throw_internal("expr_type on unresolved column");
          return n.type;
        } else if constexpr (std::is_same_v<T, IntLit>) {
          return ColumnType::Int32;
        } else if constexpr (std::is_same_v<T, FloatLit>) {
          return ColumnType::Float64;
        } else if constexpr (std::is_same_v<T, TextLit>) {
          return ColumnType::Text;
        } else if constexpr (std::is_same_v<T, DateLit>) {
          return ColumnType::Date;
        } else if constexpr (std::is_same_v<T, Arith>) {
          ColumnType lt = expr_type(*n.lhs), rt = expr_type(*n.rhs);
          return (lt == ColumnType::Int32 && rt == ColumnType::Int32)
                     ? ColumnType::Int32
                     : ColumnType::Float64;
        } else {
          throw_user("expression has no value type: predicates are not values");
        }
      },
      e.node);
}

ValidatedQuery validate(QueryAst ast, const Catalog& catalog) {
  ValidatedQuery vq;
  Resolver resolver(catalog, vq);
  resolver.resolve_tables(ast.from_tables);

  // SELECT * expands in FROM-table, then ordinal order.
  if (ast.select_star) {
    ast.select_star = false;
    for (size_t t = 0; t < vq.tables.size(); ++t) {
      const TableDef& def = catalog.table(vq.tables[t]);
      for (const auto& col : def.columns) {
        SelectItem item;
        ColumnRef ref;
        if (vq.tables.size() > 1) ref.table = def.name;
        ref.column = col.name;
        item.expr = make_expr(std::move(ref));
        ast.items.push_back(std::move(item));
      }
    }
  }
  if (ast.items.empty()) throw_user("empty select list");

  size_t sums = 0;
  for (auto& item : ast.items) {
    resolver.resolve_value_expr(*item.expr);
    ColumnType t = expr_type(*item.expr);
    if (item.is_sum) {
      ++sums;
      if (!is_numeric(t))
        throw_user("SUM requires a numeric argument, got " +
                   std::string(type_name(t)));
    }
    vq.output_types.push_back(t);
    if (!item.alias.empty()) {
      vq.output_names.push_back(item.alias);
    } else if (const auto* ref = item.expr->get_if<ColumnRef>();
               ref && !item.is_sum) {
      vq.output_names.push_back(ref->column);
    } else if (item.is_sum) {
      vq.output_names.push_back("sum(" + print(*item.expr) + ")");
    } else {
      vq.output_names.push_back(print(*item.expr));
    }
  }
  if (sums > 0 && sums != ast.items.size())
    throw_user("cannot mix aggregated and plain select items without GROUP BY");
  vq.aggregate = sums > 0;

  vq.filters.resize(vq.tables.size());
  if (ast.where) {
    if (auto* a = ast.where->get_if<And>()) {
      for (auto& term : a->terms) resolver.resolve_predicate(*term);
    } else {
      resolver.resolve_predicate(*ast.where);
    }
  }

  vq.projection = resolver.projections();
  vq.ast = std::move(ast);

  // Classification borrows nodes from the final resting place of the AST.
  if (vq.ast.where) {
    if (const auto* a = vq.ast.where->get_if<And>()) {
      for (const auto& term : a->terms) classify_conjunct(*term, vq);
    } else {
      classify_conjunct(*vq.ast.where, vq);
    }
  }
  return vq;
}

}  // namespace rawq::sql
