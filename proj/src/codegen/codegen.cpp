#include "rawq/codegen/codegen.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "rawq/codegen/template_engine.hpp"
#include "rawq/error.hpp"
#include "rawq/hash.hpp"
#include "rawq/limits.hpp"
#include "rawq/sql/validator.hpp"

namespace rawq::codegen {
namespace {

constexpr std::string_view kGeneratorVersion = "rawq-kernel-v1";

std::string sp(int n) { return std::string(static_cast<size_t>(n), ' '); }

std::string hex16(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Column names feed marker comments; anything outside the identifier set
// would break the comment or the template syntax.
std::string marker_name(std::string_view name) {
  std::string out;
  for (char c : name)
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '_') ? c : '_';
  return out;
}

std::string int_literal(int64_t v) {
  if (v == INT64_MIN) return "(-9223372036854775807ll - 1)";
  std::string s = std::to_string(v) + "ll";
  return v < 0 ? "(" + s + ")" : s;
}

std::string float_literal(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  if (s.find_first_of(".eEni") == std::string::npos) s += ".0";
  return "(" + s + ")";
}

std::string cstring_literal(std::string_view s) {
  std::string out = "\"";
  for (unsigned char c : s) {
    if (c == '"') {
      out += "\\\"";
    } else if (c == '\\') {
      out += "\\\\";
    } else if (c >= 0x20 && c < 0x7f) {
      out += static_cast<char>(c);
    } else {
      char buf[8];
      std::snprintf(buf, sizeof buf, "\\%03o", c);
      out += buf;
    }
  }
  return out + "\"";
}

std::string char_literal(char c) {
  const auto u = static_cast<unsigned char>(c);
  if (c == '\'') return "'\\''";
  if (c == '\\') return "'\\\\'";
  if (u >= 0x20 && u < 0x7f) return std::string("'") + c + "'";
  char buf[8];
  std::snprintf(buf, sizeof buf, "'\\%03o'", u);
  return buf;
}

const char* ctype_name(ColumnType t) {
  switch (t) {
    case ColumnType::Int32: return "int32_t";
    case ColumnType::Float64: return "double";
    case ColumnType::Date: return "int32_t";
    case ColumnType::Bool: return "uint8_t";
    case ColumnType::Text: break;
  }
  throw_internal("ctype_name on TEXT");
}

const char* parse_fn(ColumnType t) {
  switch (t) {
    case ColumnType::Int32: return "rq_parse_i32";
    case ColumnType::Float64: return "rq_parse_f64";
    case ColumnType::Date: return "rq_parse_date";
    case ColumnType::Bool: return "rq_parse_bool";
    case ColumnType::Text: break;
  }
  throw_internal("parse_fn on TEXT");
}

const char* zero_of(ColumnType t) {
  return t == ColumnType::Float64 ? "0.0" : "0";
}

// TEXT values are never null: an empty field is a valid empty string, so
// only non-TEXT nullable columns carry a null flag.
bool has_null_flag(const ColumnDef& col) {
  return col.nullable && col.type != ColumnType::Text;
}

uint32_t min_ordinal(const sql::Expr& e) {
  if (const auto* c = e.get_if<sql::ColumnRef>()) return c->ordinal;
  if (const auto* a = e.get_if<sql::Arith>())
    return std::min(min_ordinal(*a->lhs), min_ordinal(*a->rhs));
  if (const auto* c = e.get_if<sql::Cmp>())
    return std::min(min_ordinal(*c->lhs), min_ordinal(*c->rhs));
  if (const auto* b = e.get_if<sql::Between>())
    return std::min({min_ordinal(*b->expr), min_ordinal(*b->lo),
                     min_ordinal(*b->hi)});
  if (const auto* a = e.get_if<sql::And>()) {
    uint32_t m = UINT32_MAX;
    for (const auto& t : a->terms) m = std::min(m, min_ordinal(*t));
    return m;
  }
  return UINT32_MAX;
}

int op_rank(const sql::Expr& e) {
  if (const auto* c = e.get_if<sql::Cmp>()) return static_cast<int>(c->op);
  if (e.is<sql::Between>()) return 6;
  return 7;
}

// Canonical conjunct order: (lowest referenced ordinal, operator, printed
// text). The same order drives both the signature and the emission, so
// trivially reordered WHERE clauses produce byte-identical kernels.
std::vector<const sql::Expr*> normalized_filters(
    const std::vector<const sql::Expr*>& in) {
  struct Key {
    uint32_t ord;
    int rank;
    std::string text;
    const sql::Expr* e;
  };
  std::vector<Key> keys;
  keys.reserve(in.size());
  for (const sql::Expr* e : in)
    keys.push_back({min_ordinal(*e), op_rank(*e), sql::print(*e), e});
  std::stable_sort(keys.begin(), keys.end(), [](const Key& a, const Key& b) {
    if (a.ord != b.ord) return a.ord < b.ord;
    if (a.rank != b.rank) return a.rank < b.rank;
    return a.text < b.text;
  });
  std::vector<const sql::Expr*> out;
  out.reserve(keys.size());
  for (const Key& k : keys) out.push_back(k.e);
  return out;
}

void serialize_tree(const opt::JoinTreeNode& n, const sql::ValidatedQuery& vq,
                    std::string& out) {
  if (n.is_leaf()) {
    out += 'L';
    out += std::to_string(n.leaf);
    return;
  }
  out += '(';
  serialize_tree(*n.build, vq, out);
  out += ")(";
  serialize_tree(*n.probe, vq, out);
  out += ")[";
  for (int ei : n.edges) {
    const sql::JoinPred& p = vq.join_preds[static_cast<size_t>(ei)];
    out += std::to_string(p.left_table) + "." + std::to_string(p.left_ord) +
           "=" + std::to_string(p.right_table) + "." +
           std::to_string(p.right_ord) + ";";
  }
  out += ']';
}

std::string canonical_text(const opt::PhysicalPlan& plan,
                           const Catalog& catalog,
                           const SpecializationFlags& flags) {
  const sql::ValidatedQuery& vq = plan.vq;
  std::string s(kGeneratorVersion);
  s += '|';
  s += flags.fusion ? 'F' : 'f';
  s += flags.elide_null_checks ? 'E' : 'e';
  s += flags.inline_constants ? 'I' : 'i';
  s += flags.unroll_columns ? 'U' : 'u';
  s += 'b';
  s += std::to_string(flags.batch_rows);
  s += '|';
  for (const std::string& name : vq.tables) {
    s += hex16(catalog.schema_hash(name));
    s += ',';
  }
  s += '|';
  s += vq.aggregate ? 'A' : 'p';
  s += '|';
  for (const sql::SelectItem& it : vq.ast.items) {
    s += it.is_sum ? "S:" : "V:";
    s += sql::print(*it.expr);
    s += ';';
  }
  s += '|';
  for (size_t t = 0; t < vq.filters.size(); ++t) {
    for (const sql::Expr* f : normalized_filters(vq.filters[t])) {
      s += 'T';
      s += std::to_string(t);
      s += ':';
      s += sql::print(*f);
      s += ';';
    }
  }
  s += '|';
  serialize_tree(*plan.tree.root, vq, s);
  return s;
}

// Adds `extra` spaces of indentation to every non-empty line.
std::string reindent(const std::string& s, int extra) {
  const std::string pad = sp(extra);
  std::string out;
  out.reserve(s.size());
  size_t i = 0;
  while (i < s.size()) {
    size_t e = s.find('\n', i);
    if (e == std::string::npos) e = s.size() - 1;
    if (s[i] != '\n') out += pad;
    out.append(s, i, e - i + 1);
    i = e + 1;
  }
  return out;
}

// A value expression in the emitted language. Non-TEXT values live in `val`
// (`wide` marks an expression already in the 64-bit integer domain); TEXT
// values are a (ptr, len) pair, with `val` optionally naming a whole
// std::string. `null` is a boolean expression, empty when never null.
struct ValRef {
  std::string val;
  std::string ptr;
  std::string len;
  std::string null;
  ColumnType type = ColumnType::Int32;
  bool wide = false;
};

struct PredRef {
  std::string cond;   // parenthesized boolean expression
  std::string guard;  // null guard; empty when no operand is nullable
};

std::string as_i64(const ValRef& v) {
  if (v.wide) return v.val;
  return "static_cast<int64_t>(" + v.val + ")";
}

std::string as_f64(const ValRef& v) {
  return "static_cast<double>(" + v.val + ")";
}

std::string or_nulls(std::initializer_list<const ValRef*> vs) {
  std::string g;
  for (const ValRef* v : vs) {
    if (v->null.empty()) continue;
    if (!g.empty()) g += " || ";
    g += v->null;
  }
  return g.empty() ? g : "(" + g + ")";
}

std::string or_guards(const std::string& a, const std::string& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  return "(" + a + " || " + b + ")";
}

class Generator {
 public:
  Generator(const opt::PhysicalPlan& plan, const Catalog& catalog,
            const SpecializationFlags& flags)
      : plan_(plan), vq_(plan.vq), cat_(catalog), flags_(flags) {}

  GeneratedSource run();

 private:
  // Everything emission needs to know about the pipeline being generated.
  struct Ctx {
    const Pipeline* pipe = nullptr;
    int t = 0;            // scanned table index
    std::string skip;     // row-skip label
    bool generic = false; // scan values live in an RqVal array, not locals
    std::string fv;       // that array's name
  };

  enum class FieldSrc { Slices, PosMap };

  static std::string vname(int t, uint32_t o) {
    return "rq_v" + std::to_string(t) + "_" + std::to_string(o);
  }
  static std::string nname(int t, uint32_t o) {
    return "rq_n" + std::to_string(t) + "_" + std::to_string(o);
  }
  static std::string stage_name(int t, uint32_t o) {
    return "st_v" + std::to_string(t) + "_" + std::to_string(o);
  }
  static std::string member_name(int t, uint32_t o) {
    return "c" + std::to_string(t) + "_" + std::to_string(o);
  }

  std::string tmpl(const std::string& name) const {
    auto it = tmpl_cache_.find(name);
    if (it == tmpl_cache_.end())
      it = tmpl_cache_.emplace(name, load_template(name)).first;
    return it->second;
  }

  size_t k_of(int t, uint32_t o) const {
    const auto& proj = vq_.projection[static_cast<size_t>(t)];
    const auto it = std::lower_bound(proj.begin(), proj.end(), o);
    if (it == proj.end() || *it != o) throw_internal("column not projected");
    return static_cast<size_t>(it - proj.begin());
  }

  ValRef access(const Ctx& ctx, int t, uint32_t o) const;
  ValRef literal_int(int64_t v);
  ValRef literal_float(double v);
  ValRef literal_text(const std::string& v);
  ValRef literal_date(int32_t days);
  ValRef translate(const Ctx& ctx, const sql::Expr& e);
  PredRef predicate(const Ctx& ctx, const sql::Expr& e);
  std::string compare(const ValRef& l, const ValRef& r, sql::CmpOp op) const;

  std::string prelude(const TableDef& def, bool has_cols) const;
  std::string local_decls(int t) const;
  std::string tokenize_unrolled(const TableDef& def, int t,
                                const std::function<std::string(uint32_t)>& work);
  std::string tokenize_generic(const TableDef& def, int t);
  std::string parse_into_local(const ColumnDef& col, int t,
                               const std::string& ptr, const std::string& len,
                               const std::string& row) const;
  std::string generic_parse(int t, FieldSrc src, const std::string& row) const;
  std::string posmap_record_generic(int t) const;

  struct KeyPart {
    ValRef v;
    int enc;  // 0 int64, 1 double, 2 text; must match both join sides
  };
  KeyPart key_part(const Ctx& ctx, const opt::JoinTreeNode& jn, int ei,
                   bool build_side) const;
  std::string key_append(int ind, const std::string& key,
                         const KeyPart& kp) const;

  std::string tup_init(const Ctx& ctx, int j) const;
  std::string emit_tail(const Ctx& ctx, int ind0);
  std::string emit_final_sink(const Ctx& ctx, int ind);
  std::string emit_build_sink(const Ctx& ctx, int ind);
  std::string emit_pipeline(size_t pi);

  std::string emit_structs() const;
  std::string emit_state_members() const;
  std::string emit_init() const;
  std::string emit_sizes() const;
  std::string emit_fetch() const;

  const opt::PhysicalPlan& plan_;
  const sql::ValidatedQuery& vq_;
  const Catalog& cat_;
  SpecializationFlags flags_;

  std::vector<const TableDef*> defs_;
  std::vector<std::vector<const sql::Expr*>> filters_;
  std::vector<Pipeline> pipes_;
  std::map<const opt::JoinTreeNode*, int> node_id_;
  std::vector<std::vector<std::pair<int, uint32_t>>> slots_;  // per hash table
  mutable std::map<std::string, std::string> tmpl_cache_;
  KernelParams params_;
};

ValRef Generator::access(const Ctx& ctx, int t, uint32_t o) const {
  const ColumnDef& col = defs_[static_cast<size_t>(t)]->columns[o];
  ValRef v;
  v.type = col.type;
  if (t == ctx.t) {
    if (!ctx.generic) {
      if (col.type == ColumnType::Text) {
        v.ptr = vname(t, o) + "_p";
        v.len = vname(t, o) + "_n";
      } else {
        v.val = vname(t, o);
      }
      if (has_null_flag(col)) v.null = nname(t, o);
      return v;
    }
    const std::string slot = ctx.fv + "[" + std::to_string(k_of(t, o)) + "]";
    if (col.type == ColumnType::Text) {
      v.ptr = slot + ".p";
      v.len = slot + ".n";
    } else if (col.type == ColumnType::Float64) {
      v.val = slot + ".d";
    } else {
      v.val = slot + ".i";
      v.wide = true;
    }
    if (has_null_flag(col)) v.null = slot + ".null";
    return v;
  }
  for (const opt::JoinTreeNode* jn : ctx.pipe->probes) {
    if (!((jn->build->mask >> t) & 1u)) continue;
    const std::string m = "rq_m" + std::to_string(node_id_.at(jn));
    const std::string c = m + "." + member_name(t, o);
    if (col.type == ColumnType::Text) {
      v.val = c;
      v.ptr = c + ".data()";
      v.len = c + ".size()";
    } else {
      v.val = c;
    }
    if (has_null_flag(col)) v.null = c + "_null";
    return v;
  }
  throw_internal("column's table is not reachable in this pipeline");
}

ValRef Generator::literal_int(int64_t v) {
  ValRef r;
  r.type = ColumnType::Int32;
  r.wide = true;
  if (flags_.inline_constants) {
    r.val = int_literal(v);
  } else {
    r.val = "s.p_i" + std::to_string(params_.ints.size());
    params_.ints.push_back(v);
  }
  return r;
}

ValRef Generator::literal_float(double v) {
  ValRef r;
  r.type = ColumnType::Float64;
  if (flags_.inline_constants) {
    r.val = float_literal(v);
  } else {
    r.val = "s.p_f" + std::to_string(params_.floats.size());
    params_.floats.push_back(v);
  }
  return r;
}

ValRef Generator::literal_text(const std::string& v) {
  ValRef r;
  r.type = ColumnType::Text;
  if (flags_.inline_constants) {
    r.ptr = cstring_literal(v);
    r.len = std::to_string(v.size()) + "ull";
  } else {
    const std::string name = "s.p_s" + std::to_string(params_.texts.size());
    r.val = name;
    r.ptr = name + ".data()";
    r.len = name + ".size()";
    params_.texts.push_back(v);
  }
  return r;
}

ValRef Generator::literal_date(int32_t days) {
  ValRef r;
  r.type = ColumnType::Date;
  if (flags_.inline_constants) {
    r.val = days < 0 ? "(" + std::to_string(days) + ")" : std::to_string(days);
  } else {
    r.val = "s.p_i" + std::to_string(params_.ints.size());
    r.wide = true;
    params_.ints.push_back(days);
  }
  return r;
}

ValRef Generator::translate(const Ctx& ctx, const sql::Expr& e) {
  if (const auto* c = e.get_if<sql::ColumnRef>())
    return access(ctx, c->table_idx, c->ordinal);
  if (const auto* l = e.get_if<sql::IntLit>()) return literal_int(l->v);
  if (const auto* l = e.get_if<sql::FloatLit>()) return literal_float(l->v);
  if (const auto* l = e.get_if<sql::TextLit>()) return literal_text(l->v);
  if (const auto* l = e.get_if<sql::DateLit>()) return literal_date(l->days);
  if (const auto* a = e.get_if<sql::Arith>()) {
    ValRef lhs = translate(ctx, *a->lhs);
    ValRef rhs = translate(ctx, *a->rhs);
    const char* op = a->op == sql::ArithOp::Add   ? " + "
                     : a->op == sql::ArithOp::Sub ? " - "
                                                  : " * ";
    ValRef r;
    r.null = or_nulls({&lhs, &rhs});
    // Two INT32 operands stay in the 64-bit integer domain; anything else
    // is computed in double, matching the generic evaluator.
    if (sql::expr_type(*a->lhs) == ColumnType::Int32 &&
        sql::expr_type(*a->rhs) == ColumnType::Int32) {
      r.val = "(" + as_i64(lhs) + op + as_i64(rhs) + ")";
      r.type = ColumnType::Int32;
      r.wide = true;
    } else {
      r.val = "(" + as_f64(lhs) + op + as_f64(rhs) + ")";
      r.type = ColumnType::Float64;
    }
    return r;
  }
  throw_internal("translate on a predicate node");
}

std::string Generator::compare(const ValRef& l, const ValRef& r,
                               sql::CmpOp op) const {
  static const char* const kOps[] = {" == ", " != ", " < ",
                                     " <= ", " > ",  " >= "};
  const char* c = kOps[static_cast<int>(op)];
  if (l.type == ColumnType::Text || r.type == ColumnType::Text)
    return "(rq_cmp_text(" + l.ptr + ", " + l.len + ", " + r.ptr + ", " +
           r.len + ")" + c + "0)";
  if (l.type == ColumnType::Float64 || r.type == ColumnType::Float64)
    return "(" + as_f64(l) + c + as_f64(r) + ")";
  return "(" + as_i64(l) + c + as_i64(r) + ")";
}

PredRef Generator::predicate(const Ctx& ctx, const sql::Expr& e) {
  if (const auto* c = e.get_if<sql::Cmp>()) {
    ValRef l = translate(ctx, *c->lhs);
    ValRef r = translate(ctx, *c->rhs);
    return {compare(l, r, c->op), or_nulls({&l, &r})};
  }
  if (const auto* b = e.get_if<sql::Between>()) {
    ValRef v = translate(ctx, *b->expr);
    ValRef lo = translate(ctx, *b->lo);
    ValRef hi = translate(ctx, *b->hi);
    std::string cond = "(" + compare(v, lo, sql::CmpOp::Ge) + " && " +
                       compare(v, hi, sql::CmpOp::Le) + ")";
    return {cond, or_nulls({&v, &lo, &hi})};
  }
  if (const auto* a = e.get_if<sql::And>()) {
    // A null operand in any term makes that term false, which makes the
    // whole conjunction false, so one merged guard can skip the row early.
    std::string cond, guard;
    for (const auto& term : a->terms) {
      PredRef p = predicate(ctx, *term);
      if (!cond.empty()) cond += " && ";
      cond += p.cond;
      guard = or_guards(guard, p.guard);
    }
    return {"(" + cond + ")", guard};
  }
  throw_internal("predicate on a value node");
}

std::string Generator::prelude(const TableDef& def, bool has_cols) const {
  Bindings b;
  b.vars["maxline"] = std::to_string(kMaxLineSize);
  b.vars["delim"] = char_literal(def.delimiter);
  b.flags["has_cols"] = has_cols;
  b.flags["trailing"] = def.trailing_delimiter;
  b.flags["unrolled"] = flags_.unroll_columns;
  return render(tmpl("row_prelude.tmpl"), b);
}

std::string Generator::local_decls(int t) const {
  std::string out;
  for (uint32_t o : vq_.projection[static_cast<size_t>(t)]) {
    const ColumnDef& col = defs_[static_cast<size_t>(t)]->columns[o];
    if (col.type == ColumnType::Text) {
      out += sp(4) + "const char* " + vname(t, o) + "_p;\n";
      out += sp(4) + "uint64_t " + vname(t, o) + "_n;\n";
    } else {
      out += sp(4) + std::string(ctype_name(col.type)) + " " + vname(t, o) +
             ";\n";
    }
    if (has_null_flag(col)) out += sp(4) + "bool " + nname(t, o) + ";\n";
  }
  return out;
}

std::string Generator::tokenize_unrolled(
    const TableDef& def, int t,
    const std::function<std::string(uint32_t)>& work) {
  const auto& proj = vq_.projection[static_cast<size_t>(t)];
  const uint32_t maxord = proj.back();
  Bindings b;
  b.vars["delim"] = char_literal(def.delimiter);
  b.vars["maxord"] = std::to_string(maxord);
  std::vector<Bindings> cols;
  for (uint32_t o = 0; o <= maxord; ++o) {
    const bool needed = std::binary_search(proj.begin(), proj.end(), o);
    Bindings c;
    c.vars["name"] = marker_name(def.columns[o].name);
    c.vars["work"] = needed ? work(o) : std::string();
    c.flags["needed"] = needed;
    c.flags["last"] = o == maxord;
    cols.push_back(std::move(c));
  }
  b.lists["TOKCOLS"] = std::move(cols);
  return render(tmpl("tokenize_unrolled.tmpl"), b);
}

std::string Generator::tokenize_generic(const TableDef& def, int t) {
  const auto& proj = vq_.projection[static_cast<size_t>(t)];
  Bindings b;
  b.vars["delim"] = char_literal(def.delimiter);
  b.vars["maxord"] = std::to_string(proj.back());
  b.vars["ntok"] = std::to_string(proj.back() + 1);
  // With a single needed ordinal the final field always exists, so the
  // too-few-fields branch would be dead code.
  b.flags["few"] = proj.back() > 0;
  return render(tmpl("tokenize_generic.tmpl"), b);
}

std::string Generator::parse_into_local(const ColumnDef& col, int t,
                                        const std::string& ptr,
                                        const std::string& len,
                                        const std::string& row) const {
  const uint32_t o = col.ordinal;
  std::string out;
  if (col.type == ColumnType::Text) {
    out += sp(4) + vname(t, o) + "_p = " + ptr + ";\n";
    out += sp(4) + vname(t, o) + "_n = " + len + ";\n";
    return out;
  }
  const std::string err = "*call->error = rq_err(" + row + ", " +
                          std::to_string(o) + "u, 1);\n";
  const std::string ret = "return static_cast<int64_t>(*call->error);\n";
  if (col.nullable) {
    out += sp(4) + "/*NULLCHK*/ if (" + len + " == 0) {\n";
    out += sp(6) + nname(t, o) + " = true;\n";
    out += sp(6) + vname(t, o) + " = " + zero_of(col.type) + ";\n";
    out += sp(4) + "} else {\n";
    out += sp(6) + nname(t, o) + " = false;\n";
    out += sp(6) + "if (!" + parse_fn(col.type) + "(" + ptr + ", " + len +
           ", " + vname(t, o) + ")) {\n";
    out += sp(8) + err;
    out += sp(8) + ret;
    out += sp(6) + "}\n";
    out += sp(4) + "}\n";
    return out;
  }
  if (!flags_.elide_null_checks) {
    out += sp(4) + "/*NULLCHK*/ if (" + len + " == 0) {\n";
    out += sp(6) + err;
    out += sp(6) + ret;
    out += sp(4) + "}\n";
  }
  out += sp(4) + "if (!" + parse_fn(col.type) + "(" + ptr + ", " + len + ", " +
         vname(t, o) + ")) {\n";
  out += sp(6) + err;
  out += sp(6) + ret;
  out += sp(4) + "}\n";
  return out;
}

std::string Generator::generic_parse(int t, FieldSrc src,
                                     const std::string& row) const {
  const auto& proj = vq_.projection[static_cast<size_t>(t)];
  const TableDef& def = *defs_[static_cast<size_t>(t)];
  const std::string ts = std::to_string(t);
  const std::string nn = std::to_string(proj.size());
  const std::string kord = "kOrd" + ts;
  const std::string kty = "kTy" + ts;
  const std::string knul = "kNul" + ts;
  const std::string fv = "rq_fv" + ts;

  bool any_null = false;
  bool present[5] = {false, false, false, false, false};
  std::string ords, tys, nuls;
  for (uint32_t o : proj) {
    const ColumnDef& col = def.columns[o];
    if (!ords.empty()) {
      ords += ", ";
      tys += ", ";
      nuls += ", ";
    }
    ords += std::to_string(o) + "u";
    tys += std::to_string(static_cast<int>(col.type));
    nuls += has_null_flag(col) ? "1" : "0";
    any_null |= has_null_flag(col);
    present[static_cast<int>(col.type)] = true;
  }
  const bool with_check = any_null || !flags_.elide_null_checks;

  std::string out;
  out += sp(4) + "static const uint32_t " + kord + "[] = {" + ords + "};\n";
  out += sp(4) + "static const uint8_t " + kty + "[] = {" + tys + "};\n";
  if (any_null)
    out += sp(4) + "static const uint8_t " + knul + "[] = {" + nuls + "};\n";
  out += sp(4) + "RqVal " + fv + "[" + nn + "];\n";
  out += sp(4) + "for (uint32_t rq_k = 0; rq_k < " + nn + "u; ++rq_k) {\n";
  if (src == FieldSrc::Slices) {
    out += sp(6) + "const char* rq_cp = rq_sl[" + kord + "[rq_k]].p;\n";
    out += sp(6) + "const uint64_t rq_cn = rq_sl[" + kord + "[rq_k]].n;\n";
  } else {
    out += sp(6) + "const char* rq_cp = rq_base + rq_pm.off[rq_k];\n";
    out += sp(6) + "const uint64_t rq_cn = rq_pm.len[rq_k];\n";
  }
  out += sp(6) + fv + "[rq_k] = RqVal{};\n";
  if (with_check) {
    out += sp(6) + "/*NULLCHK*/ if (rq_cn == 0 && " + kty + "[rq_k] != 2) {\n";
    if (any_null) {
      out += sp(8) + "if (" + knul + "[rq_k]) {\n";
      out += sp(10) + fv + "[rq_k].null = true;\n";
      out += sp(10) + "continue;\n";
      out += sp(8) + "}\n";
    }
    out += sp(8) + "*call->error = rq_err(" + row + ", " + kord +
           "[rq_k], 1);\n";
    out += sp(8) + "return static_cast<int64_t>(*call->error);\n";
    out += sp(6) + "}\n";
  }
  out += sp(6) + "/*TYCHK*/ switch (" + kty + "[rq_k]) {\n";
  const auto parse_case = [&](int code, const char* cxx, const char* fn,
                              const char* slot) {
    out += sp(8) + "case " + std::to_string(code) + ": {\n";
    out += sp(10) + std::string(cxx) + " rq_tv;\n";
    out += sp(10) + "if (!" + fn + "(rq_cp, rq_cn, rq_tv)) {\n";
    out += sp(12) + "*call->error = rq_err(" + row + ", " + kord +
           "[rq_k], 1);\n";
    out += sp(12) + "return static_cast<int64_t>(*call->error);\n";
    out += sp(10) + "}\n";
    out += sp(10) + fv + "[rq_k]." + slot + " = rq_tv;\n";
    out += sp(10) + "break;\n";
    out += sp(8) + "}\n";
  };
  if (present[0]) parse_case(0, "int32_t", "rq_parse_i32", "i");
  if (present[1]) parse_case(1, "double", "rq_parse_f64", "d");
  if (present[2]) {
    out += sp(8) + "case 2:\n";
    out += sp(10) + fv + "[rq_k].p = rq_cp;\n";
    out += sp(10) + fv + "[rq_k].n = rq_cn;\n";
    out += sp(10) + "break;\n";
  }
  if (present[3]) parse_case(3, "int32_t", "rq_parse_date", "i");
  if (present[4]) parse_case(4, "uint8_t", "rq_parse_bool", "i");
  out += sp(6) + "}\n";
  out += sp(4) + "}\n";
  return out;
}

std::string Generator::posmap_record_generic(int t) const {
  const auto& proj = vq_.projection[static_cast<size_t>(t)];
  const std::string ts = std::to_string(t);
  const std::string nn = std::to_string(proj.size());
  std::string ords;
  for (uint32_t o : proj) {
    if (!ords.empty()) ords += ", ";
    ords += std::to_string(o) + "u";
  }
  std::string out;
  out += sp(4) + "static const uint32_t kOrd" + ts + "[] = {" + ords + "};\n";
  out += sp(4) + "RqPos" + ts + " rq_ps;\n";
  out += sp(4) + "for (uint32_t rq_k = 0; rq_k < " + nn + "u; ++rq_k) {\n";
  out += sp(6) + "rq_ps.off[rq_k] = static_cast<uint32_t>(rq_sl[kOrd" + ts +
         "[rq_k]].p - rq_base);\n";
  out += sp(6) + "rq_ps.len[rq_k] = static_cast<uint32_t>(rq_sl[kOrd" + ts +
         "[rq_k]].n);\n";
  out += sp(4) + "}\n";
  out += sp(4) + "s.posmap" + ts + ".push_back(rq_ps);\n";
  return out;
}

Generator::KeyPart Generator::key_part(const Ctx& ctx,
                                       const opt::JoinTreeNode& jn, int ei,
                                       bool build_side) const {
  const sql::JoinPred& p = vq_.join_preds[static_cast<size_t>(ei)];
  const bool left_in_build = (jn.build->mask >> p.left_table) & 1u;
  int kt;
  uint32_t ko;
  ColumnType cty;
  if (left_in_build == build_side) {
    kt = p.left_table;
    ko = p.left_ord;
    cty = p.left_type;
  } else {
    kt = p.right_table;
    ko = p.right_ord;
    cty = p.right_type;
  }
  const bool mixed = p.left_type != p.right_type && is_numeric(p.left_type) &&
                     is_numeric(p.right_type);
  KeyPart kp;
  kp.v = access(ctx, kt, ko);
  kp.enc = cty == ColumnType::Text ? 2 : mixed ? 1 : 0;
  return kp;
}

std::string Generator::key_append(int ind, const std::string& key,
                                  const KeyPart& kp) const {
  std::string out;
  out += sp(ind) + "{\n";
  if (kp.enc == 2) {
    out += sp(ind + 2) + "const uint32_t rq_kl = static_cast<uint32_t>(" +
           kp.v.len + ");\n";
    out += sp(ind + 2) + key +
           ".append(reinterpret_cast<const char*>(&rq_kl), 4);\n";
    out += sp(ind + 2) + key + ".append(" + kp.v.ptr + ", rq_kl);\n";
  } else if (kp.enc == 1) {
    out += sp(ind + 2) + "const double rq_kd = " + as_f64(kp.v) + ";\n";
    out += sp(ind + 2) + key +
           ".append(reinterpret_cast<const char*>(&rq_kd), 8);\n";
  } else {
    out += sp(ind + 2) + "const int64_t rq_ki = " + as_i64(kp.v) + ";\n";
    out += sp(ind + 2) + key +
           ".append(reinterpret_cast<const char*>(&rq_ki), 8);\n";
  }
  out += sp(ind) + "}\n";
  return out;
}

std::string Generator::tup_init(const Ctx& ctx, int j) const {
  std::string out;
  for (const auto& [t, o] : slots_[static_cast<size_t>(j)]) {
    const ColumnDef& col = defs_[static_cast<size_t>(t)]->columns[o];
    const ValRef v = access(ctx, t, o);
    if (!out.empty()) out += ", ";
    if (col.type == ColumnType::Text) {
      out += v.val.empty() ? "std::string(" + v.ptr + ", " + v.len + ")"
                           : v.val;
    } else if (v.wide) {
      out += "static_cast<" + std::string(ctype_name(col.type)) + ">(" +
             v.val + ")";
    } else {
      out += v.val;
    }
    if (has_null_flag(col)) {
      out += ", ";
      out += v.null.empty() ? "false" : v.null;
    }
  }
  return out;
}

std::string Generator::emit_build_sink(const Ctx& ctx, int ind) {
  const opt::JoinTreeNode* jn = ctx.pipe->sink_join;
  const std::string js = std::to_string(node_id_.at(jn));
  std::string out;
  if (!jn->edges.empty()) {
    std::vector<KeyPart> parts;
    for (int ei : jn->edges) {
      KeyPart kp = key_part(ctx, *jn, ei, /*build_side=*/true);
      if (!kp.v.null.empty())
        out += sp(ind) + "/*NULLCHK*/ if (" + kp.v.null + ") goto " +
               ctx.skip + ";\n";
      parts.push_back(std::move(kp));
    }
    out += sp(ind) + "std::string rq_bk" + js + ";\n";
    for (const KeyPart& kp : parts) out += key_append(ind, "rq_bk" + js, kp);
    out += sp(ind) + "s.ht" + js + ".emplace(std::move(rq_bk" + js +
           "), static_cast<uint64_t>(s.rows" + js + ".size()));\n";
  }
  out += sp(ind) + "s.rows" + js + ".push_back(Tup" + js + "{" +
         tup_init(ctx, node_id_.at(jn)) + "});\n";
  return out;
}

std::string Generator::emit_final_sink(const Ctx& ctx, int ind) {
  std::string out;
  for (size_t i = 0; i < vq_.ast.items.size(); ++i) {
    const sql::SelectItem& item = vq_.ast.items[i];
    const ColumnType ot = vq_.output_types[i];
    const std::string is = std::to_string(i);
    const ValRef v = translate(ctx, *item.expr);
    if (vq_.aggregate) {
      const std::string add =
          ot == ColumnType::Int32
              ? "s.agg_i" + is + " += " + as_i64(v) + ";"
              : "s.agg_f" + is + " += " + as_f64(v) + ";";
      if (!v.null.empty())
        out += sp(ind) + "/*NULLCHK*/ if (!" + v.null + ") " + add + "\n";
      else
        out += sp(ind) + add + "\n";
      continue;
    }
    std::string value, zero;
    switch (ot) {
      case ColumnType::Int32:
        value = as_i64(v);
        zero = "0";
        break;
      case ColumnType::Float64:
        value = as_f64(v);
        zero = "0.0";
        break;
      case ColumnType::Date:
        value = v.wide ? "static_cast<int32_t>(" + v.val + ")" : v.val;
        zero = "0";
        break;
      case ColumnType::Bool:
        value = v.wide ? "static_cast<uint8_t>(" + v.val + ")" : v.val;
        zero = "0";
        break;
      case ColumnType::Text:
        value = v.val.empty() ? "std::string(" + v.ptr + ", " + v.len + ")"
                              : v.val;
        zero = "std::string()";
        break;
    }
    if (!v.null.empty()) {
      out += sp(ind) + "/*NULLCHK*/ if (" + v.null + ") {\n";
      out += sp(ind + 2) + "s.out" + is + ".push_back(" + zero + ");\n";
      out += sp(ind + 2) + "s.out" + is + "_null.push_back(1);\n";
      out += sp(ind) + "} else {\n";
      out += sp(ind + 2) + "s.out" + is + ".push_back(" + value + ");\n";
      out += sp(ind + 2) + "s.out" + is + "_null.push_back(0);\n";
      out += sp(ind) + "}\n";
    } else {
      out += sp(ind) + "s.out" + is + ".push_back(" + value + ");\n";
      out += sp(ind) + "s.out" + is + "_null.push_back(0);\n";
    }
  }
  return out;
}

std::string Generator::emit_tail(const Ctx& ctx, int ind0) {
  std::string out;
  for (const sql::Expr* f : filters_[static_cast<size_t>(ctx.t)]) {
    PredRef p = predicate(ctx, *f);
    if (!p.guard.empty())
      out += sp(ind0) + "/*NULLCHK*/ if (" + p.guard + ") goto " + ctx.skip +
             ";\n";
    out += sp(ind0) + "if (!" + p.cond + ") goto " + ctx.skip + ";\n";
  }
  // The braced block keeps every std::string below the filter gotos in a
  // nested scope, which keeps those jumps legal.
  out += sp(ind0) + "{\n";
  int ind = ind0 + 2;
  for (const opt::JoinTreeNode* jn : ctx.pipe->probes) {
    const std::string js = std::to_string(node_id_.at(jn));
    if (jn->edges.empty()) {
      out += sp(ind) + "for (const Tup" + js + "& rq_m" + js + " : s.rows" +
             js + ") {\n";
      ind += 2;
      continue;
    }
    std::vector<KeyPart> parts;
    for (int ei : jn->edges) {
      KeyPart kp = key_part(ctx, *jn, ei, /*build_side=*/false);
      if (!kp.v.null.empty())
        out += sp(ind) + "/*NULLCHK*/ if (" + kp.v.null + ") goto " +
               ctx.skip + ";\n";
      parts.push_back(std::move(kp));
    }
    out += sp(ind) + "std::string rq_pk" + js + ";\n";
    for (const KeyPart& kp : parts) out += key_append(ind, "rq_pk" + js, kp);
    out += sp(ind) + "const auto rq_r" + js + " = s.ht" + js +
           ".equal_range(rq_pk" + js + ");\n";
    out += sp(ind) + "for (auto rq_it" + js + " = rq_r" + js +
           ".first; rq_it" + js + " != rq_r" + js + ".second; ++rq_it" + js +
           ") {\n";
    ind += 2;
    out += sp(ind) + "const Tup" + js + "& rq_m" + js + " = s.rows" + js +
           "[rq_it" + js + "->second];\n";
  }
  out += ctx.pipe->is_final ? emit_final_sink(ctx, ind)
                            : emit_build_sink(ctx, ind);
  for (size_t i = 0; i < ctx.pipe->probes.size(); ++i) {
    ind -= 2;
    out += sp(ind) + "}\n";
  }
  out += sp(ind0) + "}\n";
  return out;
}

std::string Generator::emit_pipeline(size_t pi) {
  const Pipeline& pipe = pipes_[pi];
  const int t = pipe.table_idx;
  const TableDef& def = *defs_[static_cast<size_t>(t)];
  const auto& proj = vq_.projection[static_cast<size_t>(t)];
  const std::string ts = std::to_string(t);
  const bool has_cols = !proj.empty();

  Ctx ctx;
  ctx.pipe = &pipe;
  ctx.t = t;
  ctx.skip = "rq_next" + ts;
  ctx.generic = !flags_.unroll_columns;
  ctx.fv = "rq_fv" + ts;

  if (flags_.fusion && flags_.batch_rows == 1) {
    std::string body = prelude(def, has_cols);
    if (has_cols) {
      if (!ctx.generic) {
        body += local_decls(t);
        body += tokenize_unrolled(def, t, [&](uint32_t o) {
          return parse_into_local(def.columns[o], t, "rq_fs", "rq_fn",
                                  "rq_row");
        });
      } else {
        body += tokenize_generic(def, t);
        body += generic_parse(t, FieldSrc::Slices, "rq_row");
      }
    }
    body += emit_tail(ctx, 4);
    Bindings b;
    b.vars["t"] = ts;
    b.vars["row_body"] = body;
    b.flags["skip"] = body.find("goto " + ctx.skip) != std::string::npos;
    return render(tmpl("pipeline_fused.tmpl"), b);
  }

  if (flags_.fusion) {
    std::string gather = prelude(def, has_cols);
    std::string apply;
    if (has_cols) {
      if (!ctx.generic) {
        gather += local_decls(t);
        gather += tokenize_unrolled(def, t, [&](uint32_t o) {
          return parse_into_local(def.columns[o], t, "rq_fs", "rq_fn",
                                  "rq_row");
        });
        for (uint32_t o : proj) {
          const ColumnDef& col = def.columns[o];
          const std::string st = "s." + stage_name(t, o);
          if (col.type == ColumnType::Text) {
            gather += sp(4) + st + "_p[rq_cnt] = " + vname(t, o) + "_p;\n";
            gather += sp(4) + st + "_n[rq_cnt] = " + vname(t, o) + "_n;\n";
            apply += sp(4) + "const char* " + vname(t, o) + "_p = " + st +
                     "_p[rq_b];\n";
            apply += sp(4) + "const uint64_t " + vname(t, o) + "_n = " + st +
                     "_n[rq_b];\n";
          } else {
            gather += sp(4) + st + "[rq_cnt] = " + vname(t, o) + ";\n";
            apply += sp(4) + "const " + std::string(ctype_name(col.type)) +
                     " " + vname(t, o) + " = " + st + "[rq_b];\n";
          }
          if (has_null_flag(col)) {
            gather += sp(4) + "s.st_n" + ts + "_" + std::to_string(o) +
                      "[rq_cnt] = " + nname(t, o) + ";\n";
            apply += sp(4) + "const bool " + nname(t, o) + " = s.st_n" + ts +
                     "_" + std::to_string(o) + "[rq_b] != 0;\n";
          }
        }
      } else {
        const std::string nn = std::to_string(proj.size());
        gather += tokenize_generic(def, t);
        gather += generic_parse(t, FieldSrc::Slices, "rq_row");
        gather += sp(4) + "for (uint32_t rq_k = 0; rq_k < " + nn +
                  "u; ++rq_k)\n";
        gather += sp(6) + "s.st_fv" + ts +
                  "[static_cast<size_t>(rq_cnt) * " + nn + "u + rq_k] = " +
                  ctx.fv + "[rq_k];\n";
        apply += sp(4) + "const RqVal* " + ctx.fv + " = s.st_fv" + ts +
                 ".data() + static_cast<size_t>(rq_b) * " + nn + "u;\n";
      }
    }
    apply += emit_tail(ctx, 4);
    Bindings b;
    b.vars["t"] = ts;
    b.vars["batch"] = std::to_string(flags_.batch_rows);
    b.vars["gather_body"] = reindent(gather, 2);
    b.vars["apply_body"] = reindent(apply, 2);
    b.flags["skip"] = apply.find("goto " + ctx.skip) != std::string::npos;
    return render(tmpl("pipeline_fused_batch.tmpl"), b);
  }

  // Non-fused: pass 1 records field positions, pass 2 parses off the map.
  std::string pass1 = prelude(def, has_cols);
  std::string pass2;
  if (has_cols) {
    if (!ctx.generic) {
      pass1 += sp(4) + "RqPos" + ts + " rq_ps;\n";
      pass1 += tokenize_unrolled(def, t, [&](uint32_t o) {
        const std::string k = std::to_string(k_of(t, o));
        std::string w;
        w += sp(4) + "rq_ps.off[" + k +
             "] = static_cast<uint32_t>(rq_fs - rq_base);\n";
        w += sp(4) + "rq_ps.len[" + k + "] = static_cast<uint32_t>(rq_fn);\n";
        return w;
      });
      pass1 += sp(4) + "s.posmap" + ts + ".push_back(rq_ps);\n";
      pass2 += local_decls(t);
      for (uint32_t o : proj) {
        const std::string k = std::to_string(k_of(t, o));
        pass2 += parse_into_local(def.columns[o], t,
                                  "rq_base + rq_pm.off[" + k + "]",
                                  "rq_pm.len[" + k + "]", "rq_prow");
      }
    } else {
      pass1 += tokenize_generic(def, t);
      pass1 += posmap_record_generic(t);
      pass2 += generic_parse(t, FieldSrc::PosMap, "rq_prow");
    }
  } else {
    pass1 += sp(4) + "s.posmap" + ts + ".push_back(RqPos" + ts + "{});\n";
  }
  pass2 += emit_tail(ctx, 4);
  Bindings b;
  b.vars["t"] = ts;
  b.vars["pass1_body"] = pass1;
  b.vars["pass2_body"] = pass2;
  b.flags["skip"] = pass2.find("goto " + ctx.skip) != std::string::npos;
  return render(tmpl("pipeline_nonfused.tmpl"), b);
}

std::string Generator::emit_structs() const {
  std::string out;
  for (size_t i = 0; i < pipes_.size(); ++i) {
    if (pipes_[i].is_final) continue;
    const std::string is = std::to_string(i);
    const auto& slots = slots_[i];
    if (slots.empty()) {
      out += "struct Tup" + is + " {};\n\n";
      continue;
    }
    out += "struct Tup" + is + " {\n";
    for (const auto& [t, o] : slots) {
      const ColumnDef& col = defs_[static_cast<size_t>(t)]->columns[o];
      const std::string m = member_name(t, o);
      if (col.type == ColumnType::Text)
        out += "  std::string " + m + ";\n";
      else
        out += "  " + std::string(ctype_name(col.type)) + " " + m + ";\n";
      if (has_null_flag(col)) out += "  bool " + m + "_null;\n";
    }
    out += "};\n\n";
  }
  if (!flags_.fusion) {
    for (const Pipeline& p : pipes_) {
      const std::string ts = std::to_string(p.table_idx);
      const size_t nn = vq_.projection[static_cast<size_t>(p.table_idx)].size();
      if (nn == 0) {
        out += "struct RqPos" + ts + " {};\n\n";
        continue;
      }
      // Offsets are relative to the base of the chunk being processed.
      out += "struct RqPos" + ts + " {\n";
      out += "  uint32_t off[" + std::to_string(nn) + "];\n";
      out += "  uint32_t len[" + std::to_string(nn) + "];\n";
      out += "};\n\n";
    }
  }
  return out;
}

std::string Generator::emit_state_members() const {
  std::string out;
  for (size_t t = 0; t < defs_.size(); ++t)
    out += "  uint64_t lines" + std::to_string(t) + " = 0;\n";
  for (size_t i = 0; i < pipes_.size(); ++i) {
    if (pipes_[i].is_final) continue;
    const std::string is = std::to_string(i);
    out += "  std::vector<Tup" + is + "> rows" + is + ";\n";
    if (!pipes_[i].sink_join->edges.empty())
      out += "  std::unordered_multimap<std::string, uint64_t> ht" + is +
             ";\n";
  }
  if (!flags_.fusion)
    for (const Pipeline& p : pipes_) {
      const std::string ts = std::to_string(p.table_idx);
      out += "  std::vector<RqPos" + ts + "> posmap" + ts + ";\n";
    }
  if (flags_.batch_rows > 1) {
    for (const Pipeline& p : pipes_) {
      const int t = p.table_idx;
      const auto& proj = vq_.projection[static_cast<size_t>(t)];
      if (proj.empty()) continue;
      if (!flags_.unroll_columns) {
        out += "  std::vector<RqVal> st_fv" + std::to_string(t) + ";\n";
        continue;
      }
      for (uint32_t o : proj) {
        const ColumnDef& col = defs_[static_cast<size_t>(t)]->columns[o];
        const std::string st = stage_name(t, o);
        if (col.type == ColumnType::Text) {
          out += "  std::vector<const char*> " + st + "_p;\n";
          out += "  std::vector<uint64_t> " + st + "_n;\n";
        } else {
          out += "  std::vector<" + std::string(ctype_name(col.type)) + "> " +
                 st + ";\n";
        }
        if (has_null_flag(col))
          out += "  std::vector<uint8_t> st_n" + std::to_string(t) + "_" +
                 std::to_string(o) + ";\n";
      }
    }
  }
  for (size_t i = 0; i < vq_.ast.items.size(); ++i) {
    const std::string is = std::to_string(i);
    if (vq_.aggregate) {
      out += vq_.output_types[i] == ColumnType::Int32
                 ? "  int64_t agg_i" + is + " = 0;\n"
                 : "  double agg_f" + is + " = 0.0;\n";
      continue;
    }
    const char* elem = nullptr;
    switch (vq_.output_types[i]) {
      case ColumnType::Int32: elem = "int64_t"; break;
      case ColumnType::Float64: elem = "double"; break;
      case ColumnType::Date: elem = "int32_t"; break;
      case ColumnType::Bool: elem = "uint8_t"; break;
      case ColumnType::Text: elem = "std::string"; break;
    }
    out += "  std::vector<" + std::string(elem) + "> out" + is + ";\n";
    out += "  std::vector<uint8_t> out" + is + "_null;\n";
  }
  for (size_t k = 0; k < params_.ints.size(); ++k)
    out += "  int64_t p_i" + std::to_string(k) + " = 0;\n";
  for (size_t k = 0; k < params_.floats.size(); ++k)
    out += "  double p_f" + std::to_string(k) + " = 0.0;\n";
  for (size_t k = 0; k < params_.texts.size(); ++k)
    out += "  std::string p_s" + std::to_string(k) + ";\n";
  return out;
}

std::string Generator::emit_init() const {
  std::string out;
  for (size_t k = 0; k < params_.ints.size(); ++k)
    out += sp(6) + "st->p_i" + std::to_string(k) + " = call->int_params[" +
           std::to_string(k) + "];\n";
  for (size_t k = 0; k < params_.floats.size(); ++k)
    out += sp(6) + "st->p_f" + std::to_string(k) + " = call->float_params[" +
           std::to_string(k) + "];\n";
  for (size_t k = 0; k < params_.texts.size(); ++k)
    out += sp(6) + "st->p_s" + std::to_string(k) + ".assign(call->text_params[" +
           std::to_string(k) + "], static_cast<size_t>(call->text_param_lens[" +
           std::to_string(k) + "]));\n";
  if (flags_.batch_rows > 1) {
    const std::string batch = std::to_string(flags_.batch_rows);
    for (const Pipeline& p : pipes_) {
      const int t = p.table_idx;
      const auto& proj = vq_.projection[static_cast<size_t>(t)];
      if (proj.empty()) continue;
      if (!flags_.unroll_columns) {
        out += sp(6) + "st->st_fv" + std::to_string(t) + ".resize(" + batch +
               "ull * " + std::to_string(proj.size()) + "u);\n";
        continue;
      }
      for (uint32_t o : proj) {
        const ColumnDef& col = defs_[static_cast<size_t>(t)]->columns[o];
        const std::string st = "st->" + stage_name(t, o);
        if (col.type == ColumnType::Text) {
          out += sp(6) + st + "_p.resize(" + batch + ");\n";
          out += sp(6) + st + "_n.resize(" + batch + ");\n";
        } else {
          out += sp(6) + st + ".resize(" + batch + ");\n";
        }
        if (has_null_flag(col))
          out += sp(6) + "st->st_n" + std::to_string(t) + "_" +
                 std::to_string(o) + ".resize(" + batch + ");\n";
      }
    }
  }
  return out;
}

std::string Generator::emit_sizes() const {
  std::string out;
  if (vq_.aggregate) {
    out += sp(6) + "(void)s;\n";
    out += sp(6) + "*call->rows = 1;\n";
    for (size_t i = 0; i < vq_.ast.items.size(); ++i)
      out += sp(6) + "call->sizes[" + std::to_string(i) + "] = 9;\n";
    return out;
  }
  out += sp(6) +
         "const uint64_t rq_rows = static_cast<uint64_t>(s.out0_null.size());"
         "\n";
  out += sp(6) + "const uint64_t rq_bm = (rq_rows + 7) / 8;\n";
  out += sp(6) + "*call->rows = rq_rows;\n";
  for (size_t i = 0; i < vq_.ast.items.size(); ++i) {
    const std::string is = std::to_string(i);
    if (vq_.output_types[i] == ColumnType::Text) {
      out += sp(6) + "{\n";
      out += sp(8) + "uint64_t rq_sz = rq_bm;\n";
      out += sp(8) + "for (const std::string& rq_tx : s.out" + is +
             ") rq_sz += 4 + rq_tx.size();\n";
      out += sp(8) + "call->sizes[" + is + "] = rq_sz;\n";
      out += sp(6) + "}\n";
      continue;
    }
    size_t w = 0;
    switch (vq_.output_types[i]) {
      case ColumnType::Int32: w = 8; break;  // int64 on the wire
      case ColumnType::Float64: w = 8; break;
      case ColumnType::Date: w = 4; break;
      case ColumnType::Bool: w = 1; break;
      case ColumnType::Text: break;
    }
    out += sp(6) + "call->sizes[" + is + "] = rq_bm + rq_rows * " +
           std::to_string(w) + "ull;\n";
  }
  return out;
}

std::string Generator::emit_fetch() const {
  std::string out;
  if (vq_.aggregate) {
    out += sp(6) + "*call->rows = 1;\n";
    for (size_t i = 0; i < vq_.ast.items.size(); ++i) {
      const std::string is = std::to_string(i);
      const bool ints = vq_.output_types[i] == ColumnType::Int32;
      out += sp(6) + "{\n";
      out += sp(8) + "uint8_t* rq_o = call->outputs[" + is + "];\n";
      out += sp(8) + "rq_o[0] = 1;\n";
      out += sp(8) +
             (ints ? "const int64_t rq_v = s.agg_i" + is + ";\n"
                   : "const double rq_v = s.agg_f" + is + ";\n");
      out += sp(8) + "std::memcpy(rq_o + 1, &rq_v, 8);\n";
      out += sp(6) + "}\n";
    }
    return out;
  }
  out += sp(6) +
         "const uint64_t rq_rows = static_cast<uint64_t>(s.out0_null.size());"
         "\n";
  out += sp(6) + "const uint64_t rq_bm = (rq_rows + 7) / 8;\n";
  out += sp(6) + "*call->rows = rq_rows;\n";
  for (size_t i = 0; i < vq_.ast.items.size(); ++i) {
    const std::string is = std::to_string(i);
    out += sp(6) + "{\n";
    out += sp(8) + "uint8_t* rq_o = call->outputs[" + is + "];\n";
    out += sp(8) + "std::memset(rq_o, 0, static_cast<size_t>(rq_bm));\n";
    out += sp(8) + "for (uint64_t rq_r = 0; rq_r < rq_rows; ++rq_r)\n";
    out += sp(10) + "if (!s.out" + is + "_null[rq_r])\n";
    out += sp(12) +
           "rq_o[rq_r >> 3] |= static_cast<uint8_t>(1u << (rq_r & 7u));\n";
    if (vq_.output_types[i] == ColumnType::Text) {
      out += sp(8) + "uint8_t* rq_w = rq_o + rq_bm;\n";
      out += sp(8) + "for (uint64_t rq_r = 0; rq_r < rq_rows; ++rq_r) {\n";
      out += sp(10) + "const uint32_t rq_l = static_cast<uint32_t>(s.out" +
             is + "[rq_r].size());\n";
      out += sp(10) + "std::memcpy(rq_w, &rq_l, 4);\n";
      out += sp(10) + "rq_w += 4;\n";
      out += sp(10) + "std::memcpy(rq_w, s.out" + is + "[rq_r].data(), rq_l);"
             "\n";
      out += sp(10) + "rq_w += rq_l;\n";
      out += sp(8) + "}\n";
    } else {
      out += sp(8) + "if (rq_rows)\n";
      out += sp(10) + "std::memcpy(rq_o + rq_bm, s.out" + is +
             ".data(), static_cast<size_t>(rq_rows) * sizeof(s.out" + is +
             "[0]));\n";
    }
    out += sp(6) + "}\n";
  }
  return out;
}

GeneratedSource Generator::run() {
  defs_.reserve(vq_.tables.size());
  for (const std::string& name : vq_.tables) defs_.push_back(&cat_.table(name));
  filters_.resize(vq_.filters.size());
  for (size_t t = 0; t < vq_.filters.size(); ++t)
    filters_[t] = normalized_filters(vq_.filters[t]);

  pipes_ = split_pipelines(plan_);
  slots_.resize(pipes_.size());
  for (size_t i = 0; i < pipes_.size(); ++i) {
    if (pipes_[i].is_final) continue;
    node_id_[pipes_[i].sink_join] = static_cast<int>(i);
    const uint32_t mask = pipes_[i].sink_join->build->mask;
    for (int t = 0; t < static_cast<int>(vq_.tables.size()); ++t) {
      if (!((mask >> t) & 1u)) continue;
      for (uint32_t o : vq_.projection[static_cast<size_t>(t)])
        slots_[i].push_back({t, o});
    }
  }

  std::string pipelines;
  std::vector<Bindings> dispatch;
  for (size_t i = 0; i < pipes_.size(); ++i) {
    pipelines += emit_pipeline(i);
    pipelines += "\n";
    Bindings d;
    d.vars["t"] = std::to_string(pipes_[i].table_idx);
    dispatch.push_back(std::move(d));
  }

  const uint64_t sig = fnv1a64(canonical_text(plan_, cat_, flags_));

  Bindings root;
  root.vars["sig"] = hex16(sig);
  root.vars["structs"] = emit_structs();
  root.vars["state_members"] = emit_state_members();
  root.vars["pipelines"] = pipelines;
  root.vars["init_params"] = emit_init();
  root.vars["sizes_body"] = emit_sizes();
  root.vars["fetch_body"] = emit_fetch();
  root.lists["PIPELINES"] = std::move(dispatch);

  GeneratedSource out;
  out.source = render(tmpl("kernel_shell.tmpl"), root);
  out.signature = sig;
  out.entry_symbol = "rawq_run_" + hex16(sig);
  out.params = std::move(params_);
  return out;
}

void check_flags(const SpecializationFlags& flags) {
  if (flags.batch_rows == 0) throw_user("batch_rows must be at least 1");
  if (flags.batch_rows > kMaxBatchRows)
    throw_user("batch_rows " + std::to_string(flags.batch_rows) +
               " exceeds the cap of " + std::to_string(kMaxBatchRows));
  if (flags.batch_rows > 1 && !flags.fusion)
    throw_user("batch_rows > 1 requires the fused pipeline");
}

}  // namespace

uint64_t signature(const opt::PhysicalPlan& plan, const Catalog& catalog,
                   const SpecializationFlags& flags) {
  check_flags(flags);
  return fnv1a64(canonical_text(plan, catalog, flags));
}

GeneratedSource generate(const opt::PhysicalPlan& plan, const Catalog& catalog,
                         const SpecializationFlags& flags) {
  check_flags(flags);
  Generator gen(plan, catalog, flags);
  return gen.run();
}

GeneratedSource gen_fused(const opt::PhysicalPlan& plan, const Catalog& catalog,
                          const SpecializationFlags& flags) {
  if (!flags.fusion) throw_internal("gen_fused called with fusion off");
  return generate(plan, catalog, flags);
}

GeneratedSource gen_nonfused(const opt::PhysicalPlan& plan,
                             const Catalog& catalog,
                             const SpecializationFlags& flags) {
  if (flags.fusion) throw_internal("gen_nonfused called with fusion on");
  return generate(plan, catalog, flags);
}

}  // namespace rawq::codegen
