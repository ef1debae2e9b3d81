#include "rawq/exec/interpreter.hpp"

#include <cstring>
#include <fstream>
#include <unordered_map>

#include "rawq/error.hpp"
#include "rawq/exec/eval.hpp"
#include "rawq/limits.hpp"
#include "rawq/storage/tokenize.hpp"

namespace rawq::exec {
namespace {

// Tuple layout descriptor: which (table, ordinal) lives at each slot.
using ColumnMap = std::vector<std::pair<int, uint32_t>>;

class TupleView : public ColumnSource {
 public:
  TupleView(const ColumnMap& map, const Tuple& tuple) : map_(map), tuple_(tuple) {}
  const Value& column(int table_idx, uint32_t ordinal) const override {
    for (size_t i = 0; i < map_.size(); ++i)
      if (map_[i].first == table_idx && map_[i].second == ordinal)
        return tuple_[i];
    throw_internal("column not in tuple");
  }

 private:
  const ColumnMap& map_;
  const Tuple& tuple_;
};

class Operator {
 public:
  virtual ~Operator() = default;
  virtual void open() = 0;
  virtual bool next(Tuple& out) = 0;
  const ColumnMap& columns() const { return cols_; }

 protected:
  ColumnMap cols_;
};

class RawScanOp : public Operator {
 public:
  RawScanOp(const TableDef& def, int table_idx,
            std::vector<uint32_t> projection,
            std::vector<const sql::Expr*> filters)
      : def_(def),
        table_idx_(table_idx),
        projection_(std::move(projection)),
        filters_(std::move(filters)) {
    for (uint32_t ord : projection_) cols_.emplace_back(table_idx_, ord);
  }

  void open() override {
    in_.open(def_.raw_path, std::ios::binary);
    if (!in_) throw_env("cannot open raw file " + def_.raw_path);
    line_ = 0;
    slices_.resize(projection_.size());
  }

  bool next(Tuple& out) override {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_;
      if (line.size() > kMaxLineSize)
        throw_user(def_.raw_path + ":" + std::to_string(line_) +
                   ": row exceeds maximum line size");
      if (!line.empty() && line.back() == '\r') line.pop_back();
      auto status = storage::tokenize_row(line, def_.delimiter,
                                          def_.trailing_delimiter, projection_,
                                          slices_);
      if (status == storage::TokenizeStatus::TooFewFields)
        throw_user(def_.raw_path + ":" + std::to_string(line_) +
                   ": too few fields (need ordinal " +
                   std::to_string(projection_.back()) + ")");
      out.clear();
      for (size_t i = 0; i < projection_.size(); ++i) {
        const ColumnDef& col = def_.columns[projection_[i]];
        std::string_view field(line.data() + slices_[i].start, slices_[i].len);
        // Runtime type dispatch per field, the generic engine's signature cost.
        auto v = parse_field(field, col.type, col.nullable);
        if (!v)
          throw_user(def_.raw_path + ":" + std::to_string(line_) +
                     ": ordinal " + std::to_string(projection_[i]) +
                     ": malformed " + std::string(type_name(col.type)) +
                     " field '" + std::string(field) + "'");
        out.push_back(std::move(*v));
      }
      if (passes_filters(out)) return true;
    }
    return false;
  }

 private:
  bool passes_filters(const Tuple& t) const {
    TupleView view(cols_, t);
    for (const sql::Expr* f : filters_)
      if (!eval_pred(*f, view)) return false;
    return true;
  }

  const TableDef& def_;
  int table_idx_;
  std::vector<uint32_t> projection_;
  std::vector<const sql::Expr*> filters_;
  std::ifstream in_;
  uint64_t line_ = 0;
  std::vector<storage::FieldSlice> slices_;
};

// Scan over a loaded full-schema binary table; chunk column k is ordinal k.
class StoredScanOp : public Operator {
 public:
  StoredScanOp(const storage::StoredTable& table, int table_idx,
               std::vector<uint32_t> projection,
               std::vector<const sql::Expr*> filters)
      : table_(table),
        table_idx_(table_idx),
        projection_(std::move(projection)),
        filters_(std::move(filters)) {
    for (uint32_t ord : projection_) cols_.emplace_back(table_idx_, ord);
  }

  void open() override {
    chunk_idx_ = 0;
    row_ = 0;
    chunk_.row_count = 0;
  }

  bool next(Tuple& out) override {
    for (;;) {
      if (row_ >= chunk_.row_count) {
        if (chunk_idx_ >= table_.chunk_count()) return false;
        chunk_ = table_.read_chunk(chunk_idx_++);
        row_ = 0;
        continue;
      }
      out.clear();
      for (uint32_t ord : projection_) out.push_back(chunk_.value_at(ord, row_));
      ++row_;
      TupleView view(cols_, out);
      bool pass = true;
      for (const sql::Expr* f : filters_)
        if (!eval_pred(*f, view)) {
          pass = false;
          break;
        }
      if (pass) return true;
    }
  }

 private:
  const storage::StoredTable& table_;
  int table_idx_;
  std::vector<uint32_t> projection_;
  std::vector<const sql::Expr*> filters_;
  storage::BinaryChunk chunk_;
  uint32_t chunk_idx_ = 0;
  uint32_t row_ = 0;
};

// Join key canonicalization: mixed numeric sides compare as double, integer
// domains as int64, text as raw bytes. Encoded into a byte string so one
// multimap covers all key types.
std::string encode_key_part(const Value& v, bool as_double) {
  std::string out;
  if (v.type() == ColumnType::Text) {
    uint32_t len = static_cast<uint32_t>(v.as_text().size());
    out.append(reinterpret_cast<const char*>(&len), sizeof len);
    out += v.as_text();
    return out;
  }
  if (as_double) {
    double d = v.numeric();
    out.append(reinterpret_cast<const char*>(&d), sizeof d);
    return out;
  }
  int64_t i = 0;
  switch (v.type()) {
    case ColumnType::Int32: i = v.as_i64(); break;
    case ColumnType::Date: i = v.as_date(); break;
    case ColumnType::Bool: i = v.as_bool() ? 1 : 0; break;
    default: throw_internal("bad key type");
  }
  out.append(reinterpret_cast<const char*>(&i), sizeof i);
  return out;
}

class HashJoinOp : public Operator {
 public:
  HashJoinOp(std::unique_ptr<Operator> build, std::unique_ptr<Operator> probe,
             std::vector<sql::JoinPred> preds)
      : build_(std::move(build)), probe_(std::move(probe)), preds_(std::move(preds)) {
    cols_ = build_->columns();
    cols_.insert(cols_.end(), probe_->columns().begin(), probe_->columns().end());
    for (const auto& p : preds_) {
      Side s;
      s.mixed_numeric = p.left_type != p.right_type &&
                        is_numeric(p.left_type) && is_numeric(p.right_type);
      if (slot_of(build_->columns(), p.left_table, p.left_ord, s.build_slot)) {
        if (!slot_of(probe_->columns(), p.right_table, p.right_ord, s.probe_slot))
          throw_internal("join pred side not in probe input");
      } else {
        if (!slot_of(build_->columns(), p.right_table, p.right_ord, s.build_slot) ||
            !slot_of(probe_->columns(), p.left_table, p.left_ord, s.probe_slot))
          throw_internal("join pred sides not split across inputs");
      }
      sides_.push_back(s);
    }
  }

  void open() override {
    build_->open();
    Tuple t;
    while (build_->next(t)) {
      std::string key;
      if (!make_key(t, true, key)) continue;  // NULL keys never match
      table_.emplace(std::move(key), rows_.size());
      rows_.push_back(t);
    }
    probe_->open();
    have_match_ = false;
  }

  bool next(Tuple& out) override {
    for (;;) {
      if (have_match_) {
        if (match_ != match_end_) {
          emit(out);
          ++match_;
          return true;
        }
        have_match_ = false;
      }
      if (!probe_->next(probe_tuple_)) return false;
      std::string key;
      if (!make_key(probe_tuple_, false, key)) continue;
      auto range = table_.equal_range(key);
      match_ = range.first;
      match_end_ = range.second;
      have_match_ = true;
    }
  }

 private:
  struct Side {
    size_t build_slot = 0;
    size_t probe_slot = 0;
    bool mixed_numeric = false;
  };

  static bool slot_of(const ColumnMap& map, int table, uint32_t ord, size_t& out) {
    for (size_t i = 0; i < map.size(); ++i)
      if (map[i].first == table && map[i].second == ord) {
        out = i;
        return true;
      }
    return false;
  }

  bool make_key(const Tuple& t, bool build, std::string& out) const {
    for (const Side& s : sides_) {
      const Value& v = t[build ? s.build_slot : s.probe_slot];
      if (v.is_null()) return false;
      out += encode_key_part(v, s.mixed_numeric);
    }
    return true;
  }

  void emit(Tuple& out) const {
    const Tuple& b = rows_[match_->second];
    out = b;
    out.insert(out.end(), probe_tuple_.begin(), probe_tuple_.end());
  }

  std::unique_ptr<Operator> build_;
  std::unique_ptr<Operator> probe_;
  std::vector<sql::JoinPred> preds_;
  std::vector<Side> sides_;
  std::vector<Tuple> rows_;
  std::unordered_multimap<std::string, size_t> table_;
  Tuple probe_tuple_;
  std::unordered_multimap<std::string, size_t>::const_iterator match_, match_end_;
  bool have_match_ = false;
};

// Cross product; the build side is fully materialized like a hash join with
// a constant key.
class CrossJoinOp : public Operator {
 public:
  CrossJoinOp(std::unique_ptr<Operator> build, std::unique_ptr<Operator> probe)
      : build_(std::move(build)), probe_(std::move(probe)) {
    cols_ = build_->columns();
    cols_.insert(cols_.end(), probe_->columns().begin(), probe_->columns().end());
  }

  void open() override {
    build_->open();
    Tuple t;
    while (build_->next(t)) rows_.push_back(t);
    probe_->open();
    idx_ = rows_.size();
  }

  bool next(Tuple& out) override {
    for (;;) {
      if (idx_ < rows_.size()) {
        out = rows_[idx_++];
        out.insert(out.end(), probe_tuple_.begin(), probe_tuple_.end());
        return true;
      }
      if (!probe_->next(probe_tuple_)) return false;
      idx_ = 0;
    }
  }

 private:
  std::unique_ptr<Operator> build_;
  std::unique_ptr<Operator> probe_;
  std::vector<Tuple> rows_;
  Tuple probe_tuple_;
  size_t idx_ = 0;
};

class Runner {
 public:
  Runner(const opt::PhysicalPlan& plan, const Catalog& catalog,
         const ExecOptions& opts)
      : plan_(plan), catalog_(catalog), opts_(opts) {}

  void run(const RowSink& sink) {
    auto root = build_operator(*plan_.tree.root);
    root->open();
    const sql::ValidatedQuery& vq = plan_.vq;
    Tuple t;
    if (vq.aggregate) {
      // One accumulator per item; 64-bit for INT32 expressions.
      std::vector<int64_t> isum(vq.ast.items.size(), 0);
      std::vector<double> fsum(vq.ast.items.size(), 0.0);
      while (root->next(t)) {
        TupleView view(root->columns(), t);
        for (size_t i = 0; i < vq.ast.items.size(); ++i) {
          Value v = eval_expr(*vq.ast.items[i].expr, view);
          if (v.is_null()) continue;  // SQL SUM skips NULL inputs
          if (vq.output_types[i] == ColumnType::Int32)
            isum[i] += v.as_i64();
          else
            fsum[i] += v.numeric();
        }
      }
      Tuple row;
      for (size_t i = 0; i < vq.ast.items.size(); ++i)
        row.push_back(vq.output_types[i] == ColumnType::Int32
                          ? Value::i64(isum[i])
                          : Value::f64(fsum[i]));
      sink(row);
      return;
    }
    Tuple row;
    while (root->next(t)) {
      TupleView view(root->columns(), t);
      row.clear();
      for (const auto& item : plan_.vq.ast.items)
        row.push_back(eval_expr(*item.expr, view));
      sink(row);
    }
  }

 private:
  std::unique_ptr<Operator> build_operator(const opt::JoinTreeNode& node) {
    if (node.is_leaf()) {
      int t = node.leaf;
      auto it = opts_.stored.find(t);
      if (it != opts_.stored.end())
        return std::make_unique<StoredScanOp>(*it->second, t,
                                              plan_.vq.projection[t],
                                              plan_.vq.filters[t]);
      return std::make_unique<RawScanOp>(catalog_.table(plan_.vq.tables[t]), t,
                                         plan_.vq.projection[t],
                                         plan_.vq.filters[t]);
    }
    auto build = build_operator(*node.build);
    auto probe = build_operator(*node.probe);
    if (node.edges.empty())
      return std::make_unique<CrossJoinOp>(std::move(build), std::move(probe));
    std::vector<sql::JoinPred> preds;
    for (int ei : node.edges) preds.push_back(plan_.vq.join_preds[ei]);
    return std::make_unique<HashJoinOp>(std::move(build), std::move(probe),
                                        std::move(preds));
  }

  const opt::PhysicalPlan& plan_;
  const Catalog& catalog_;
  const ExecOptions& opts_;
};

}  // namespace

void run_generic(const opt::PhysicalPlan& plan, const Catalog& catalog,
                 const RowSink& sink, const ExecOptions& opts) {
  Runner(plan, catalog, opts).run(sink);
}

ResultSet run_generic(const opt::PhysicalPlan& plan, const Catalog& catalog,
                      const ExecOptions& opts) {
  ResultSet rs;
  rs.names = plan.vq.output_names;
  rs.types = plan.vq.output_types;
  run_generic(plan, catalog, [&rs](const Tuple& t) { rs.rows.push_back(t); },
              opts);
  return rs;
}

}  // namespace rawq::exec
