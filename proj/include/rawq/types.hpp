#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "rawq/error.hpp"

namespace rawq {

enum class ColumnType : uint8_t {
  Int32 = 0,
  Float64 = 1,
  Text = 2,
  Date = 3,  // whole days since 1970-01-01, int32
  Bool = 4,
};

std::string_view type_name(ColumnType t);
std::optional<ColumnType> type_from_name(std::string_view name);

inline bool is_numeric(ColumnType t) {
  return t == ColumnType::Int32 || t == ColumnType::Float64;
}

// Fixed wire width in bytes; TEXT is variable-length.
inline size_t fixed_width(ColumnType t) {
  switch (t) {
    case ColumnType::Int32:
    case ColumnType::Date:
      return 4;
    case ColumnType::Float64:
      return 8;
    case ColumnType::Bool:
      return 1;
    case ColumnType::Text:
      return 0;
  }
  return 0;
}

// Distinguishes DATE from INT32 inside the runtime value union.
struct DateDays {
  int32_t days = 0;
  friend bool operator==(DateDays, DateDays) = default;
};

// Tagged runtime value; the generic engine and the statistics code use it.
// Integer values are kept in 64 bits so SUM over INT32 columns does not
// overflow; the catalog-facing type stays Int32.
class Value {
 public:
  Value() = default;  // null

  static Value null() { return Value(); }
  static Value i32(int32_t v) { return Value(Storage(int64_t{v})); }
  static Value i64(int64_t v) { return Value(Storage(v)); }
  static Value f64(double v) { return Value(Storage(v)); }
  static Value text(std::string v) { return Value(Storage(std::move(v))); }
  static Value date(int32_t days) { return Value(Storage(DateDays{days})); }
  static Value boolean(bool v) { return Value(Storage(v)); }

  bool is_null() const { return std::holds_alternative<std::monostate>(v_); }

  ColumnType type() const {
    switch (v_.index()) {
      case 1: return ColumnType::Int32;
      case 2: return ColumnType::Float64;
      case 3: return ColumnType::Text;
      case 4: return ColumnType::Date;
      case 5: return ColumnType::Bool;
    }
    throw_internal("type() on null Value");
  }

  int64_t as_i64() const { return std::get<int64_t>(v_); }
  int32_t as_i32() const { return static_cast<int32_t>(std::get<int64_t>(v_)); }
  double as_f64() const { return std::get<double>(v_); }
  const std::string& as_text() const { return std::get<std::string>(v_); }
  int32_t as_date() const { return std::get<DateDays>(v_).days; }
  bool as_bool() const { return std::get<bool>(v_); }

  // Numeric view: INT32 and FLOAT64 promote to double for mixed arithmetic.
  double numeric() const {
    if (auto* i = std::get_if<int64_t>(&v_)) return static_cast<double>(*i);
    return std::get<double>(v_);
  }

  friend bool operator==(const Value&, const Value&) = default;

  std::string to_string() const;  // text form used by result serialization

 private:
  using Storage = std::variant<std::monostate, int64_t, double, std::string,
                               DateDays, bool>;
  explicit Value(Storage v) : v_(std::move(v)) {}
  Storage v_;
};

// Parses a raw text field into a typed Value. Empty text means NULL for
// nullable columns; for non-null columns it is a parse failure (except TEXT,
// where empty is a valid string). Returns nullopt on malformed input.
std::optional<Value> parse_field(std::string_view text, ColumnType type,
                                 bool nullable);

}  // namespace rawq
