#include "rawq/types.hpp"

#include <charconv>
#include <cstdio>

#include "rawq/dates.hpp"

namespace rawq {

std::string_view type_name(ColumnType t) {
  switch (t) {
    case ColumnType::Int32: return "INT32";
    case ColumnType::Float64: return "FLOAT64";
    case ColumnType::Text: return "TEXT";
    case ColumnType::Date: return "DATE";
    case ColumnType::Bool: return "BOOL";
  }
  return "?";
}

std::optional<ColumnType> type_from_name(std::string_view name) {
  if (name == "INT32") return ColumnType::Int32;
  if (name == "FLOAT64") return ColumnType::Float64;
  if (name == "TEXT") return ColumnType::Text;
  if (name == "DATE") return ColumnType::Date;
  if (name == "BOOL") return ColumnType::Bool;
  return std::nullopt;
}

std::string Value::to_string() const {
  if (is_null()) return "NULL";
  switch (type()) {
    case ColumnType::Int32:
      return std::to_string(as_i64());
    case ColumnType::Float64: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", as_f64());
      return buf;
    }
    case ColumnType::Text:
      return as_text();
    case ColumnType::Date:
      return format_date(as_date());
    case ColumnType::Bool:
      return as_bool() ? "true" : "false";
  }
  return "?";
}

std::optional<Value> parse_field(std::string_view s, ColumnType type,
                                 bool nullable) {
  if (s.empty() && type != ColumnType::Text) {
    if (nullable) return Value::null();
    return std::nullopt;
  }
  switch (type) {
    case ColumnType::Int32: {
      int32_t v;
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
      return Value::i32(v);
    }
    case ColumnType::Float64: {
      double v;
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
      return Value::f64(v);
    }
    case ColumnType::Text:
      return Value::text(std::string(s));
    case ColumnType::Date: {
      auto d = parse_date(s);
      if (!d) return std::nullopt;
      return Value::date(*d);
    }
    case ColumnType::Bool: {
      if (s == "t" || s == "true" || s == "1") return Value::boolean(true);
      if (s == "f" || s == "false" || s == "0") return Value::boolean(false);
      return std::nullopt;
    }
  }
  return std::nullopt;
}

}  // namespace rawq
