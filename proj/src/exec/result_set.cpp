#include "rawq/exec/result_set.hpp"

#include <json.hpp>

namespace rawq::exec {

std::string ResultSet::to_delimited(char delimiter) const {
  std::string out;
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) out += delimiter;
      if (!row[i].is_null()) out += row[i].to_string();
    }
    out += '\n';
  }
  return out;
}

std::string ResultSet::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& row : rows) {
    nlohmann::json jrow = nlohmann::json::array();
    for (const auto& v : row) {
      if (v.is_null()) {
        jrow.push_back(nullptr);
        continue;
      }
      switch (v.type()) {
        case ColumnType::Int32: jrow.push_back(v.as_i64()); break;
        case ColumnType::Float64: jrow.push_back(v.as_f64()); break;
        case ColumnType::Text: jrow.push_back(v.as_text()); break;
        case ColumnType::Date: jrow.push_back(v.to_string()); break;
        case ColumnType::Bool: jrow.push_back(v.as_bool()); break;
      }
    }
    arr.push_back(std::move(jrow));
  }
  return arr.dump();
}

}  // namespace rawq::exec
