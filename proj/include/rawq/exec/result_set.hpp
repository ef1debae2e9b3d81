#pragma once

#include <string>
#include <vector>

#include "rawq/types.hpp"

namespace rawq::exec {

struct ResultSet {
  std::vector<std::string> names;
  std::vector<ColumnType> types;
  std::vector<std::vector<Value>> rows;

  // Delimited text, one row per line; NULL serializes as an empty field.
  std::string to_delimited(char delimiter) const;
  // JSON array of arrays, NULL as null; used by tests and --format json.
  std::string to_json() const;
};

}  // namespace rawq::exec
