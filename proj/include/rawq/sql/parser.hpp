#pragma once

#include <string_view>

#include "rawq/sql/ast.hpp"

namespace rawq::sql {

// Parses one SELECT statement. Literal-only arithmetic is folded during the
// parse, including DATE 'd' + INTERVAL 'n' YEAR, so the returned tree never
// contains an Arith node with two literal children nor an IntervalLit.
// Throws Error(User) with 1-based line and column on malformed input.
QueryAst parse(std::string_view text);

}  // namespace rawq::sql
