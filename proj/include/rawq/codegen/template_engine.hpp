#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace rawq::codegen {

// Bindings for one render: string substitutions for `@{name}`, booleans for
// `@if(name)...@end`, and named lists for `@foreach(var in NAME)...@end`.
// Inside a foreach body the element's entries are reachable as `var.key`;
// scopes nest, inner bindings shadow outer ones.
struct Bindings {
  std::map<std::string, std::string> vars;
  std::map<std::string, bool> flags;
  std::map<std::string, std::vector<Bindings>> lists;
};

// Pure textual expansion. Throws Error(Internal) on an unbound placeholder,
// an unknown list, an unclosed construct, or a stray '@'; the output never
// contains an '@' construct. `@@` escapes a literal '@'.
std::string render(std::string_view tmpl, const Bindings& bindings);

// Loads a template file from the templates directory. Resolution order:
// RAWQ_TEMPLATES env var, then <dir of current executable>/templates and
// ../templates, then the compile-time source directory.
std::string load_template(const std::string& name);

}  // namespace rawq::codegen
