#include "rawq/codegen/template_engine.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rawq/error.hpp"

#ifndef RAWQ_TEMPLATE_DIR
#define RAWQ_TEMPLATE_DIR ""
#endif

namespace rawq::codegen {
namespace {

// One foreach frame: `var.key` resolves against `element` while the frame is
// in scope.
struct Frame {
  std::string var;
  const Bindings* element;
};

class Renderer {
 public:
  Renderer(std::string_view text, const Bindings& root) : text_(text) {
    frames_.push_back(Frame{"", &root});
  }

  std::string run() {
    std::string out;
    render_range(0, text_.size(), out);
    return out;
  }

 private:
  // Splits "a.b" into frame lookup; bare names resolve in any frame, inner
  // scopes first, so foreach variables shadow the root bindings.
  const std::string* find_var(const std::string& name) const {
    auto dot = name.find('.');
    for (auto it = frames_.rbegin(); it != frames_.rend(); ++it) {
      const Bindings& b = *it->element;
      if (dot != std::string::npos) {
        if (it->var != name.substr(0, dot)) continue;
        auto f = b.vars.find(name.substr(dot + 1));
        return f == b.vars.end() ? nullptr : &f->second;
      }
      auto f = b.vars.find(name);
      if (f != b.vars.end()) return &f->second;
    }
    return nullptr;
  }

  const bool* find_flag(const std::string& name) const {
    auto dot = name.find('.');
    for (auto it = frames_.rbegin(); it != frames_.rend(); ++it) {
      const Bindings& b = *it->element;
      if (dot != std::string::npos) {
        if (it->var != name.substr(0, dot)) continue;
        auto f = b.flags.find(name.substr(dot + 1));
        return f == b.flags.end() ? nullptr : &f->second;
      }
      auto f = b.flags.find(name);
      if (f != b.flags.end()) return &f->second;
    }
    return nullptr;
  }

  const std::vector<Bindings>* find_list(const std::string& name) const {
    auto dot = name.find('.');
    for (auto it = frames_.rbegin(); it != frames_.rend(); ++it) {
      const Bindings& b = *it->element;
      if (dot != std::string::npos) {
        if (it->var != name.substr(0, dot)) continue;
        auto f = b.lists.find(name.substr(dot + 1));
        return f == b.lists.end() ? nullptr : &f->second;
      }
      auto f = b.lists.find(name);
      if (f != b.lists.end()) return &f->second;
    }
    return nullptr;
  }

  // Finds the @end matching the construct that opened right before `from`,
  // skipping nested @foreach/@if pairs. Returns the offset of its '@'.
  size_t find_end(size_t from) const {
    int depth = 1;
    size_t i = from;
    while (i < text_.size()) {
      size_t at = text_.find('@', i);
      if (at == std::string_view::npos) break;
      if (text_.compare(at, 2, "@@") == 0) {
        i = at + 2;
        continue;
      }
      if (text_.compare(at, 9, "@foreach(") == 0 ||
          text_.compare(at, 4, "@if(") == 0) {
        ++depth;
        i = at + 4;
        continue;
      }
      if (text_.compare(at, 4, "@end") == 0) {
        if (--depth == 0) return at;
        i = at + 4;
        continue;
      }
      i = at + 1;
    }
    throw_internal("template: unterminated construct (missing @end)");
  }

  void render_range(size_t begin, size_t end, std::string& out) {
    size_t i = begin;
    while (i < end) {
      size_t at = text_.find('@', i);
      if (at == std::string_view::npos || at >= end) {
        out.append(text_, i, end - i);
        return;
      }
      out.append(text_, i, at - i);
      if (text_.compare(at, 2, "@@") == 0) {
        out += '@';
        i = at + 2;
        continue;
      }
      if (text_.compare(at, 2, "@{") == 0) {
        size_t close = text_.find('}', at + 2);
        if (close == std::string_view::npos || close >= end)
          throw_internal("template: unterminated @{...}");
        std::string name(text_.substr(at + 2, close - at - 2));
        const std::string* v = find_var(name);
        if (!v) throw_internal("template: unbound placeholder '" + name + "'");
        out += *v;
        i = close + 1;
        continue;
      }
      if (text_.compare(at, 9, "@foreach(") == 0) {
        size_t close = text_.find(')', at + 9);
        if (close == std::string_view::npos || close >= end)
          throw_internal("template: unterminated @foreach(");
        std::string header(text_.substr(at + 9, close - at - 9));
        size_t in_pos = header.find(" in ");
        if (in_pos == std::string::npos)
          throw_internal("template: @foreach wants 'var in LIST', got '" +
                         header + "'");
        std::string var = header.substr(0, in_pos);
        std::string list_name = header.substr(in_pos + 4);
        size_t body_begin = close + 1;
        size_t end_at = find_end(body_begin);
        const std::vector<Bindings>* list = find_list(list_name);
        if (!list)
          throw_internal("template: unbound list '" + list_name + "'");
        for (const Bindings& element : *list) {
          frames_.push_back(Frame{var, &element});
          render_range(body_begin, end_at, out);
          frames_.pop_back();
        }
        i = end_at + 4;
        continue;
      }
      if (text_.compare(at, 4, "@if(") == 0) {
        size_t close = text_.find(')', at + 4);
        if (close == std::string_view::npos || close >= end)
          throw_internal("template: unterminated @if(");
        std::string name(text_.substr(at + 4, close - at - 4));
        bool negate = !name.empty() && name[0] == '!';
        if (negate) name.erase(0, 1);
        size_t body_begin = close + 1;
        size_t end_at = find_end(body_begin);
        const bool* flag = find_flag(name);
        if (!flag) throw_internal("template: unbound flag '" + name + "'");
        if (*flag != negate) render_range(body_begin, end_at, out);
        i = end_at + 4;
        continue;
      }
      if (text_.compare(at, 4, "@end") == 0)
        throw_internal("template: @end without an open construct");
      throw_internal("template: stray '@' at offset " + std::to_string(at));
    }
  }

  std::string_view text_;
  std::vector<Frame> frames_;
};

}  // namespace

std::string render(std::string_view tmpl, const Bindings& bindings) {
  return Renderer(tmpl, bindings).run();
}

std::string load_template(const std::string& name) {
  std::vector<std::filesystem::path> candidates;
  if (const char* env = std::getenv("RAWQ_TEMPLATES"))
    candidates.emplace_back(env);
  std::error_code ec;
  auto exe = std::filesystem::read_symlink("/proc/self/exe", ec);
  if (!ec) {
    candidates.push_back(exe.parent_path() / "templates");
    candidates.push_back(exe.parent_path().parent_path() / "templates");
  }
  if (RAWQ_TEMPLATE_DIR[0] != '\0') candidates.emplace_back(RAWQ_TEMPLATE_DIR);

  for (const auto& dir : candidates) {
    std::filesystem::path p = dir / name;
    std::ifstream in(p, std::ios::binary);
    if (!in) continue;
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
  }
  throw_env("template '" + name + "' not found; set RAWQ_TEMPLATES");
}

}  // namespace rawq::codegen
