#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace rawq {

// Error categories map 1:1 onto CLI exit codes: User -> 2, Env -> 3,
// Internal -> 4.
enum class ErrorKind {
  User,      // bad query, bad schema, malformed input data
  Env,       // missing files, missing toolchain, I/O failures
  Internal,  // broken invariant inside the engine
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string msg)
      : std::runtime_error(std::move(msg)), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void throw_user(std::string msg) {
  throw Error(ErrorKind::User, std::move(msg));
}

[[noreturn]] inline void throw_env(std::string msg) {
  throw Error(ErrorKind::Env, std::move(msg));
}

[[noreturn]] inline void throw_internal(std::string msg) {
  throw Error(ErrorKind::Internal, std::move(msg));
}

}  // namespace rawq
