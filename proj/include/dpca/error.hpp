#pragma once

#include <stdexcept>
#include <string>

namespace dpca {

/// Broad failure class; the CLI maps each onto an exit code.
enum class ErrorKind {
  Usage,      // bad parameter or range
  Data,       // malformed or inconsistent input
  Numerical,  // factorization failure or broken numeric invariant
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void throw_usage(const std::string& msg) {
  throw Error(ErrorKind::Usage, msg);
}
[[noreturn]] inline void throw_data(const std::string& msg) {
  throw Error(ErrorKind::Data, msg);
}
[[noreturn]] inline void throw_numerical(const std::string& msg) {
  throw Error(ErrorKind::Numerical, msg);
}

}  // namespace dpca
