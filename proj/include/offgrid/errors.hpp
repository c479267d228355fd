#pragma once

#include <stdexcept>
#include <string>

namespace offgrid {

enum class ErrorKind {
  Config,      // malformed or unknown configuration input
  Domain,      // argument outside the mathematical domain of an operation
  Assumption,  // a required analytic assumption fails numerically
  Structural,  // inconsistent sizes, singular systems, bad state
  Io           // file read/write failures
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

inline void require(bool cond, ErrorKind kind, const std::string& msg) {
  if (!cond) fail(kind, msg);
}

}  // namespace offgrid
