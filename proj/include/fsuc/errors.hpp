#pragma once
#include <stdexcept>
#include <string>

namespace fsuc {

enum class ErrorKind {
  config,      // bad input files, schemas, arguments
  validation,  // domain invariant violated
  numeric,     // divergence, bracket failure, domain errors
  solver,      // backend missing or failed
  assessment,  // empty/degenerate assessment
  io,          // file system failures
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, msg); }

}  // namespace fsuc
