#pragma once

#include <stdexcept>
#include <string>

namespace ttw {

enum class ErrorKind {
  InvalidInput,   // malformed documents, dangling references, bad arguments
  Infeasible,     // no schedule exists under the given constraints
  BudgetExhausted // solver gave up before reaching a verdict
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail_input(const std::string& what) {
  throw Error(ErrorKind::InvalidInput, what);
}

}  // namespace ttw
