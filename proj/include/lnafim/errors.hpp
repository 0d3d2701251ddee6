#pragma once

#include <stdexcept>
#include <string>

namespace lnafim {

/// Bad user input: malformed model/design/parameter files, undeclared
/// symbols, invalid flags. The CLI maps this to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure inside the pipeline. `stage()` names the step that
/// failed (e.g. "integrate_lna", "assemble_moments"). CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// Rate-expression evaluation failure (division by zero, log/sqrt domain).
class EvalError : public NumericalError {
 public:
  explicit EvalError(const std::string& what) : NumericalError("eval", what) {}
};

}  // namespace lnafim
