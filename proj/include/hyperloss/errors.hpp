#ifndef HYPERLOSS_ERRORS_HPP_
#define HYPERLOSS_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace hyperloss {

/// Bad argument to a library call (out-of-range fraction, index, non-finite value).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A state that violates positivity / the uncertainty relation.
class InvalidState : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed spec document or override. `where` names the field path or line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string where, const std::string& what)
      : std::runtime_error(where.empty() ? what : where + ": " + what), where_(std::move(where)) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

class InvalidProblem : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hyperloss

#endif  // HYPERLOSS_ERRORS_HPP_
