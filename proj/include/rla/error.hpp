#pragma once

#include <stdexcept>
#include <string>

namespace rla {

/// Bad caller-supplied value (out-of-range field, malformed row, ...).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The rates or mean do not describe a population with mean above 1/2,
/// so there is no positive Kelly bet.
class InfeasibleAlternative : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ExhaustedPopulation : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class InfeasibleCounts : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// No finite deterministic sample size exists (zero margin).
class DivergenceError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class UndefinedRatio : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A sweep document does not match the expected layout. `field()` names the
/// offending JSON path.
class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Aborts the process; used for states the arithmetic can never reach when
/// every documented precondition holds.
[[noreturn]] void invariant_violation(const char* file, int line, const std::string& message);

#define RLA_INVARIANT(cond, msg)                            \
  do {                                                      \
    if (!(cond)) ::rla::invariant_violation(__FILE__, __LINE__, (msg)); \
  } while (0)

}  // namespace rla
