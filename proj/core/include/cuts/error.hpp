#ifndef CUTS_ERROR_HPP_
#define CUTS_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace cuts {

// Diagnostic class carried by every library error. The CLI maps each class
// onto a distinct process exit code.
enum class ErrorClass {
  kInvalidInput = 2,
  kContractViolation = 3,
  kNumerical = 4,
  kIo = 5,
};

std::string_view to_string(ErrorClass c);

class Error : public std::runtime_error {
 public:
  Error(ErrorClass c, const std::string& what)
      : std::runtime_error(what), class_(c) {}
  ErrorClass error_class() const noexcept { return class_; }

 private:
  ErrorClass class_;
};

// Caller passed something outside an operation's preconditions.
class InvalidInput : public Error {
 public:
  explicit InvalidInput(const std::string& what)
      : Error(ErrorClass::kInvalidInput, what) {}
};

// An internal guarantee was broken (e.g. equalizing an empty candidate set).
class ContractViolation : public Error {
 public:
  explicit ContractViolation(const std::string& what)
      : Error(ErrorClass::kContractViolation, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what)
      : Error(ErrorClass::kNumerical, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorClass::kIo, what) {}
};

}  // namespace cuts

#endif  // CUTS_ERROR_HPP_
