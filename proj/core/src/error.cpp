#include "cuts/error.hpp"

namespace cuts {

std::string_view to_string(ErrorClass c) {
  switch (c) {
    case ErrorClass::kInvalidInput:
      return "invalid-input";
    case ErrorClass::kContractViolation:
      return "contract-violation";
    case ErrorClass::kNumerical:
      return "numerical-failure";
    case ErrorClass::kIo:
      return "io-error";
  }
  return "unknown";
}

}  // namespace cuts
