#pragma once

#include <stdexcept>
#include <string>

namespace svm {

// Base for every failure raised by the library. Subclasses name the
// condition so callers (and the CLI exit-code mapping) can dispatch on type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SVM_DEFINE_ERROR(Name)                  \
  class Name : public Error {                   \
   public:                                      \
    explicit Name(const std::string& what)      \
        : Error(std::string(#Name ": ") + what) {} \
  }

SVM_DEFINE_ERROR(SingularKineticMatrix);
SVM_DEFINE_ERROR(InvalidParameters);
SVM_DEFINE_ERROR(ParameterMismatch);
SVM_DEFINE_ERROR(BoxTooSmall);
SVM_DEFINE_ERROR(PhaseUndefined);
SVM_DEFINE_ERROR(DisconnectedSupport);
SVM_DEFINE_ERROR(EosRangeError);
SVM_DEFINE_ERROR(CflViolation);
SVM_DEFINE_ERROR(NegativeDensity);
SVM_DEFINE_ERROR(InsufficientSlices);
SVM_DEFINE_ERROR(EmptyBin);
SVM_DEFINE_ERROR(ConfigMismatch);
SVM_DEFINE_ERROR(ConfigError);
SVM_DEFINE_ERROR(NumericalFailure);

#undef SVM_DEFINE_ERROR

}  // namespace svm
