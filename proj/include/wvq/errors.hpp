#pragma once

#include <stdexcept>
#include <string>

namespace wvq {

enum class ErrorKind {
  InvalidParameter,
  Unstable,
  DegenerateRoots,
  UnsupportedThresholdShape,
  NumericalInstability,
  SingularSystem,
  ConvergenceFailure,
  InsufficientSamples,
  DivisionHazard,
};

const char* to_string(ErrorKind kind) noexcept;

/// Base of every error raised by the library. Callers that only care about
/// the category can switch on kind(); the subclasses exist for catch sites.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidParameter : public Error {
 public:
  InvalidParameter(std::string field, double value);
  const std::string& field() const noexcept { return field_; }
  double value() const noexcept { return value_; }

 private:
  std::string field_;
  double value_;
};

class Unstable : public Error {
 public:
  Unstable(std::string ratio_name, double ratio);
  const std::string& ratio_name() const noexcept { return ratio_name_; }
  double ratio() const noexcept { return ratio_; }

 private:
  std::string ratio_name_;
  double ratio_;
};

#define WVQ_SIMPLE_ERROR(Name)                                   \
  class Name : public Error {                                    \
   public:                                                       \
    explicit Name(const std::string& what)                       \
        : Error(ErrorKind::Name, #Name ": " + what) {}           \
  };

WVQ_SIMPLE_ERROR(DegenerateRoots)
WVQ_SIMPLE_ERROR(UnsupportedThresholdShape)
WVQ_SIMPLE_ERROR(NumericalInstability)
WVQ_SIMPLE_ERROR(SingularSystem)
WVQ_SIMPLE_ERROR(ConvergenceFailure)
WVQ_SIMPLE_ERROR(InsufficientSamples)
WVQ_SIMPLE_ERROR(DivisionHazard)

#undef WVQ_SIMPLE_ERROR

}  // namespace wvq
