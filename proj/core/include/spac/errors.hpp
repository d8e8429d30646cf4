#pragma once

#include <stdexcept>
#include <string>

namespace spac {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SPAC_DEFINE_ERROR(Name)            \
  class Name : public Error {              \
   public:                                 \
    using Error::Error;                    \
  }

SPAC_DEFINE_ERROR(ShapeMismatch);
SPAC_DEFINE_ERROR(DomainError);
SPAC_DEFINE_ERROR(LengthMismatch);
SPAC_DEFINE_ERROR(ConvergenceFailure);
SPAC_DEFINE_ERROR(ZeroDistance);
SPAC_DEFINE_ERROR(DegenerateEigenvalues);
SPAC_DEFINE_ERROR(BudgetTooSmall);
SPAC_DEFINE_ERROR(BudgetTooLarge);
SPAC_DEFINE_ERROR(MissingLabels);
SPAC_DEFINE_ERROR(MissingFeatures);
SPAC_DEFINE_ERROR(UnlabeledTarget);
SPAC_DEFINE_ERROR(InconsistentDims);
SPAC_DEFINE_ERROR(InvalidArgument);

#undef SPAC_DEFINE_ERROR

class IsolatedNode : public Error {
 public:
  explicit IsolatedNode(int node)
      : Error("node " + std::to_string(node) + " has zero degree"), node_(node) {}
  int node() const { return node_; }

 private:
  int node_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& file, int line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace spac
