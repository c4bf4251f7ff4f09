#pragma once

#include <stdexcept>
#include <string>

namespace grom3 {

// Base classes map onto the CLI exit codes: usage -> 1, data -> 2, numeric -> 3.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ColumnMismatch : NumericError {
  explicit ColumnMismatch(const std::string& m) : NumericError("ColumnMismatch: " + m) {}
};
struct DimGuard : NumericError {
  explicit DimGuard(const std::string& m) : NumericError("DimGuard: " + m) {}
};
struct CategoryOutOfRange : NumericError {
  explicit CategoryOutOfRange(const std::string& m) : NumericError("CategoryOutOfRange: " + m) {}
};
struct SameVariable : NumericError {
  explicit SameVariable(const std::string& m) : NumericError("SameVariable: " + m) {}
};
struct UnknownScenario : UsageError {
  explicit UnknownScenario(const std::string& m) : UsageError("UnknownScenario: " + m) {}
};
struct GroupTooSmall : NumericError {
  explicit GroupTooSmall(const std::string& m) : NumericError("GroupTooSmall: " + m) {}
};
struct NotDirichletConsistent : NumericError {
  explicit NotDirichletConsistent(const std::string& m)
      : NumericError("NotDirichletConsistent: " + m) {}
};
struct ShapeMismatch : NumericError {
  explicit ShapeMismatch(const std::string& m) : NumericError("ShapeMismatch: " + m) {}
};
struct LengthMismatch : NumericError {
  explicit LengthMismatch(const std::string& m) : NumericError("LengthMismatch: " + m) {}
};
struct TooFewSamples : NumericError {
  explicit TooFewSamples(const std::string& m) : NumericError("TooFewSamples: " + m) {}
};
struct AllDiscarded : NumericError {
  explicit AllDiscarded(const std::string& m) : NumericError("AllDiscarded: " + m) {}
};
struct DegenerateMembership : NumericError {
  explicit DegenerateMembership(const std::string& m)
      : NumericError("DegenerateMembership: " + m) {}
};
struct ParseError : DataError {
  explicit ParseError(const std::string& m) : DataError("ParseError: " + m) {}
};
struct EmptyAfterFiltering : DataError {
  explicit EmptyAfterFiltering(const std::string& m) : DataError("EmptyAfterFiltering: " + m) {}
};
struct SchemaError : DataError {
  explicit SchemaError(const std::string& m) : DataError("SchemaError: " + m) {}
};

}  // namespace grom3
