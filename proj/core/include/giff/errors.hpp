#pragma once

#include <stdexcept>
#include <string>

namespace giff {

// Root of every exception the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define GIFF_DEFINE_ERROR(Name)           \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  }

// Argument outside the domain of a fairness function.
GIFF_DEFINE_ERROR(DomainError);
// Malformed FairnessSpec, QTable, GiffParams or AllocationProblem.
GIFF_DEFINE_ERROR(SpecError);
GIFF_DEFINE_ERROR(LengthMismatch);
GIFF_DEFINE_ERROR(ShapeError);

GIFF_DEFINE_ERROR(Infeasible);
GIFF_DEFINE_ERROR(CapExceeded);
GIFF_DEFINE_ERROR(NotBipartite);

GIFF_DEFINE_ERROR(ProtocolError);
GIFF_DEFINE_ERROR(SchemaError);
GIFF_DEFINE_ERROR(InfeasibleWindow);

GIFF_DEFINE_ERROR(UnsupportedMetric);
GIFF_DEFINE_ERROR(BoundViolation);
GIFF_DEFINE_ERROR(MonotoneViolation);

GIFF_DEFINE_ERROR(DivideByZero);
GIFF_DEFINE_ERROR(ConfigError);

#undef GIFF_DEFINE_ERROR

// Malformed input file; carries the 1-based row and the column name.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row, std::string column)
      : Error(what + " (row " + std::to_string(row) + ", column '" + column + "')"),
        row_(row),
        column_(std::move(column)) {}

  std::size_t row() const { return row_; }
  const std::string& column() const { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

}  // namespace giff
