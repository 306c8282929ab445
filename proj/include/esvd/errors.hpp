#pragma once

#include <stdexcept>
#include <string>

namespace esvd {

// Exit-code taxonomy: 1 usage/config, 2 data, 3 numerical/solver.
struct Error : std::runtime_error {
  Error(std::string msg, int code) : std::runtime_error(std::move(msg)), exit_code(code) {}
  int exit_code;
};

struct UsageError : Error {
  explicit UsageError(const std::string& msg) : Error(msg, 1) {}
};

struct DataError : Error {
  explicit DataError(const std::string& msg) : Error(msg, 2) {}
};
struct SchemaError : DataError {
  using DataError::DataError;
};
struct GroupSizeError : DataError {
  using DataError::DataError;
};

struct NumericError : Error {
  explicit NumericError(const std::string& msg) : Error(msg, 3) {}
};
struct InputError : NumericError {  // non-finite or malformed numeric input
  using NumericError::NumericError;
};
struct ShapeError : NumericError {
  using NumericError::NumericError;
};
struct PositiveDefinitenessError : NumericError {
  using NumericError::NumericError;
};
struct BracketError : NumericError {  // root-finder bracket carries no sign change
  using NumericError::NumericError;
};
struct SolverError : NumericError {
  using NumericError::NumericError;
};
struct SingularityError : NumericError {
  using NumericError::NumericError;
};
struct DivergenceError : NumericError {  // NaN loss during training
  using NumericError::NumericError;
};

}  // namespace esvd
