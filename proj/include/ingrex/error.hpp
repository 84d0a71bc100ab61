#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ingrex {

enum class ErrorCode {
  OutOfRange,
  DuplicateEdge,
  EmptyGraph,
  DimensionMismatch,
  InvalidParams,
  InvalidConfig,
  ShapeMismatch,
  MisalignedMask,
  BadDistribution,
  TargetOutOfRange,
  IncompatibleModel,
  TooManyFeatures,
  TooFewSamples,
  EmptySample,
  DatasetMismatch,
  NoSameClassItem,
  NoDiffClassItem,
  NotFound,
  ParseError,
};

std::string_view to_string(ErrorCode code);

// Every domain failure in the library is reported through this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ingrex
