#pragma once

#include <stdexcept>
#include <string>

namespace ordq {

// Base class of every error thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define ORDQ_ERROR_TYPE(Name)                                       \
  class Name : public Error {                                      \
   public:                                                          \
    explicit Name(const std::string& what) : Error(what) {}         \
  };

// Shape or size mismatch between operands.
ORDQ_ERROR_TYPE(DimensionError)
// A probability component required to be positive is zero.
ORDQ_ERROR_TYPE(ZeroComponent)
// Jaggedness order outside {0, 1, 2}.
ORDQ_ERROR_TYPE(UnsupportedOrder)
// Fewer than the minimum number of nonzero paired differences.
ORDQ_ERROR_TYPE(TooFewPairs)
// Empty input where at least one element is required.
ORDQ_ERROR_TYPE(EmptyInput)
// Training data unusable (e.g. a class absent from the labels).
ORDQ_ERROR_TYPE(DegenerateData)
// A class has fewer members than the number of CV folds.
ORDQ_ERROR_TYPE(TooFewPerClass)
// A class required by a transfer estimate is absent.
ORDQ_ERROR_TYPE(MissingClass)
// A feature is constant, so equal-width bins cannot be formed.
ORDQ_ERROR_TYPE(DegenerateFeature)
// A prior distribution has a zero component.
ORDQ_ERROR_TYPE(ZeroPrior)
// Method name not recognized.
ORDQ_ERROR_TYPE(UnknownMethod)
// Requested split sizes exceed the available data.
ORDQ_ERROR_TYPE(InsufficientData)
// Sample drawing failed repeatedly against the pool.
ORDQ_ERROR_TYPE(Unsatisfiable)
// Configuration file or option is invalid.
ORDQ_ERROR_TYPE(ConfigError)
// Input data file is malformed.
ORDQ_ERROR_TYPE(DataError)
// Filesystem read/write failure.
ORDQ_ERROR_TYPE(IoError)

#undef ORDQ_ERROR_TYPE

}  // namespace ordq
