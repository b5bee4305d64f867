#pragma once

#include <stdexcept>
#include <string>

namespace rlos {

/// Data carries no information for estimation (zero variance, all ties).
class DegenerateDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure could not produce a usable result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rlos
