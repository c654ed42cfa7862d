#pragma once

#include <stdexcept>
#include <string>

namespace tailforce {

/// Raised for every contract violation: bad inputs, malformed files, numerical
/// preconditions that do not hold. The message always names what failed.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tailforce
