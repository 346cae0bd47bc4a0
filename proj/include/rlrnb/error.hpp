#pragma once

#include <stdexcept>
#include <string>

namespace rlrnb {

/// Raised on any contract violation: malformed input, unknown class, invalid parameters.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rlrnb
