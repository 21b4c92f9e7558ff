#pragma once

#include <string>

#include "loralab/matrix.hpp"

namespace loralab {

// A named model parameter. The value matrix is the single source of truth;
// gradients live on tapes and optimizer state lives in the optimizer, both
// keyed by the parameter's address/name.
struct Param {
  std::string name;
  Matrix value;
  bool trainable = true;

  long count() const { return long(value.size()); }
};

}  // namespace loralab
