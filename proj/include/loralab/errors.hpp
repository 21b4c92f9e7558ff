#pragma once

#include <stdexcept>
#include <string>

namespace loralab {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ShapeError : Error { using Error::Error; };
struct IndexError : Error { using Error::Error; };
struct InputError : Error { using Error::Error; };
struct RangeError : Error { using Error::Error; };
struct StateError : Error { using Error::Error; };
struct LookupError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };
struct DivergenceError : Error { using Error::Error; };
struct DeterminismError : Error { using Error::Error; };
struct UndefinedMetricError : Error { using Error::Error; };

}  // namespace loralab
