#pragma once

#include <stdexcept>
#include <string>

namespace fibtower {

// Enclosures too wide to decide a sign, an ordering or a membership.
class PrecisionExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The parameter bracket does not separate the target kneading sequence.
class BracketFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A floor that should be mapped monotonically contains the turning point.
class MonotonicityFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An adic path is not determined far enough to apply the requested map.
class DepthInsufficient : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fibtower
