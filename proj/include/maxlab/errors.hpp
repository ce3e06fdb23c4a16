#pragma once

#include <stdexcept>
#include <string>

namespace maxlab {

/// Input that violates a documented precondition (non-monotone breakpoints,
/// nonzero end values, malformed rationals, ...).
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Radius constraint whose feasible set is empty, e.g. the short-range
/// operator evaluated exactly on a partition point.
class DegenerateConstraint : public std::runtime_error {
public:
  explicit DegenerateConstraint(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace maxlab
