#pragma once

#include <stdexcept>
#include <string>

namespace ekl {

/// Thrown when a shape or structure contract is violated, e.g. a matrix
/// dimension that is not divisible by the declared block size.
class StructuralError : public std::invalid_argument {
 public:
  explicit StructuralError(const std::string& what) : std::invalid_argument(what) {}
};

/// Thrown when a centered kernel alignment is requested for matrices whose
/// centered counterpart vanishes, so the cosine is undefined.
class UndefinedAlignmentError : public std::runtime_error {
 public:
  explicit UndefinedAlignmentError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ekl
