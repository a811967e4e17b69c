#pragma once

#include <stdexcept>
#include <string>

namespace okl {

/// Invalid input: wrong sizes, non-finite samples, out-of-range parameters.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A solver failed to converge or to bracket its root.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A checked inequality or identity was violated beyond its tolerance.
class PropertyFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace okl
