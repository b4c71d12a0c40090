#pragma once

#include <stdexcept>
#include <string>

namespace lln {

/// Argument outside the region where an operation is defined.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The tail function has no finite second moment, so W[T] and the
/// bounds built on it do not exist.
class InfiniteMomentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical search could not capture the quantity it was asked for
/// (e.g. a supremum that sits on the search boundary).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lln
