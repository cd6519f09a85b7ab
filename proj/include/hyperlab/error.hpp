#pragma once

#include <stdexcept>
#include <string>

namespace hyperlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on the inputs was violated (dimension, domain, range).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed its own accuracy or convergence check.
class NumericalError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void require(bool cond, const std::string& what) {
  if (!cond) throw DomainError(what);
}

}  // namespace detail
}  // namespace hyperlab
