#pragma once

#include <stdexcept>
#include <string>

namespace dynkde {

/// Base class for every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad bandwidth, empty sample, ...).
class InvalidArgument : public Error
{
public:
  using Error::Error;
};

/// A numerical procedure failed to produce a trustworthy value.
class NumericalError : public Error
{
public:
  using Error::Error;
};

/// A simulated orbit collapsed onto a fixed point or left the state space.
class DegenerateOrbit : public NumericalError
{
public:
  using NumericalError::NumericalError;
};

namespace detail {

inline void require(bool condition, const std::string& message)
{
  if (!condition)
    throw InvalidArgument(message);
}

} // namespace detail
} // namespace dynkde
