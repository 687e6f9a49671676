#pragma once

#include <stdexcept>
#include <string>

namespace qphase {

/// Base class for every error raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// A parameter is outside its admissible domain.
class InvalidArgument : public Error
{
public:
    using Error::Error;
};

/// An index (Fock level, subsystem, ...) is outside its range.
class OutOfRange : public Error
{
public:
    using Error::Error;
};

/// Operands live on different composite spaces.
class DimensionMismatch : public Error
{
public:
    using Error::Error;
};

/// Population reached the top Fock level; the truncation is too small.
class TruncationError : public Error
{
public:
    using Error::Error;
};

/// Integer arithmetic would overflow 64 bits.
class NumericOverflow : public Error
{
public:
    using Error::Error;
};

/// An iterative construction did not reach its target.
class ConvergenceError : public Error
{
public:
    using Error::Error;
};

/// The slope of a measured signal vanishes, so error propagation diverges.
class DivergentUncertainty : public Error
{
public:
    using Error::Error;
};

/// A bound does not exist (e.g. no damping means no size limit).
class Unbounded : public Error
{
public:
    using Error::Error;
};

} // namespace qphase
