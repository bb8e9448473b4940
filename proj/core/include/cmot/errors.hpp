#pragma once

#include <stdexcept>
#include <string>

namespace cmot {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// measure / coupling validation
class AllZeroWeightsError : public Error {
  public:
    using Error::Error;
};
class NegativeWeightError : public Error {
  public:
    using Error::Error;
};
class ZeroMassRowError : public Error {
  public:
    using Error::Error;
};

// linear programming
class DimensionMismatchError : public Error {
  public:
    using Error::Error;
};
class NumericalBreakdownError : public Error {
  public:
    using Error::Error;
};

// feasibility / transport
class TargetsOutsideCandidatesError : public Error {
  public:
    using Error::Error;
};
class UnboundedCostError : public Error {
  public:
    using Error::Error;
};

// monotonicity
class NoAdmissibleExchangeError : public Error {
  public:
    using Error::Error;
};

// multi-period
class MarginalMismatchError : public Error {
  public:
    using Error::Error;
};
class GridOverflowError : public Error {
  public:
    using Error::Error;
};

// io
class SchemaViolationError : public Error {
  public:
    using Error::Error;
};
class IoError : public Error {
  public:
    using Error::Error;
};

}  // namespace cmot
