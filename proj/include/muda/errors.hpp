#pragma once

#include <stdexcept>
#include <string>

namespace muda {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A cumulative value sequence whose marginals increase somewhere.
class DmrViolation : public Error {
public:
    using Error::Error;
};

/// A valuation with no units at all.
class EmptyValuation : public Error {
public:
    using Error::Error;
};

/// A unit count outside [0, cap] passed to a gain computation.
class UnitsOutOfRange : public Error {
public:
    using Error::Error;
};

/// Malformed input file (JSON market, order-book CSV). Message names the
/// offending field or line.
class ParseError : public Error {
public:
    using Error::Error;
};

/// An order record with quantity <= 0.
class NonPositiveQuantity : public ParseError {
public:
    using ParseError::ParseError;
};

/// Invalid experiment parameters.
class InvalidSpec : public Error {
public:
    using Error::Error;
};

/// Structurally invalid market (duplicate ids, valuation longer than the
/// per-trader unit cap).
class InvalidMarket : public Error {
public:
    using Error::Error;
};

}  // namespace muda
