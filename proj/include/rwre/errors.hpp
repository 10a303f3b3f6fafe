#pragma once

#include <stdexcept>

namespace rwre {

/// Invalid parameter or precondition violation (CLI exit status 2).
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Too few resolved samples for the requested estimate (CLI exit status 3).
class InsufficientData : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A hypercube whose interior chain cannot be left.
class DegenerateEnvironment : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A discovery policy read a site outside the discovered prefix.
class MeasurabilityViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace rwre
