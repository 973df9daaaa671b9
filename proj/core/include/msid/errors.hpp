#pragma once

#include <stdexcept>
#include <string>

namespace msid {

// Invalid physical or algorithmic parameters (moduli out of range, bad
// mesh sizes, malformed configuration). Maps to CLI exit code 2.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Degenerate or inconsistent geometry (zero-area triangle, point outside
// element).
class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Linear solver failure: singular or indefinite system, or residual above
// the contract tolerance.
class SolveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// RSA circle placement exceeded the rejection budget (volume fraction too
// high for the requested size factor).
class PackingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An objective evaluation could not produce a value. The optimizer treats
// this as a rejected trial point.
class ObjectiveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace msid
