#pragma once

#include <stdexcept>
#include <string>

namespace fracpois {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad input: out-of-domain parameters, malformed grids, unsupported variants.
class InvalidParam : public Error {
public:
    using Error::Error;
};

class NonConvergence : public Error {
public:
    using Error::Error;
};

class QuadratureFailure : public Error {
public:
    using Error::Error;
};

class RootFindingFailure : public Error {
public:
    using Error::Error;
};

class NumericalInstability : public Error {
public:
    using Error::Error;
};

// A refinement study could not reach a verdict on the grid it was given.
class StepTooCoarse : public Error {
public:
    using Error::Error;
};

// Raised by the series evaluators when the partial sums lose more digits
// than the caller allows.  The ratio max|term| / |sum| is attached.
class CancellationWarning : public Error {
public:
    CancellationWarning(const std::string& what, double ratio)
        : Error(what), ratio_(ratio) {}
    double ratio() const noexcept { return ratio_; }

private:
    double ratio_;
};

}  // namespace fracpois
