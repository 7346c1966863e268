#pragma once

#include <stdexcept>
#include <string>

namespace ionmirror
{

// Base for every error raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// A parameter violated a documented invariant.
class InvalidArgument : public Error
{
public:
    using Error::Error;
};

// The trace-constrained stationary system is rank deficient
// (degenerate stationary manifold, e.g. dark states at zero field).
class SingularSystem : public Error
{
public:
    using Error::Error;
};

// A computed density matrix violated the positivity floor.
class NonPhysical : public Error
{
public:
    using Error::Error;
};

// Adaptive integration could not meet the requested tolerance.
class StepFailure : public Error
{
public:
    using Error::Error;
};

// A fringe contrast is below the floor, so its phase is meaningless.
class UndefinedPhase : public Error
{
public:
    using Error::Error;
};

// Design matrix of a sinusoid fit is rank deficient.
class DegenerateGrid : public Error
{
public:
    using Error::Error;
};

// Model evaluation failed at the initial point of a fit.
class BadInitial : public Error
{
public:
    using Error::Error;
};

} // namespace ionmirror
