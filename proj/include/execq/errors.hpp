#pragma once

#include <stdexcept>
#include <string>

namespace execq {

// Base for all library errors. CLI maps subtypes to exit codes.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid or inconsistent model/config inputs (CLI exit code 1).
struct InvalidParameter : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

// Operation requires a constant signal but got a time-dependent one.
struct UnsupportedSignal : Error {
    using Error::Error;
};

// Closed-form solver asked to run on clustered/degenerate coefficients.
struct DegenerateCoefficients : Error {
    using Error::Error;
};

// Degenerate solver asked to run on non-zero coefficients.
struct NotDegenerate : Error {
    using Error::Error;
};

// Numerical failures (CLI exit code 2).
struct NumericalBlowup : Error {
    NumericalBlowup(const std::string& what, double tau, int q)
        : Error(what + " at tau=" + std::to_string(tau) + ", q=" + std::to_string(q)),
          tau(tau), q(q) {}
    double tau;
    int q;
};

// Quote requested at zero inventory.
struct NoInventory : Error {
    using Error::Error;
};

// Point-process simulation has no finite bound on the fill intensity.
struct MissingThinningBound : Error {
    using Error::Error;
};

// Exponential-utility payoff overflowed double precision.
struct ExtremePayoff : Error {
    ExtremePayoff(const std::string& what, unsigned long long path_seed)
        : Error(what + " (path seed " + std::to_string(path_seed) + ")"),
          path_seed(path_seed) {}
    unsigned long long path_seed;
};

}  // namespace execq
