#pragma once

#include <stdexcept>
#include <string>

namespace rmtcov {

// Base class for all library failures.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Self-consistent-equation solver ran out of its iteration budget.
struct NonConvergence : Error {
    NonConvergence(const std::string& what, double residual_, int guard_trips_)
        : Error(what), residual(residual_), guard_trips(guard_trips_) {}
    double residual;   // |f(m) - z| at the final iterate
    int guard_trips;   // how often the Herglotz sign guard fired
};

// Expected sign change of f' not found during the support scan.
struct EdgeDetectionFailure : Error {
    using Error::Error;
};

struct QuadratureFailure : Error {
    using Error::Error;
};

// |w + m sigma_i| collapsed; forbidden on the admissible domain.
struct SingularPencil : Error {
    using Error::Error;
};

// Spectral parameter too close to a sample eigenvalue or to zero.
struct PoleHit : Error {
    using Error::Error;
};

struct DegenerateSpectrum : Error {
    using Error::Error;
};

struct DenominatorNearZero : Error {
    using Error::Error;
};

struct NonSPD : Error {
    using Error::Error;
};

struct NonInvertible : Error {
    using Error::Error;
};

// beta(w1,w2) = |1 - t_12 b_12| below threshold; X_12 would be unstable.
struct NearSingularStability : Error {
    using Error::Error;
};

// File-format failure; carries the 1-based line number when known.
struct IoError : Error {
    IoError(const std::string& what, long line_ = -1) : Error(what), line(line_) {}
    long line;
};

}  // namespace rmtcov
