#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace mivsps {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Error hierarchy. Every failure the library reports derives from Error so
// callers can catch one type; the subclasses let the Monte Carlo engine tell
// retryable degeneracies from programming mistakes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

// Singular or near-singular data matrices (Phi'Phi, Psi'Phi, P_n, V_n).
// `which` names the failing matrix.
class DegeneracyError : public Error {
public:
    DegeneracyError(std::string which, const std::string& what)
        : Error(what), which_(std::move(which)) {}
    const std::string& which() const noexcept { return which_; }

private:
    std::string which_;
};

class UnstableTrajectoryError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    using Error::Error;
};

// Identification mode: (x, u) regressors or (x, r) regressors with known feedback.
enum class Mode { Direct, Indirect };

inline const char* to_string(Mode mode) {
    return mode == Mode::Direct ? "direct" : "indirect";
}

}  // namespace mivsps
