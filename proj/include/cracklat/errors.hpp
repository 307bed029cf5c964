#pragma once

#include <stdexcept>
#include <string>

#include "cracklat/lattice.hpp"

namespace cracklat {

// Iterative solve hit its iteration cap; carries the last residual.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double residual, long iterations)
        : std::runtime_error(what), residual(residual), iterations(iterations) {}

    double residual;
    long iterations;
};

// A bond strain entered the non-differentiable band around Z + 1/2 during
// equilibration: the small-load regime is left and the honest output is a
// diagnosis, not a clamped solution.
class BifurcationError : public std::runtime_error {
public:
    BifurcationError(const std::string& what, Bond bond, double strain)
        : std::runtime_error(what), bond(bond), strain(strain) {}

    Bond bond;
    double strain;
};

// A strain form whose tree integral fails the mod-1 closure test.
class InconsistentStrainError : public std::runtime_error {
public:
    InconsistentStrainError(const std::string& what, Bond bond, double defect)
        : std::runtime_error(what), bond(bond), defect(defect) {}

    Bond bond;
    double defect;
};

// A bond strain sits exactly at (or within the guard band of) a
// half-integer, where the pair potential has no derivative.
class NonDifferentiableError : public std::runtime_error {
public:
    NonDifferentiableError(const std::string& what, Bond bond, double strain)
        : std::runtime_error(what), bond(bond), strain(strain) {}

    Bond bond;
    double strain;
};

// A bond strain lies within the guard band of Z + 1/2, so the Hessian is
// not defined there and no stability statement can be made.
class StabilityIndeterminateError : public std::runtime_error {
public:
    StabilityIndeterminateError(const std::string& what, Bond bond, double strain)
        : std::runtime_error(what), bond(bond), strain(strain) {}

    Bond bond;
    double strain;
};

class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace cracklat
