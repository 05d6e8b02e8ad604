#pragma once

#include "mivsps/types.hpp"

namespace mivsps::linalg {

double spectral_radius(const Matrix& m);

// 2-norm condition number via singular values; +inf when rank deficient.
double condition_number(const Matrix& m);

// Principal square root and inverse square root of a symmetric positive
// definite matrix. Throws DegeneracyError(name) when the smallest eigenvalue
// is below rel_tol * largest.
struct SymmetricRoots {
    Matrix sqrt;
    Matrix inv_sqrt;
    Matrix inverse;
};
SymmetricRoots symmetric_roots(const Matrix& p, const std::string& name,
                               double rel_tol = 1e-12);

// Solves lhs * X = rhs with column-pivoted QR after checking cond(lhs).
Matrix solve_checked(const Matrix& lhs, const Matrix& rhs, const std::string& name,
                     double max_condition = 1e12);

inline Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace mivsps::linalg
