#include "mivsps/linalg.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace mivsps::linalg {

double spectral_radius(const Matrix& m) {
    if (m.rows() != m.cols()) {
        throw DimensionError("spectral_radius: matrix is not square");
    }
    if (m.size() == 0) {
        return 0.0;
    }
    Eigen::EigenSolver<Matrix> solver(m, /*computeEigenvectors=*/false);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

double condition_number(const Matrix& m) {
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0) {
        return std::numeric_limits<double>::infinity();
    }
    const double smallest = sv(sv.size() - 1);
    if (!(smallest > 0.0)) {
        return std::numeric_limits<double>::infinity();
    }
    return sv(0) / smallest;
}

SymmetricRoots symmetric_roots(const Matrix& p, const std::string& name, double rel_tol) {
    if (p.rows() != p.cols()) {
        throw DimensionError(name + ": matrix is not square");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(p));
    if (eig.info() != Eigen::Success) {
        throw DegeneracyError(name, name + ": eigendecomposition failed");
    }
    const Vector& values = eig.eigenvalues();
    const double largest = values.maxCoeff();
    const double smallest = values.minCoeff();
    if (!(largest > 0.0) || smallest <= rel_tol * largest) {
        std::ostringstream msg;
        msg << "instrument degeneracy: " << name << " is not positive definite (min eigenvalue "
            << smallest << ", max " << largest << ")";
        throw DegeneracyError(name, msg.str());
    }
    const Matrix& u = eig.eigenvectors();
    const Vector root = values.cwiseSqrt();
    SymmetricRoots out;
    out.sqrt = u * root.asDiagonal() * u.transpose();
    out.inv_sqrt = u * root.cwiseInverse().asDiagonal() * u.transpose();
    out.inverse = u * values.cwiseInverse().asDiagonal() * u.transpose();
    return out;
}

Matrix solve_checked(const Matrix& lhs, const Matrix& rhs, const std::string& name,
                     double max_condition) {
    if (lhs.rows() != lhs.cols() || lhs.rows() != rhs.rows()) {
        throw DimensionError(name + ": incompatible dimensions in linear solve");
    }
    const double cond = condition_number(lhs);
    if (!(cond <= max_condition)) {
        std::ostringstream msg;
        msg << "instrument degeneracy: " << name << " is singular or ill-conditioned (cond "
            << cond << " > " << max_condition << ")";
        throw DegeneracyError(name, msg.str());
    }
    return lhs.colPivHouseholderQr().solve(rhs);
}

}  // namespace mivsps::linalg
