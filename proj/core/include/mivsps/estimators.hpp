#pragma once

#include "mivsps/regression.hpp"

namespace mivsps {

// (Phi'Phi)^{-1} Phi'Y via QR; DegeneracyError when Phi'Phi is singular.
Matrix ls_estimate(const RegressionData& data);

// (Psi'Phi)^{-1} Psi'Y; DegeneracyError when Psi'Phi is singular.
Matrix iv_estimate(const RegressionData& data);

// Confidence ellipsoid from the asymptotic normality of the vectorized IV
// estimate: {theta : (theta - center)' R_n (theta - center) <= radius_sq},
// radius_sq = mu * sigma2 / N with N = n * dx scalar observations.
struct AsymptoticEllipsoid {
    Vector center;
    Matrix shape;  // R_n, symmetric PSD
    double radius_sq = 0.0;
    double sigma2 = 0.0;
    double p = 0.0;
    double mu = 0.0;

    bool contains(const Vector& theta) const;
};

AsymptoticEllipsoid asymptotic_region(const VectorizedProblem& problem, double p);

}  // namespace mivsps
