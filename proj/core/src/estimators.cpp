#include "mivsps/estimators.hpp"

#include "mivsps/chi_square.hpp"
#include "mivsps/linalg.hpp"

#include <sstream>

namespace mivsps {

Matrix ls_estimate(const RegressionData& data) {
    validate(data, false);
    const double cond = linalg::condition_number(data.Phi.transpose() * data.Phi);
    if (!(cond <= kDegeneracyCondition)) {
        std::ostringstream msg;
        msg << "ls_estimate: Phi'Phi is singular or ill-conditioned (cond " << cond << ")";
        throw DegeneracyError("Phi'Phi", msg.str());
    }
    return data.Phi.colPivHouseholderQr().solve(data.Y);
}

Matrix iv_estimate(const RegressionData& data) {
    validate(data, true);
    return linalg::solve_checked(data.Psi.transpose() * data.Phi, data.Psi.transpose() * data.Y,
                                 "Psi'Phi", kDegeneracyCondition);
}

bool AsymptoticEllipsoid::contains(const Vector& theta) const {
    if (theta.size() != center.size()) throw DimensionError("asymptotic region: wrong parameter length");
    const Vector delta = theta - center;
    return delta.dot(shape * delta) <= radius_sq;
}

AsymptoticEllipsoid asymptotic_region(const VectorizedProblem& problem, double p) {
    if (!(p > 0.0 && p < 1.0)) throw Error("asymptotic_region: p must lie in (0, 1)");
    const int rows = problem.rows();
    const int d_theta = problem.d_theta();
    if (rows <= d_theta) {
        throw DimensionError("asymptotic_region: need n * dx > d_theta scalar observations");
    }
    const RegressionData data = problem.as_regression();
    const double scale = 1.0 / rows;
    const Matrix V = scale * (problem.Psi.transpose() * problem.Xi);
    const Matrix P = scale * (problem.Psi.transpose() * problem.Psi);

    AsymptoticEllipsoid out;
    out.center = iv_estimate(data).col(0);
    const auto roots = linalg::symmetric_roots(P, "P_n");
    out.shape = linalg::symmetrize(V.transpose() * roots.inverse * V);
    const Vector residual = problem.y - problem.Xi * out.center;
    out.sigma2 = residual.squaredNorm() / (rows - d_theta);
    out.p = p;
    out.mu = stats::chi_square_quantile(p, d_theta);
    out.radius_sq = out.mu * out.sigma2 / rows;
    return out;
}

}  // namespace mivsps
