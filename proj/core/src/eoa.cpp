#include "mivsps/eoa.hpp"

#include "mivsps/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <thread>

namespace mivsps {

DualInstance build_dual(const SpsRegion& region, int i) {
    if (i < 1 || i >= region.config().m) throw Error("build_dual: index out of range");
    const Matrix& V = region.V();
    // V^{-1} P^{1/2}
    const Matrix v_inv_root =
        linalg::solve_checked(V, region.P_sqrt(), "V_n", kDegeneracyCondition);
    const Matrix& Q = region.Q(i);
    const Matrix W = region.P_inv_sqrt() * Q * v_inv_root;
    const Matrix G = region.P_inv_sqrt() * (region.M(i) - Q * region.iv_estimate());

    DualInstance out;
    out.index = i;
    const auto d = W.rows();
    out.A = Matrix::Identity(d, d) - W.transpose() * W;
    out.B = W.transpose() * G;
    out.C = -(G.transpose() * G);
    return out;
}

namespace {

// Spectral form of h: with A = U diag(a) U', beta_j = |row j of U'B|^2 and
// gap_j = 1/a_min - 1/a_j >= 0, the shifted variable t = lambda - 1/a_min
// keeps every denominator a_j (t + gap_j) strictly positive for t > 0.
struct SpectralDual {
    Vector a;
    Vector beta;
    Vector gap;
    double lower = 0.0;   // 1 / a_min
    double trace_c = 0.0; // Tr(C) <= 0

    double value(double t) const {
        const double lambda = lower + t;
        double sum = 0.0;
        for (Eigen::Index j = 0; j < a.size(); ++j) {
            if (beta(j) == 0.0) continue;
            sum += beta(j) * lambda * lambda / (a(j) * (t + gap(j)));
        }
        return sum - lambda * trace_c;
    }

    double slope(double t) const {
        const double lambda = lower + t;
        double sum = 0.0;
        for (Eigen::Index j = 0; j < a.size(); ++j) {
            if (beta(j) == 0.0) continue;
            const double denom = a(j) * (t + gap(j));
            sum += beta(j) * lambda * (lambda * a(j) - 2.0) / (denom * denom);
        }
        return sum - trace_c;
    }
};

}  // namespace

double dual_lower_limit(const DualInstance& instance) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(linalg::symmetrize(instance.A),
                                              Eigen::EigenvaluesOnly);
    const double a_min = eig.eigenvalues().minCoeff();
    if (!(a_min > kDualPdTolerance)) return std::numeric_limits<double>::infinity();
    return 1.0 / a_min;
}

double dual_objective(const DualInstance& instance, double lambda) {
    const auto d = instance.A.rows();
    const Matrix shifted = lambda * instance.A - Matrix::Identity(d, d);
    Eigen::LLT<Matrix> llt(linalg::symmetrize(shifted));
    if (!(lambda >= 0.0) || llt.info() != Eigen::Success) {
        return std::numeric_limits<double>::infinity();
    }
    const Matrix solved = llt.solve(instance.B);
    return lambda * lambda * (instance.B.transpose() * solved).trace() - lambda * instance.C.trace();
}

DualSolution solve_dual(const DualInstance& instance) {
    const auto d = instance.A.rows();
    if (instance.A.cols() != d || instance.B.rows() != d || instance.C.rows() != instance.B.cols() ||
        instance.C.cols() != instance.B.cols()) {
        throw DimensionError("solve_dual: inconsistent instance dimensions");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(linalg::symmetrize(instance.A));
    if (eig.info() != Eigen::Success) throw ConvergenceError("solve_dual: eigendecomposition failed");

    SpectralDual dual;
    dual.a = eig.eigenvalues();
    const double a_min = dual.a.minCoeff();
    DualSolution out;
    if (!(a_min > kDualPdTolerance)) {
        return out;  // unbounded
    }
    dual.lower = 1.0 / a_min;
    dual.gap = dual.lower - dual.a.cwiseInverse().array();
    dual.gap = dual.gap.cwiseMax(0.0);
    dual.beta = (eig.eigenvectors().transpose() * instance.B).rowwise().squaredNorm();
    dual.trace_c = instance.C.trace();

    // Bracket the root of the (nondecreasing) slope in t.
    double hi = dual.lower;
    int doublings = 0;
    while (dual.slope(hi) < 0.0) {
        hi *= 2.0;
        if (++doublings > 2000 || !std::isfinite(hi)) {
            throw ConvergenceError("solve_dual: failed to bracket the minimizer");
        }
    }
    double lo = 0.0;
    for (int it = 0; it < 400 && hi - lo > 1e-15 * (dual.lower + hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (dual.slope(mid) < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Any feasible multiplier gives a valid bound; keep the smaller value.
    double best_t = hi;
    double best = dual.value(hi);
    if (lo > 0.0) {
        const double at_lo = dual.value(lo);
        if (at_lo < best) {
            best = at_lo;
            best_t = lo;
        }
    }
    out.gamma = std::max(best, 0.0);
    out.lambda = dual.lower + best_t;
    out.bounded = std::isfinite(out.gamma);
    return out;
}

double Ellipsoid::distance_sq(const Matrix& theta) const {
    if (theta.rows() != center.rows() || theta.cols() != center.cols()) {
        throw DimensionError("ellipsoid: parameter has wrong shape");
    }
    return (map * (theta - center)).squaredNorm();
}

bool Ellipsoid::contains(const Matrix& theta) const {
    const double dist = distance_sq(theta);
    return !bounded || dist <= radius_sq;
}

double qth_largest(std::vector<double> values, int q) {
    if (q < 1 || q > static_cast<int>(values.size())) throw Error("qth_largest: q out of range");
    std::nth_element(values.begin(), values.begin() + (q - 1), values.end(), std::greater<>());
    return values[q - 1];
}

namespace {

void for_each_index(int count, int threads, const std::function<void(int)>& body) {
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            for (int i = t; i < count; i += threads) body(i);
        });
    }
    for (auto& worker : pool) worker.join();
}

}  // namespace

OuterApproximation outer_approximation(const SpsRegion& region, int threads) {
    const int m = region.config().m;
    const int q = region.config().q;
    OuterApproximation out;
    out.gammas.assign(m - 1, std::numeric_limits<double>::infinity());
    std::vector<std::exception_ptr> failures(m - 1);
    for_each_index(m - 1, threads, [&](int idx) {
        try {
            out.gammas[idx] = solve_dual(build_dual(region, idx + 1)).gamma;
        } catch (...) {
            failures[idx] = std::current_exception();
        }
    });
    for (const auto& failure : failures) {
        if (failure) std::rethrow_exception(failure);
    }
    out.block_size = region.data().d() + region.data().outputs();
    out.ellipsoid.center = region.iv_estimate();
    out.ellipsoid.map = region.P_inv_sqrt() * region.V();
    out.ellipsoid.radius_sq = qth_largest(out.gammas, q);
    out.ellipsoid.bounded = std::isfinite(out.ellipsoid.radius_sq);
    return out;
}

OuterApproximation vectorized_outer_approximation(const VectorizedProblem& problem,
                                                  const SpsConfig& config,
                                                  const SpsRandomness& randomness,
                                                  int threads) {
    const SpsRegion region(problem.as_regression(), config, randomness);
    return outer_approximation(region, threads);
}

}  // namespace mivsps
