#pragma once

// Instance builders and brute-force oracles shared by the unit tests and the
// acceptance binary. Nothing here calls into the cached SPS machinery.

#include "mivsps/model.hpp"
#include "mivsps/regression.hpp"
#include "mivsps/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace support {

using mivsps::Matrix;
using mivsps::Vector;

struct Instance {
    mivsps::SystemSpec spec;
    mivsps::Trajectory traj;
    mivsps::RegressionData data;  // with instruments
    Matrix truth;
};

inline Instance make_instance(int dx, int du, int n, std::uint64_t seed, double epsilon = 0.0,
                              mivsps::NoiseModel noise = mivsps::IidGaussian{1.0},
                              mivsps::Mode mode = mivsps::Mode::Direct) {
    using namespace mivsps;
    const auto sys = random_stable_system(dx, du, 0.9, derive_seed(seed, 1));
    const Matrix K = synthesize_lqr(sys.A, sys.B, 1.0, 1.0);
    if (auto* lap = std::get_if<TimeVaryingLaplacianMixture>(&noise)) lap->horizon = n;
    Instance out;
    out.spec = make_system(sys.A, sys.B, K, epsilon, noise);
    out.traj = simulate(out.spec, n, derive_seed(seed, 2));
    RegressionData raw =
        mode == Mode::Direct ? build_direct(out.traj) : build_indirect(out.traj, out.spec).data;
    out.data = build_instruments(raw, out.traj);
    out.truth = true_parameter(out.spec, mode);
    return out;
}

inline Matrix inverse_sqrt(const Matrix& p) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(p);
    return eig.operatorInverseSqrt();
}

// Norms |S_i|_F^2 from the raw definition with Lambda_i materialized.
inline std::vector<double> brute_force_norms(const mivsps::RegressionData& data,
                                             const std::vector<std::vector<int>>& signs,
                                             const Matrix& theta) {
    const double n = data.n();
    const Matrix E = data.Y - data.Phi * theta;
    const Matrix W = inverse_sqrt(data.Psi.transpose() * data.Psi / n);
    std::vector<double> out;
    out.push_back((W * data.Psi.transpose() * E / n).squaredNorm());
    for (const auto& row : signs) {
        Matrix lambda = Matrix::Zero(data.n(), data.n());
        for (int k = 0; k < data.n(); ++k) lambda(k, k) = row[k];
        out.push_back((W * data.Psi.transpose() * lambda * E / n).squaredNorm());
    }
    return out;
}

// Largest |Z|_F^2 found on Tr(Z'AZ + Z'B + B'Z + C) <= 0 by random rays and
// hill climbing. Along a ray Z = tD the feasible t form an interval with its
// right end at the larger root of t^2 a + 2 t b + c. Returns +inf if a ray
// with a <= 0 and no finite root is met.
inline double primal_search(const Matrix& A, const Matrix& B, const Matrix& C, int rays,
                            std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double c = C.trace();
    auto reach = [&](const Matrix& D) {
        const double a = (D.transpose() * A * D).trace();
        const double b = (D.transpose() * B).trace();
        if (a == 0.0 && b > 0.0) return -c / (2.0 * b);
        if (a <= 0.0) return std::numeric_limits<double>::infinity();
        const double disc = std::max(0.0, b * b - a * c);
        return (-b + std::sqrt(disc)) / a;
    };
    auto random_direction = [&] {
        Matrix D(B.rows(), B.cols());
        for (Eigen::Index i = 0; i < D.size(); ++i) D.data()[i] = normal(rng);
        return Matrix(D / D.norm());
    };
    Matrix best_dir = random_direction();
    double best = reach(best_dir);
    for (int r = 1; r < rays; ++r) {
        Matrix D = random_direction();
        const double t = reach(D);
        if (t > best) {
            best = t;
            best_dir = D;
        }
    }
    if (std::isinf(best)) return best;
    for (double step = 0.5; step > 1e-9; step *= 0.5) {
        for (int tries = 0; tries < 60; ++tries) {
            Matrix D = best_dir + step * random_direction();
            D /= D.norm();
            const double t = reach(D);
            if (t > best) {
                best = t;
                best_dir = D;
            }
        }
    }
    return best * best;
}

// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
    }
    return d;
}

inline double ks_critical(std::size_t n1, std::size_t n2, double c_alpha = 1.628) {
    return c_alpha * std::sqrt(static_cast<double>(n1 + n2) / (static_cast<double>(n1) * n2));
}

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

}  // namespace support
