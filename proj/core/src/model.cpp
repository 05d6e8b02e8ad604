#include "mivsps/model.hpp"

#include "mivsps/linalg.hpp"

#include <cmath>
#include <sstream>

namespace mivsps {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double fair_sign(Rng& rng) { return (rng() >> 63) != 0 ? 1.0 : -1.0; }

double laplace(double scale, Rng& rng) {
    std::exponential_distribution<double> exponential(1.0);
    return fair_sign(rng) * scale * exponential(rng);
}

enum Stream : std::uint64_t { kReferenceStream = 1, kNoiseStream = 2 };

}  // namespace

std::string noise_tag(const NoiseModel& noise) {
    return std::visit(Overloaded{
                          [](const IidGaussian&) { return std::string("gaussian"); },
                          [](const BimodalGaussianMixture&) { return std::string("bimodal_gaussian"); },
                          [](const TimeVaryingLaplacianMixture&) { return std::string("laplace_mixture"); },
                      },
                      noise);
}

void validate(const NoiseModel& noise) {
    std::visit(Overloaded{
                   [](const IidGaussian& g) {
                       if (!(g.sigma >= 0.0)) throw Error("noise: gaussian sigma must be >= 0");
                   },
                   [](const BimodalGaussianMixture& g) {
                       if (!(g.sigma_w > 0.0)) throw Error("noise: bimodal sigma_w must be > 0");
                       if (!std::isfinite(g.mu)) throw Error("noise: bimodal mu must be finite");
                   },
                   [](const TimeVaryingLaplacianMixture& l) {
                       if (!(l.sigma_w > 0.0)) throw Error("noise: laplace sigma_w must be > 0");
                       if (l.horizon < 1) throw Error("noise: laplace horizon must be >= 1");
                   },
               },
               noise);
}

Vector sample_noise(const NoiseModel& noise, int k, int dx, Rng& rng) {
    Vector w(dx);
    std::visit(Overloaded{
                   [&](const IidGaussian& g) {
                       std::normal_distribution<double> normal(0.0, 1.0);
                       for (int j = 0; j < dx; ++j) w(j) = g.sigma * normal(rng);
                   },
                   [&](const BimodalGaussianMixture& g) {
                       std::normal_distribution<double> normal(0.0, 1.0);
                       const double shift = fair_sign(rng) * g.mu;
                       const double sd = std::sqrt(g.sigma_w);
                       for (int j = 0; j < dx; ++j) w(j) = shift + sd * normal(rng);
                   },
                   [&](const TimeVaryingLaplacianMixture& l) {
                       const double t = static_cast<double>(k + 1) / l.horizon;
                       const double shift = fair_sign(rng) * 5.0 * t;
                       const double scale = t + l.sigma_w;
                       for (int j = 0; j < dx; ++j) w(j) = shift + laplace(scale, rng);
                   },
               },
               noise);
    return w;
}

SystemSpec make_system(Matrix A, Matrix B, Matrix K, double epsilon, NoiseModel noise) {
    SystemSpec spec;
    const auto du = B.cols();
    spec.F = epsilon * K;
    spec.G = (1.0 - epsilon) * Matrix::Identity(du, du);
    spec.A = std::move(A);
    spec.B = std::move(B);
    spec.K = std::move(K);
    spec.epsilon = epsilon;
    spec.noise = std::move(noise);
    return spec;
}

void validate(const SystemSpec& spec) {
    const auto dx = spec.A.rows();
    if (dx < 1 || spec.A.cols() != dx) throw DimensionError("system: A must be square and non-empty");
    if (spec.B.rows() != dx || spec.B.cols() < 1) throw DimensionError("system: B must be dx x du");
    const auto du = spec.B.cols();
    if (spec.F.rows() != du || spec.F.cols() != dx) throw DimensionError("system: F must be du x dx");
    if (spec.G.rows() != du || spec.G.cols() < 1) throw DimensionError("system: G must be du x dr");
    if (spec.K.size() != 0 && (spec.K.rows() != du || spec.K.cols() != dx)) {
        throw DimensionError("system: K must be du x dx");
    }
    if (!(spec.epsilon >= 0.0 && spec.epsilon <= 1.0)) throw Error("system: epsilon must lie in [0, 1]");
    validate(spec.noise);
    const double rho = linalg::spectral_radius(spec.closed_loop_C());
    if (!(rho < 1.0)) {
        std::ostringstream msg;
        msg << "system: closed loop A + B F is not stable (spectral radius " << rho << ")";
        throw Error(msg.str());
    }
}

Matrix synthesize_lqr(const Matrix& A, const Matrix& B, double q_weight, double v_weight,
                      double rel_tol, int max_iterations) {
    const auto dx = A.rows();
    const auto du = B.cols();
    if (A.cols() != dx || B.rows() != dx) throw DimensionError("lqr: A must be dx x dx and B dx x du");
    if (!(q_weight > 0.0) || !(v_weight > 0.0)) throw Error("lqr: cost weights must be positive");

    const Matrix Q = q_weight * Matrix::Identity(dx, dx);
    const Matrix R = v_weight * Matrix::Identity(du, du);
    Matrix P = Q;
    bool converged = false;
    for (int it = 0; it < max_iterations; ++it) {
        const Matrix BtP = B.transpose() * P;
        const Matrix gain = (R + BtP * B).ldlt().solve(BtP * A);
        Matrix next = Q + A.transpose() * P * A - A.transpose() * P * B * gain;
        next = linalg::symmetrize(next);
        if (!next.allFinite() || next.norm() > 1e100) {
            throw ConvergenceError("lqr: Riccati iteration diverged; (A, B) is not stabilizable");
        }
        const double change = (next - P).norm();
        P = std::move(next);
        if (change <= rel_tol * P.norm()) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw ConvergenceError("lqr: Riccati iteration did not converge within the iteration limit");
    }
    const Matrix BtP = B.transpose() * P;
    Matrix K = -(R + BtP * B).ldlt().solve(BtP * A);
    const double rho = linalg::spectral_radius(A + B * K);
    if (!(rho < 1.0)) {
        throw ConvergenceError("lqr: closed loop is not stable; (A, B) is not stabilizable");
    }
    return K;
}

StableSystem random_stable_system(int dx, int du, double target_radius, std::uint64_t seed) {
    if (dx < 1 || du < 1) throw DimensionError("random_stable_system: dimensions must be positive");
    if (!(target_radius > 0.0 && target_radius < 1.0)) {
        throw Error("random_stable_system: target radius must lie in (0, 1)");
    }
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(1.0, 10.0);
    StableSystem out;
    for (;;) {
        Matrix M(dx, dx);
        for (Eigen::Index j = 0; j < M.cols(); ++j)
            for (Eigen::Index i = 0; i < M.rows(); ++i) M(i, j) = normal(rng);
        const double rho = linalg::spectral_radius(M);
        if (rho > 0.0) {
            out.A = M * (target_radius / rho);
            break;
        }
    }
    out.B.resize(dx, du);
    for (Eigen::Index j = 0; j < out.B.cols(); ++j)
        for (Eigen::Index i = 0; i < out.B.rows(); ++i) out.B(i, j) = uniform(rng);
    return out;
}

namespace {

Trajectory run(const SystemSpec& spec, std::vector<Vector> references, const Vector& x0, Rng& noise_rng) {
    const int n = static_cast<int>(references.size());
    const int dx = spec.dx();
    if (x0.size() != dx) throw DimensionError("simulate: x0 has wrong dimension");
    Trajectory traj;
    traj.x.reserve(n + 1);
    traj.u.reserve(n);
    traj.w.reserve(n);
    traj.x.push_back(x0);
    for (int k = 0; k < n; ++k) {
        const Vector& x = traj.x.back();
        Vector u = spec.F * x + spec.G * references[k];
        Vector w = sample_noise(spec.noise, k, dx, noise_rng);
        Vector next = spec.A * x + spec.B * u + w;
        if (!next.allFinite() || next.norm() > kStateOverflowGuard) {
            std::ostringstream msg;
            msg << "simulate: unstable trajectory (state norm exceeded " << kStateOverflowGuard
                << " at step " << k + 1 << ")";
            throw UnstableTrajectoryError(msg.str());
        }
        traj.u.push_back(std::move(u));
        traj.w.push_back(std::move(w));
        traj.x.push_back(std::move(next));
    }
    traj.r = std::move(references);
    return traj;
}

}  // namespace

Trajectory simulate(const SystemSpec& spec, int n, const Vector& x0, std::uint64_t seed) {
    if (n < 1) throw Error("simulate: n must be >= 1");
    validate(spec);
    Rng reference_rng(derive_seed(seed, kReferenceStream));
    Rng noise_rng(derive_seed(seed, kNoiseStream));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<Vector> references;
    references.reserve(n);
    for (int k = 0; k < n; ++k) {
        Vector r(spec.dr());
        for (int j = 0; j < r.size(); ++j) r(j) = normal(reference_rng);
        references.push_back(std::move(r));
    }
    return run(spec, std::move(references), x0, noise_rng);
}

Trajectory simulate_with_references(const SystemSpec& spec, std::vector<Vector> references,
                                    const Vector& x0, std::uint64_t seed) {
    if (references.empty()) throw Error("simulate: n must be >= 1");
    validate(spec);
    for (const auto& r : references) {
        if (r.size() != spec.dr()) throw DimensionError("simulate: reference has wrong dimension");
    }
    Rng noise_rng(derive_seed(seed, kNoiseStream));
    return run(spec, std::move(references), x0, noise_rng);
}

Trajectory simulate(const SystemSpec& spec, int n, std::uint64_t seed) {
    return simulate(spec, n, Vector::Zero(spec.dx()), seed);
}

}  // namespace mivsps
