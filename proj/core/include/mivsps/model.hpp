#pragma once

#include "mivsps/rng.hpp"
#include "mivsps/types.hpp"

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace mivsps {

// ---------------------------------------------------------------------------
// Process noise families. All are symmetric about zero as vector
// distributions; the two mixtures share a single sign across coordinates, so
// their components are correlated.
// ---------------------------------------------------------------------------

struct IidGaussian {
    double sigma = 1.0;  // standard deviation of every coordinate
};

// w = s * mu * 1 + g with s a fair sign and g ~ N(0, sigma_w I).
// sigma_w is a covariance scale, matching N(mu 1, sigma_w I).
struct BimodalGaussianMixture {
    double mu = 1.0;
    double sigma_w = 1.0;
};

// w_k = s * 5 (k+1)/n * 1 + l, s a fair sign and l with independent Laplace
// coordinates of scale (k+1)/n + sigma_w. Non-stationary in k.
struct TimeVaryingLaplacianMixture {
    double sigma_w = 1.0;
    int horizon = 1;
};

using NoiseModel = std::variant<IidGaussian, BimodalGaussianMixture, TimeVaryingLaplacianMixture>;

// Short tag used in configs and CSV output: gaussian, bimodal_gaussian, laplace_mixture.
std::string noise_tag(const NoiseModel& noise);

// Throws Error on invalid parameters (non-positive scales, horizon < 1).
void validate(const NoiseModel& noise);

// Draws w_k (d_x coordinates) for time index k.
Vector sample_noise(const NoiseModel& noise, int k, int dx, Rng& rng);

// ---------------------------------------------------------------------------
// Closed-loop system x_{k+1} = A x_k + B u_k + w_k, u_k = F x_k + G r_k.
// ---------------------------------------------------------------------------

struct SystemSpec {
    Matrix A;  // dx x dx
    Matrix B;  // dx x du
    Matrix K;  // du x dx, LQR gain with u = K x convention
    double epsilon = 0.0;
    NoiseModel noise = IidGaussian{};
    // General feedback u = F x + G r. make_system sets F = epsilon K and
    // G = (1 - epsilon) I; library callers may overwrite both.
    Matrix F;
    Matrix G;

    int dx() const { return static_cast<int>(A.rows()); }
    int du() const { return static_cast<int>(B.cols()); }
    int dr() const { return static_cast<int>(G.cols()); }

    // Closed-loop matrices of the indirect form x_{k+1} = C x_k + D r_k + w_k.
    Matrix closed_loop_C() const { return A + B * F; }
    Matrix closed_loop_D() const { return B * G; }
};

SystemSpec make_system(Matrix A, Matrix B, Matrix K, double epsilon, NoiseModel noise);

// Dimension and stability checks; throws DimensionError / Error.
void validate(const SystemSpec& spec);

struct Trajectory {
    std::vector<Vector> x;  // x_0 .. x_n
    std::vector<Vector> u;  // u_0 .. u_{n-1}
    std::vector<Vector> r;  // r_0 .. r_{n-1}
    std::vector<Vector> w;  // w_0 .. w_{n-1}, diagnostics only

    int length() const { return static_cast<int>(u.size()); }
};

// Infinite-horizon discrete LQR for cost q|x|^2 + v|u|^2. Returns K with the
// convention u = K x (the minus sign is absorbed).
Matrix synthesize_lqr(const Matrix& A, const Matrix& B, double q_weight, double v_weight,
                      double rel_tol = 1e-12, int max_iterations = 100000);

struct StableSystem {
    Matrix A;
    Matrix B;
};

// A = M * target_radius / rho(M) with M ~ N(0,1) entries; B entries ~ U(1, 10).
StableSystem random_stable_system(int dx, int du, double target_radius, std::uint64_t seed);

constexpr double kStateOverflowGuard = 1e12;

Trajectory simulate(const SystemSpec& spec, int n, const Vector& x0, std::uint64_t seed);
Trajectory simulate(const SystemSpec& spec, int n, std::uint64_t seed);

// Same dynamics with caller-supplied references r_0 .. r_{n-1}.
Trajectory simulate_with_references(const SystemSpec& spec, std::vector<Vector> references,
                                    const Vector& x0, std::uint64_t seed);

}  // namespace mivsps
