#pragma once

#include "mivsps/sps.hpp"

#include <limits>
#include <vector>

namespace mivsps {

// Quadratic constraint Tr(Z'AZ + Z'B + B'Z + C) <= 0 in the whitened
// coordinates Z = P_n^{-1/2} V_n (Theta - Theta_iv). It encodes
// |S_0(Theta)|^2 <= |S_i(Theta)|^2, and its left side equals
// |S_0|^2 - |S_i|^2.
struct DualInstance {
    Matrix A;  // d x d, I - T with T = W'W PSD
    Matrix B;  // d x dx
    Matrix C;  // dx x dx, negative semidefinite
    int index = 0;

    int schur_block_size() const { return static_cast<int>(A.rows() + B.cols()); }
};

DualInstance build_dual(const SpsRegion& region, int i);

// Weak-duality bound on max |Z|_F^2 subject to the instance's constraint:
//
//   gamma* = min over lambda >= 0 with lambda A - I PSD of
//            h(lambda) = lambda^2 Tr(B'(lambda A - I)^{-1} B) - lambda Tr(C),
//
// the value of the Schur-complement program
//   min Tr(Gamma - lambda C)  s.t.  [lambda A - I, lambda B; lambda B', Gamma] PSD.
// h is convex on its domain; when A is not positive definite the domain is
// empty and gamma* = +inf (the constraint set is unbounded).
struct DualSolution {
    double gamma = std::numeric_limits<double>::infinity();
    double lambda = std::numeric_limits<double>::infinity();
    bool bounded = false;
};

DualSolution solve_dual(const DualInstance& instance);

// Objective h(lambda); +inf outside the feasible domain.
double dual_objective(const DualInstance& instance, double lambda);

// Smallest feasible multiplier 1 / lambda_min(A); +inf when A is not PD.
double dual_lower_limit(const DualInstance& instance);

constexpr double kDualPdTolerance = 1e-12;

struct Ellipsoid {
    Matrix center;  // Theta_iv, d x dx
    Matrix map;     // P_n^{-1/2} V_n, d x d
    double radius_sq = std::numeric_limits<double>::infinity();
    bool bounded = false;

    double distance_sq(const Matrix& theta) const;
    bool contains(const Matrix& theta) const;
};

struct OuterApproximation {
    Ellipsoid ellipsoid;
    std::vector<double> gammas;  // gamma*_i for i = 1 .. m-1
    int block_size = 0;          // side of the Schur-complement constraint matrix
};

// q-th largest of the m-1 dual values; duals are solved in parallel when
// threads > 1 and aggregated by index.
OuterApproximation outer_approximation(const SpsRegion& region, int threads = 1);

// Same pipeline on the vectorized problem (d_theta-space ellipsoid).
OuterApproximation vectorized_outer_approximation(const VectorizedProblem& problem,
                                                  const SpsConfig& config,
                                                  const SpsRandomness& randomness,
                                                  int threads = 1);

// q-th largest element (1-based); +inf entries count as largest.
double qth_largest(std::vector<double> values, int q);

}  // namespace mivsps
