#pragma once

#include "mivsps/regression.hpp"
#include "mivsps/rng.hpp"

#include <cstdint>
#include <vector>

namespace mivsps {

// Confidence level p = 1 - q / m with integers m > q > 0.
struct SpsConfig {
    int m = 100;
    int q = 10;
    std::uint64_t seed = 0;

    double p() const { return 1.0 - static_cast<double>(q) / m; }

    // Smallest m admitting an integer q with 1 - q/m == p (to 1e-12), up to max_m.
    static SpsConfig from_probability(double p, std::uint64_t seed, int max_m = 10000);
};

void validate(const SpsConfig& config);

using SignMatrix = Eigen::Matrix<std::int8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Row i-1 holds the diagonal of Lambda_i (entries +-1); pi is a uniformly
// random permutation of {0, ..., m-1} used only to break exact ties.
struct SpsRandomness {
    SignMatrix signs;  // (m-1) x n
    std::vector<int> pi;

    int m() const { return static_cast<int>(pi.size()); }
    int n() const { return static_cast<int>(signs.cols()); }

    static SpsRandomness generate(int m, int n, std::uint64_t seed);
};

void validate(const SpsRandomness& randomness, int m, int n);

struct SpsEvaluation {
    std::vector<double> norms;  // |S_0|_F^2, |S_1|_F^2, ..., |S_{m-1}|_F^2
    int rank = 0;               // 1 + #{i >= 1 : S_0 ranks above S_i}
};

// Matrix-variate IV sign-perturbed-sums region. Immutable after construction;
// evaluate and indicator are safe to call concurrently.
//
// Construction caches P_n = Psi'Psi / n with its principal square root and
// inverse square root, V_n = Psi'Phi / n, the IV estimate and the perturbed
// moment matrices Q_i = Psi' Lambda_i Phi / n and M_i = Psi' Lambda_i Y / n,
// so a membership query costs O(m d^2 dx) instead of O(m n d dx).
class SpsRegion {
public:
    SpsRegion(RegressionData data, SpsConfig config);
    SpsRegion(RegressionData data, SpsConfig config, SpsRandomness randomness);

    SpsEvaluation evaluate(const Matrix& theta) const;
    bool indicator(const Matrix& theta) const;

    const RegressionData& data() const { return data_; }
    const SpsConfig& config() const { return config_; }
    const SpsRandomness& randomness() const { return randomness_; }
    const Matrix& P() const { return P_; }
    const Matrix& P_sqrt() const { return P_sqrt_; }
    const Matrix& P_inv_sqrt() const { return P_inv_sqrt_; }
    const Matrix& P_inv() const { return P_inv_; }
    const Matrix& V() const { return V_; }
    const Matrix& iv_estimate() const { return theta_iv_; }
    // Perturbation i in 1 .. m-1.
    const Matrix& Q(int i) const { return Q_.at(i - 1); }
    const Matrix& M(int i) const { return M_.at(i - 1); }

private:
    void initialize();

    RegressionData data_;
    SpsConfig config_;
    SpsRandomness randomness_;
    Matrix P_, P_sqrt_, P_inv_sqrt_, P_inv_, V_, theta_iv_, M0_;
    std::vector<Matrix> Q_, M_;
};

// Rank of the reference value among all values under the tie-breaking order
// a >_pi b  <=>  a > b or (a == b and pi(ia) > pi(ib)).
int sps_rank(const std::vector<double>& norms, const std::vector<int>& pi);

// Region on the vectorized problem, with (m-1) x (n * dx) signs drawn from config.seed.
SpsRegion make_scalar_region(const VectorizedProblem& problem, const SpsConfig& config);

bool scalar_indicator(const VectorizedProblem& problem, const SpsConfig& config,
                      const SpsRandomness& randomness, const Vector& theta);

}  // namespace mivsps
