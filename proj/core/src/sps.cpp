#include "mivsps/sps.hpp"

#include "mivsps/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace mivsps {

SpsConfig SpsConfig::from_probability(double p, std::uint64_t seed, int max_m) {
    if (!(p > 0.0 && p < 1.0)) throw Error("sps: confidence probability must lie in (0, 1)");
    for (int m = 2; m <= max_m; ++m) {
        const double q_real = (1.0 - p) * m;
        const int q = static_cast<int>(std::lround(q_real));
        if (q > 0 && q < m && std::fabs(1.0 - static_cast<double>(q) / m - p) <= 1e-12) {
            return SpsConfig{m, q, seed};
        }
    }
    std::ostringstream msg;
    msg << "sps: no m <= " << max_m << " realizes p = " << p << " exactly";
    throw Error(msg.str());
}

void validate(const SpsConfig& config) {
    if (config.m < 2) throw Error("sps: m must be > 1");
    if (config.q <= 0 || config.q >= config.m) throw Error("sps: q must satisfy 0 < q < m");
}

SpsRandomness SpsRandomness::generate(int m, int n, std::uint64_t seed) {
    if (m < 2 || n < 1) throw Error("sps: randomness needs m > 1 and n >= 1");
    Rng sign_rng(derive_seed(seed, 11));
    SpsRandomness out;
    out.signs.resize(m - 1, n);
    std::uint64_t bits = 0;
    int available = 0;
    for (int i = 0; i < m - 1; ++i) {
        for (int k = 0; k < n; ++k) {
            if (available == 0) {
                bits = sign_rng();
                available = 64;
            }
            out.signs(i, k) = (bits & 1U) != 0 ? std::int8_t{1} : std::int8_t{-1};
            bits >>= 1;
            --available;
        }
    }
    Rng perm_rng(derive_seed(seed, 12));
    out.pi.resize(m);
    std::iota(out.pi.begin(), out.pi.end(), 0);
    for (int i = m - 1; i > 0; --i) {
        std::uniform_int_distribution<int> pick(0, i);
        std::swap(out.pi[i], out.pi[pick(perm_rng)]);
    }
    return out;
}

void validate(const SpsRandomness& randomness, int m, int n) {
    if (randomness.m() != m || randomness.signs.rows() != m - 1 || randomness.n() != n) {
        throw DimensionError("sps: randomness shape does not match (m, n)");
    }
    for (Eigen::Index i = 0; i < randomness.signs.size(); ++i) {
        const auto s = randomness.signs.data()[i];
        if (s != 1 && s != -1) throw Error("sps: sign entries must be +1 or -1");
    }
    std::vector<int> sorted = randomness.pi;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < m; ++i) {
        if (sorted[i] != i) throw Error("sps: pi is not a permutation of {0, ..., m-1}");
    }
}

SpsRegion::SpsRegion(RegressionData data, SpsConfig config)
    : data_(std::move(data)), config_(config) {
    validate(config_);
    validate(data_, true);
    randomness_ = SpsRandomness::generate(config_.m, data_.n(), config_.seed);
    initialize();
}

SpsRegion::SpsRegion(RegressionData data, SpsConfig config, SpsRandomness randomness)
    : data_(std::move(data)), config_(config), randomness_(std::move(randomness)) {
    validate(config_);
    validate(data_, true);
    validate(randomness_, config_.m, data_.n());
    initialize();
}

void SpsRegion::initialize() {
    const int n = data_.n();
    const double scale = 1.0 / n;
    const Matrix& Psi = data_.Psi;

    P_ = linalg::symmetrize(scale * (Psi.transpose() * Psi));
    auto roots = linalg::symmetric_roots(P_, "P_n");
    P_sqrt_ = std::move(roots.sqrt);
    P_inv_sqrt_ = std::move(roots.inv_sqrt);
    P_inv_ = std::move(roots.inverse);

    // The reference moments go through the same product as the perturbed
    // ones, so an all-plus sign row reproduces S_0 bit for bit.
    const int d = data_.d();
    const int outputs = data_.outputs();
    Matrix stacked(n, d + outputs);
    stacked << data_.Phi, data_.Y;
    const Matrix moments0 = scale * (Psi.transpose() * stacked);
    V_ = moments0.leftCols(d);
    M0_ = moments0.rightCols(outputs);
    theta_iv_ = linalg::solve_checked(V_, M0_, "Psi'Phi", kDegeneracyCondition);
    Matrix signed_psi(n, d);
    Q_.clear();
    M_.clear();
    Q_.reserve(config_.m - 1);
    M_.reserve(config_.m - 1);
    for (int i = 0; i < config_.m - 1; ++i) {
        for (int k = 0; k < n; ++k) {
            signed_psi.row(k) = static_cast<double>(randomness_.signs(i, k)) * Psi.row(k);
        }
        const Matrix moments = scale * (signed_psi.transpose() * stacked);
        Q_.push_back(moments.leftCols(d));
        M_.push_back(moments.rightCols(outputs));
    }
}

int sps_rank(const std::vector<double>& norms, const std::vector<int>& pi) {
    const double reference = norms.front();
    int rank = 1;
    for (std::size_t i = 1; i < norms.size(); ++i) {
        if (reference > norms[i] || (reference == norms[i] && pi[0] > pi[i])) ++rank;
    }
    return rank;
}

SpsEvaluation SpsRegion::evaluate(const Matrix& theta) const {
    if (theta.rows() != data_.d() || theta.cols() != data_.outputs()) {
        throw DimensionError("sps: Theta must be d x dx");
    }
    SpsEvaluation out;
    out.norms.reserve(config_.m);
    out.norms.push_back((P_inv_sqrt_ * (M0_ - V_ * theta)).squaredNorm());
    for (int i = 0; i < config_.m - 1; ++i) {
        out.norms.push_back((P_inv_sqrt_ * (M_[i] - Q_[i] * theta)).squaredNorm());
    }
    out.rank = sps_rank(out.norms, randomness_.pi);
    return out;
}

bool SpsRegion::indicator(const Matrix& theta) const {
    return evaluate(theta).rank <= config_.m - config_.q;
}

SpsRegion make_scalar_region(const VectorizedProblem& problem, const SpsConfig& config) {
    return SpsRegion(problem.as_regression(), config,
                     SpsRandomness::generate(config.m, problem.rows(), config.seed));
}

bool scalar_indicator(const VectorizedProblem& problem, const SpsConfig& config,
                      const SpsRandomness& randomness, const Vector& theta) {
    const SpsRegion region(problem.as_regression(), config, randomness);
    return region.indicator(Matrix(theta));
}

}  // namespace mivsps
