#pragma once

#include "mivsps/model.hpp"
#include "mivsps/sps.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mivsps {

// AS: asymptotic ellipsoid; IN: sign-perturbed-sums indicator;
// IV_EOA: outer approximation of the vectorized region; MIV_EOA: outer
// approximation of the matrix-variate region.
enum class Method { AS, IN, IV_EOA, MIV_EOA };

const char* to_string(Method method);
std::optional<Method> parse_method(const std::string& text);

enum class InstrumentMode { SingleSample, TwoSample };

struct Dim {
    int dx = 1;
    int du = 1;
    int params() const { return dx * dx + dx * du; }
    bool operator==(const Dim&) const = default;
};

struct LqrWeights {
    double q = 1.0;
    double v = 1.0;
};

struct ExperimentPlan {
    std::vector<Dim> dims{Dim{}};
    std::vector<int> sample_sizes{500};
    int trials = 500;
    std::vector<double> epsilons{0.0};
    NoiseModel noise = IidGaussian{1.0};  // a Laplacian mixture's horizon is set to n per run
    std::vector<Mode> modes{Mode::Direct};
    std::vector<Method> methods{Method::AS, Method::IN, Method::IV_EOA, Method::MIV_EOA};
    std::uint64_t seed = 1;
    SpsConfig sps{100, 10, 0};  // sps.seed is ignored; each trial derives its own
    std::vector<LqrWeights> lqr{LqrWeights{}};
    double target_radius = 0.9;
    bool fresh_system_per_trial = true;
    InstrumentMode instruments = InstrumentMode::SingleSample;
    int max_retries = 3;
    int threads = 1;
};

void validate(const ExperimentPlan& plan);

struct CoverageRow {
    Dim dim;
    Method method = Method::IN;
    std::string noise;
    Mode mode = Mode::Direct;
    double epsilon = 0.0;
    int n = 0;
    int trials = 0;  // s
    int hits = 0;
    int invalid = 0;
    double p_hat = 0.0;  // hits / (trials - invalid); NaN when no valid trial
    double median_radius_sq = 0.0;  // NaN for IN
    double wall_ms = 0.0;
    int block_size = 0;  // Schur block side for the EOA methods, 0 otherwise
};

struct CoverageReport {
    LqrWeights lqr;
    std::vector<CoverageRow> rows;

    // First row matching the key, or nullptr.
    const CoverageRow* find(Dim dim, Method method, double epsilon, int n,
                            Mode mode = Mode::Direct) const;
};

// One row per (dim, mode, epsilon, n, method) in that nesting order, using
// plan.lqr.front(). Deterministic in plan.seed for any thread count.
CoverageReport run_coverage(const ExperimentPlan& plan);

// One report per controller weight pair in plan.lqr, each covering every
// epsilon in plan.epsilons.
std::vector<CoverageReport> run_epsilon_sweep(const ExperimentPlan& plan);

// Coverage and median radius for every n in plan.sample_sizes.
CoverageReport run_sample_sweep(const ExperimentPlan& plan);

struct BenchmarkRow {
    Dim dim;
    int params = 0;
    int block_miv = 0;  // 2 dx + du
    int block_iv = 0;   // dx^2 + dx du + 1
    double time_miv_ms = 0.0;
    double time_iv_ms = 0.0;
    double relative_time = 0.0;  // MIV / IV
};

// Times both outer-approximation pipelines on identical data and randomness.
std::vector<BenchmarkRow> run_benchmark(const std::vector<Dim>& dims, int n, int trials,
                                        const SpsConfig& sps, std::uint64_t seed);

// Per-trial seed shared by every method of that trial.
std::uint64_t trial_seed(std::uint64_t master, int trial, int attempt);

}  // namespace mivsps
