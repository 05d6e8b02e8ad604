#include "mivsps/mc.hpp"

#include "mivsps/eoa.hpp"
#include "mivsps/estimators.hpp"
#include "mivsps/regression.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

namespace mivsps {

const char* to_string(Method method) {
    switch (method) {
        case Method::AS: return "AS";
        case Method::IN: return "IN";
        case Method::IV_EOA: return "IV_EOA";
        case Method::MIV_EOA: return "MIV_EOA";
    }
    return "?";
}

std::optional<Method> parse_method(const std::string& text) {
    for (Method m : {Method::AS, Method::IN, Method::IV_EOA, Method::MIV_EOA}) {
        if (text == to_string(m)) return m;
    }
    return std::nullopt;
}

void validate(const ExperimentPlan& plan) {
    if (plan.dims.empty()) throw Error("plan: dims must not be empty");
    for (const auto& dim : plan.dims) {
        if (dim.dx < 1 || dim.du < 1) throw Error("plan: dimensions must be positive");
    }
    if (plan.sample_sizes.empty()) throw Error("plan: n must not be empty");
    for (int n : plan.sample_sizes) {
        if (n < 1) throw Error("plan: n must be >= 1");
    }
    if (plan.trials < 1) throw Error("plan: s must be >= 1");
    if (plan.epsilons.empty()) throw Error("plan: epsilon must not be empty");
    for (double eps : plan.epsilons) {
        if (!(eps >= 0.0 && eps <= 1.0)) throw Error("plan: epsilon must lie in [0, 1]");
    }
    if (plan.modes.empty()) throw Error("plan: mode must not be empty");
    if (plan.methods.empty()) throw Error("plan: methods must not be empty");
    if (plan.lqr.empty()) throw Error("plan: lqr weights must not be empty");
    for (const auto& w : plan.lqr) {
        if (!(w.q > 0.0 && w.v > 0.0)) throw Error("plan: lqr weights must be positive");
    }
    if (!(plan.target_radius > 0.0 && plan.target_radius < 1.0)) {
        throw Error("plan: target_radius must lie in (0, 1)");
    }
    if (plan.max_retries < 0) throw Error("plan: max_retries must be >= 0");
    validate(plan.sps);
    validate(plan.noise);
}

const CoverageRow* CoverageReport::find(Dim dim, Method method, double epsilon, int n, Mode mode) const {
    for (const auto& row : rows) {
        if (row.dim == dim && row.method == method && row.epsilon == epsilon && row.n == n &&
            row.mode == mode) {
            return &row;
        }
    }
    return nullptr;
}

std::uint64_t trial_seed(std::uint64_t master, int trial, int attempt) {
    return derive_seed(derive_seed(master, static_cast<std::uint64_t>(trial)),
                       static_cast<std::uint64_t>(attempt) + 1000);
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

enum SeedStream : std::uint64_t { kSystem = 1, kSimulation = 2, kSps = 3, kEstimationSample = 4 };

struct MethodOutcome {
    bool hit = false;
    double radius_sq = std::numeric_limits<double>::quiet_NaN();
    double ms = 0.0;
};

struct TrialOutcome {
    bool valid = false;
    std::vector<MethodOutcome> methods;
};

struct Cell {
    Dim dim;
    Mode mode;
    double epsilon;
    int n;
    LqrWeights lqr;
};

NoiseModel noise_for_horizon(NoiseModel noise, int n) {
    if (auto* laplace = std::get_if<TimeVaryingLaplacianMixture>(&noise)) laplace->horizon = n;
    return noise;
}

SystemSpec make_trial_system(const ExperimentPlan& plan, const Cell& cell, std::uint64_t system_seed) {
    const auto sys = random_stable_system(cell.dim.dx, cell.dim.du, plan.target_radius, system_seed);
    Matrix K = Matrix::Zero(cell.dim.du, cell.dim.dx);
    if (cell.epsilon > 0.0) K = synthesize_lqr(sys.A, sys.B, cell.lqr.q, cell.lqr.v);
    return make_system(sys.A, sys.B, K, cell.epsilon, noise_for_horizon(plan.noise, cell.n));
}

RegressionData regression_for(const Trajectory& traj, const SystemSpec& spec, Mode mode) {
    return mode == Mode::Direct ? build_direct(traj) : build_indirect(traj, spec).data;
}

TrialOutcome attempt_trial(const ExperimentPlan& plan, const Cell& cell, std::uint64_t seed) {
    const std::uint64_t system_seed =
        plan.fresh_system_per_trial ? derive_seed(seed, kSystem) : derive_seed(plan.seed, kSystem);
    const SystemSpec spec = make_trial_system(plan, cell, system_seed);
    const Trajectory traj = simulate(spec, cell.n, derive_seed(seed, kSimulation));
    RegressionData data = regression_for(traj, spec, cell.mode);
    if (plan.instruments == InstrumentMode::TwoSample) {
        const Trajectory other = simulate(spec, cell.n, derive_seed(seed, kEstimationSample));
        data = build_instruments(data, traj, regression_for(other, spec, cell.mode));
    } else {
        data = build_instruments(data, traj);
    }
    const Matrix truth = true_parameter(spec, cell.mode);
    SpsConfig sps = plan.sps;
    sps.seed = derive_seed(seed, kSps);

    TrialOutcome out;
    out.methods.resize(plan.methods.size());
    std::optional<SpsRegion> region;
    double region_ms = 0.0;
    std::optional<VectorizedProblem> vec;
    const auto ensure_region = [&] {
        if (!region) {
            const auto start = Clock::now();
            region.emplace(data, sps);
            region_ms = elapsed_ms(start);
        }
    };
    const auto ensure_vec = [&] {
        if (!vec) vec.emplace(vectorize(data));
    };
    for (std::size_t j = 0; j < plan.methods.size(); ++j) {
        MethodOutcome& res = out.methods[j];
        switch (plan.methods[j]) {
            case Method::IN: {
                ensure_region();
                const auto start = Clock::now();
                res.hit = region->indicator(truth);
                res.ms = elapsed_ms(start) + region_ms;
                break;
            }
            case Method::MIV_EOA: {
                ensure_region();
                const auto start = Clock::now();
                const auto oa = outer_approximation(*region);
                res.hit = oa.ellipsoid.contains(truth);
                res.radius_sq = oa.ellipsoid.radius_sq;
                res.ms = elapsed_ms(start) + region_ms;
                break;
            }
            case Method::AS: {
                const auto start = Clock::now();
                ensure_vec();
                const auto as = asymptotic_region(*vec, sps.p());
                res.hit = as.contains(vec_parameter(truth, data.state_dim, data.input_dim));
                res.radius_sq = as.radius_sq;
                res.ms = elapsed_ms(start);
                break;
            }
            case Method::IV_EOA: {
                const auto start = Clock::now();
                ensure_vec();
                const auto oa = vectorized_outer_approximation(
                    *vec, sps, SpsRandomness::generate(sps.m, vec->rows(), sps.seed));
                res.hit = oa.ellipsoid.contains(Matrix(vec_parameter(truth, data.state_dim, data.input_dim)));
                res.radius_sq = oa.ellipsoid.radius_sq;
                res.ms = elapsed_ms(start);
                break;
            }
        }
    }
    out.valid = true;
    return out;
}

TrialOutcome run_trial(const ExperimentPlan& plan, const Cell& cell, int trial) {
    for (int attempt = 0; attempt <= plan.max_retries; ++attempt) {
        try {
            return attempt_trial(plan, cell, trial_seed(plan.seed, trial, attempt));
        } catch (const DimensionError&) {
            break;  // deterministic in the plan; retrying cannot help
        } catch (const Error&) {
            // degenerate draw: reseed and retry
        }
    }
    return TrialOutcome{};
}

template <class Body>
void parallel_for(int count, int threads, Body&& body) {
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (int i = next++; i < count; i = next++) body(i);
        });
    }
    for (auto& worker : pool) worker.join();
}

double median(std::vector<double> values) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    if (values.size() % 2 == 1) return values[mid];
    return 0.5 * (values[mid - 1] + values[mid]);
}

int block_size_for(Method method, Dim dim) {
    switch (method) {
        case Method::MIV_EOA: return 2 * dim.dx + dim.du;
        case Method::IV_EOA: return dim.params() + 1;
        default: return 0;
    }
}

void run_cell(const ExperimentPlan& plan, const Cell& cell, CoverageReport& report) {
    std::vector<TrialOutcome> outcomes(plan.trials);
    parallel_for(plan.trials, plan.threads, [&](int t) { outcomes[t] = run_trial(plan, cell, t); });

    const std::string noise = noise_tag(plan.noise);
    for (std::size_t j = 0; j < plan.methods.size(); ++j) {
        CoverageRow row;
        row.dim = cell.dim;
        row.method = plan.methods[j];
        row.noise = noise;
        row.mode = cell.mode;
        row.epsilon = cell.epsilon;
        row.n = cell.n;
        row.trials = plan.trials;
        row.block_size = block_size_for(row.method, cell.dim);
        std::vector<double> radii;
        for (const auto& outcome : outcomes) {
            if (!outcome.valid) {
                ++row.invalid;
                continue;
            }
            const auto& res = outcome.methods[j];
            row.hits += res.hit ? 1 : 0;
            row.wall_ms += res.ms;
            if (!std::isnan(res.radius_sq)) radii.push_back(res.radius_sq);
        }
        const int valid = row.trials - row.invalid;
        row.p_hat = valid > 0 ? static_cast<double>(row.hits) / valid
                              : std::numeric_limits<double>::quiet_NaN();
        row.median_radius_sq = median(std::move(radii));
        report.rows.push_back(std::move(row));
    }
}

}  // namespace

CoverageReport run_coverage(const ExperimentPlan& plan) {
    validate(plan);
    CoverageReport report;
    report.lqr = plan.lqr.front();
    for (const Dim& dim : plan.dims) {
        for (Mode mode : plan.modes) {
            for (double eps : plan.epsilons) {
                for (int n : plan.sample_sizes) {
                    run_cell(plan, Cell{dim, mode, eps, n, report.lqr}, report);
                }
            }
        }
    }
    return report;
}

std::vector<CoverageReport> run_epsilon_sweep(const ExperimentPlan& plan) {
    validate(plan);
    std::vector<CoverageReport> out;
    for (const auto& weights : plan.lqr) {
        ExperimentPlan single = plan;
        single.lqr = {weights};
        out.push_back(run_coverage(single));
    }
    return out;
}

CoverageReport run_sample_sweep(const ExperimentPlan& plan) { return run_coverage(plan); }

std::vector<BenchmarkRow> run_benchmark(const std::vector<Dim>& dims, int n, int trials,
                                        const SpsConfig& sps, std::uint64_t seed) {
    if (trials < 1) throw Error("benchmark: s must be >= 1");
    validate(sps);
    std::vector<BenchmarkRow> rows;
    for (const Dim& dim : dims) {
        BenchmarkRow row;
        row.dim = dim;
        row.params = dim.params();
        row.block_miv = 2 * dim.dx + dim.du;
        row.block_iv = dim.params() + 1;
        for (int t = 0; t < trials; ++t) {
            RegressionData data;
            SpsConfig config = sps;
            bool ready = false;
            for (int attempt = 0; attempt < 4 && !ready; ++attempt) {
                const std::uint64_t s = trial_seed(seed, t, attempt);
                try {
                    const auto sys = random_stable_system(dim.dx, dim.du, 0.9, derive_seed(s, kSystem));
                    const auto spec = make_system(sys.A, sys.B, Matrix::Zero(dim.du, dim.dx), 0.0,
                                                  IidGaussian{1.0});
                    const auto traj = simulate(spec, n, derive_seed(s, kSimulation));
                    data = build_instruments(build_direct(traj), traj);
                    config.seed = derive_seed(s, kSps);
                    ready = true;
                } catch (const Error&) {
                }
            }
            if (!ready) continue;

            auto start = Clock::now();
            const SpsRegion region(data, config);
            const auto miv = outer_approximation(region);
            row.time_miv_ms += elapsed_ms(start);

            start = Clock::now();
            const auto vec = vectorize(data);
            const auto iv = vectorized_outer_approximation(
                vec, config, SpsRandomness::generate(config.m, vec.rows(), config.seed));
            row.time_iv_ms += elapsed_ms(start);
            (void)miv;
            (void)iv;
        }
        row.relative_time = row.time_iv_ms > 0.0 ? row.time_miv_ms / row.time_iv_ms : 0.0;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace mivsps
