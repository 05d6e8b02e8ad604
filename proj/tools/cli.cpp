#include "cli.hpp"

#include "mivsps/config.hpp"
#include "mivsps/csv.hpp"
#include "mivsps/eoa.hpp"
#include "mivsps/estimators.hpp"
#include "mivsps/mc.hpp"
#include "mivsps/sps.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

namespace mivsps::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    bool quiet = false;
    // simulate
    std::string regression_dir;
    // indicator / eoa
    std::string theta = "iv";
    std::string data_dir;
    std::string estimate_out;
    std::string randomness_in;
    std::string randomness_out;
};

int resolve_threads(const Options& opt) {
    if (opt.threads) return std::max(1, *opt.threads);
    if (const char* env = std::getenv("SPS_THREADS")) {
        try {
            return std::max(1, std::stoi(env));
        } catch (const std::exception&) {
            throw config::ConfigError("SPS_THREADS", 0, "SPS_THREADS must be an integer");
        }
    }
    return 1;
}

config::SystemConfig load_system(const Options& opt) {
    auto cfg = config::load_system(opt.config);
    if (opt.seed) {
        cfg.seed = *opt.seed;
        cfg.sps.seed = derive_seed(cfg.seed, 3);
    }
    return cfg;
}

ExperimentPlan load_plan(const Options& opt) {
    auto plan = config::load_plan(opt.config);
    if (opt.seed) plan.seed = *opt.seed;
    plan.threads = resolve_threads(opt);
    return plan;
}

struct Problem {
    RegressionData data;
    std::optional<Matrix> truth;
};

Problem load_problem(const Options& opt, const config::SystemConfig& cfg) {
    if (!opt.data_dir.empty()) {
        auto data = csv::read_regression(opt.data_dir);
        if (!data.has_instruments()) throw Error("data directory has no Psi.csv");
        return Problem{std::move(data), std::nullopt};
    }
    auto experiment = config::realize(cfg);
    return Problem{std::move(experiment.data), std::move(experiment.truth)};
}

std::vector<std::string> column_names(int count) {
    std::vector<std::string> out;
    for (int i = 1; i <= count; ++i) out.push_back("col" + std::to_string(i));
    return out;
}

void print_row(std::ostream& out, const CoverageRow& row) {
    out << "dim=" << csv::format_dim(row.dim) << " method=" << to_string(row.method)
        << " mode=" << to_string(row.mode) << " epsilon=" << row.epsilon << " n=" << row.n
        << " p_hat=" << row.p_hat << " hits=" << row.hits << "/" << row.trials - row.invalid
        << " invalid=" << row.invalid << '\n';
}

fs::path with_weights(const fs::path& out, const LqrWeights& w) {
    fs::path stem = out.parent_path() / out.stem();
    return fs::path(stem.string() + ".q" + csv::format_double(w.q) + "_v" + csv::format_double(w.v) +
                    out.extension().string());
}

int cmd_simulate(const Options& opt, std::ostream& out) {
    const auto cfg = load_system(opt);
    const auto experiment = config::realize(cfg);
    csv::write_trajectory(opt.out, experiment.trajectory);
    if (!opt.regression_dir.empty()) csv::write_regression(opt.regression_dir, experiment.data);
    if (!opt.quiet) {
        out << "simulated n=" << experiment.trajectory.length() << " dims=" << csv::format_dim(cfg.dims)
            << " epsilon=" << cfg.epsilon << " -> " << opt.out << '\n';
    }
    return kExitOk;
}

int cmd_indicator(const Options& opt, std::ostream& out) {
    const auto cfg = load_system(opt);
    Problem problem = load_problem(opt, cfg);
    std::optional<SpsRegion> region;
    if (!opt.randomness_in.empty()) {
        region.emplace(problem.data, cfg.sps, csv::read_randomness(opt.randomness_in));
    } else {
        region.emplace(problem.data, cfg.sps);
    }
    if (!opt.randomness_out.empty()) csv::write_randomness(opt.randomness_out, region->randomness());
    if (!opt.estimate_out.empty()) {
        csv::write_matrix(opt.estimate_out, region->iv_estimate(),
                          column_names(static_cast<int>(region->iv_estimate().cols())));
    }
    Matrix theta;
    if (opt.theta == "iv") {
        theta = region->iv_estimate();
    } else if (opt.theta == "true") {
        if (!problem.truth) throw Error("--theta true needs a simulated system (no --data)");
        theta = *problem.truth;
    } else {
        theta = csv::read_matrix(opt.theta);
    }
    const auto eval = region->evaluate(theta);
    const bool inside = eval.rank <= cfg.sps.m - cfg.sps.q;
    out << "inside=" << (inside ? "true" : "false") << " rank=" << eval.rank << " m=" << cfg.sps.m
        << " q=" << cfg.sps.q << '\n';
    return kExitOk;
}

int cmd_eoa(const Options& opt, std::ostream& out) {
    const auto cfg = load_system(opt);
    Problem problem = load_problem(opt, cfg);
    const SpsRegion region(problem.data, cfg.sps);
    const auto oa = outer_approximation(region, resolve_threads(opt));
    if (!opt.out.empty()) csv::write_ellipsoid(opt.out, oa.ellipsoid);
    if (!opt.quiet) {
        out << "radius_sq=" << csv::format_double(oa.ellipsoid.radius_sq)
            << " bounded=" << (oa.ellipsoid.bounded ? "true" : "false") << " block_size=" << oa.block_size;
        if (problem.truth) {
            out << " contains_truth=" << (oa.ellipsoid.contains(*problem.truth) ? "true" : "false");
        }
        out << '\n';
    }
    return kExitOk;
}

void emit_report(const Options& opt, const fs::path& path, const CoverageReport& report, std::ostream& out) {
    csv::write_report(path, report);
    if (!opt.quiet) {
        for (const auto& row : report.rows) print_row(out, row);
    }
}

int cmd_coverage(const Options& opt, std::ostream& out) {
    const auto plan = load_plan(opt);
    emit_report(opt, opt.out, run_coverage(plan), out);
    return kExitOk;
}

int cmd_sweep_epsilon(const Options& opt, std::ostream& out) {
    const auto plan = load_plan(opt);
    const auto reports = run_epsilon_sweep(plan);
    for (const auto& report : reports) {
        const fs::path path = reports.size() == 1 ? fs::path(opt.out) : with_weights(opt.out, report.lqr);
        if (!opt.quiet) out << "# lqr q=" << report.lqr.q << " v=" << report.lqr.v << " -> " << path.string() << '\n';
        emit_report(opt, path, report, out);
    }
    return kExitOk;
}

int cmd_sweep_n(const Options& opt, std::ostream& out) {
    const auto plan = load_plan(opt);
    const auto report = run_sample_sweep(plan);
    csv::write_report(opt.out, report);
    if (!opt.quiet) {
        for (const auto& row : report.rows) {
            out << "n=" << row.n << " method=" << to_string(row.method) << " p_hat=" << row.p_hat
                << " median_radius_sq=" << csv::format_double(row.median_radius_sq) << '\n';
        }
    }
    return kExitOk;
}

int cmd_bench(const Options& opt, std::ostream& out) {
    const auto plan = load_plan(opt);
    const auto rows = run_benchmark(plan.dims, plan.sample_sizes.front(), plan.trials, plan.sps, plan.seed);
    std::ofstream file(opt.out, std::ios::binary);
    if (!file) throw Error("cannot open '" + opt.out + "' for writing");
    csv::write_benchmark(file, rows);
    if (!opt.quiet) {
        for (const auto& row : rows) {
            out << "dim=" << csv::format_dim(row.dim) << " params=" << row.params << " block_miv=" << row.block_miv
                << " block_iv=" << row.block_iv << " rel_time=" << row.relative_time << '\n';
        }
    }
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Finite-sample sign-perturbed-sums confidence regions for closed-loop linear systems",
                 "mivsps"};
    app.require_subcommand(1);
    Options opt;

    const auto common = [&](CLI::App* sub, bool needs_out) {
        sub->add_option("--config", opt.config, "System config or experiment plan")
            ->required()
            ->check(CLI::ExistingFile);
        auto* o = sub->add_option("--out", opt.out, "Output file");
        if (needs_out) o->required();
        sub->add_option("--seed", opt.seed, "Override the master seed");
        sub->add_option("--threads", opt.threads, "Worker threads (fallback: SPS_THREADS)");
        sub->add_flag("--quiet", opt.quiet, "Suppress summary lines");
    };

    auto* simulate = app.add_subcommand("simulate", "Simulate a trajectory and write it as CSV");
    common(simulate, true);
    simulate->add_option("--regression-dir", opt.regression_dir, "Also write Y.csv, Phi.csv, Psi.csv here");

    auto* indicator = app.add_subcommand("indicator", "Evaluate region membership of a parameter matrix");
    common(indicator, false);
    indicator->add_option("--theta", opt.theta, "Parameter CSV, or 'iv' / 'true'");
    indicator->add_option("--data", opt.data_dir, "Directory with Y.csv, Phi.csv, Psi.csv");
    indicator->add_option("--estimate-out", opt.estimate_out, "Write the IV estimate as CSV");
    indicator->add_option("--randomness", opt.randomness_in, "Read signs and permutation from CSV");
    indicator->add_option("--randomness-out", opt.randomness_out, "Write signs and permutation as CSV");

    auto* eoa = app.add_subcommand("eoa", "Compute the ellipsoidal outer approximation");
    common(eoa, false);
    eoa->add_option("--data", opt.data_dir, "Directory with Y.csv, Phi.csv, Psi.csv");

    auto* coverage = app.add_subcommand("coverage", "Monte Carlo coverage study");
    common(coverage, true);
    auto* sweep_eps = app.add_subcommand("sweep-epsilon", "Coverage as a function of epsilon");
    common(sweep_eps, true);
    auto* sweep_n = app.add_subcommand("sweep-n", "Coverage and radius as a function of n");
    common(sweep_n, true);
    auto* bench = app.add_subcommand("bench", "Relative cost of the two outer approximations");
    common(bench, true);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitRuntime;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(opt, out);
        if (indicator->parsed()) return cmd_indicator(opt, out);
        if (eoa->parsed()) return cmd_eoa(opt, out);
        if (coverage->parsed()) return cmd_coverage(opt, out);
        if (sweep_eps->parsed()) return cmd_sweep_epsilon(opt, out);
        if (sweep_n->parsed()) return cmd_sweep_n(opt, out);
        if (bench->parsed()) return cmd_bench(opt, out);
    } catch (const config::ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    err << app.help();
    return kExitRuntime;
}

}  // namespace mivsps::cli
