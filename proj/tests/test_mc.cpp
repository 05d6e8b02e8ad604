#include "mivsps/mc.hpp"

#include <doctest.h>

#include <cmath>

using namespace mivsps;

namespace {

ExperimentPlan small_plan() {
    ExperimentPlan plan;
    plan.dims = {Dim{2, 2}};
    plan.sample_sizes = {200};
    plan.trials = 40;
    plan.methods = {Method::AS, Method::IN, Method::IV_EOA, Method::MIV_EOA};
    plan.seed = 31;
    return plan;
}

const CoverageRow& row_of(const CoverageReport& report, Dim dim, Method method, double eps, int n,
                          Mode mode = Mode::Direct) {
    const auto* row = report.find(dim, method, eps, n, mode);
    REQUIRE(row != nullptr);
    return *row;
}

}  // namespace

TEST_CASE("reports do not depend on the thread count") {
    auto plan = small_plan();
    plan.epsilons = {0.0, 0.5};
    const auto serial = run_coverage(plan);
    plan.threads = 3;
    const auto threaded = run_coverage(plan);
    REQUIRE(serial.rows.size() == threaded.rows.size());
    CHECK(serial.rows.size() == 8);
    for (std::size_t i = 0; i < serial.rows.size(); ++i) {
        CHECK(serial.rows[i].hits == threaded.rows[i].hits);
        CHECK(serial.rows[i].invalid == threaded.rows[i].invalid);
        const double a = serial.rows[i].median_radius_sq, b = threaded.rows[i].median_radius_sq;
        CHECK(((std::isnan(a) && std::isnan(b)) || a == b));
    }
    plan.seed = 32;
    const auto other = run_coverage(plan);
    bool differs = false;
    for (std::size_t i = 0; i < other.rows.size(); ++i) differs |= other.rows[i].hits != serial.rows[i].hits;
    CHECK(differs);
}

TEST_CASE("report rows carry their keys") {
    const auto report = run_coverage(small_plan());
    const auto& in = row_of(report, Dim{2, 2}, Method::IN, 0.0, 200);
    CHECK(in.trials == 40);
    CHECK(in.noise == "gaussian");
    CHECK(in.block_size == 0);
    CHECK(std::isnan(in.median_radius_sq));
    CHECK(in.p_hat == doctest::Approx(static_cast<double>(in.hits) / (in.trials - in.invalid)));
    CHECK(row_of(report, Dim{2, 2}, Method::MIV_EOA, 0.0, 200).block_size == 6);
    CHECK(row_of(report, Dim{2, 2}, Method::IV_EOA, 0.0, 200).block_size == 9);
    CHECK(report.find(Dim{3, 3}, Method::IN, 0.0, 200) == nullptr);
    for (const auto& row : report.rows) {
        CHECK(row.p_hat >= 0.0);
        CHECK(row.p_hat <= 1.0);
        CHECK(row.wall_ms >= 0.0);
    }
}

TEST_CASE("a single trial is a Bernoulli draw") {
    auto plan = small_plan();
    plan.trials = 1;
    for (const auto& row : run_coverage(plan).rows) CHECK((row.p_hat == 0.0 || row.p_hat == 1.0));
}

TEST_CASE("underdetermined trials are all invalid") {
    auto plan = small_plan();
    plan.sample_sizes = {3};
    plan.trials = 5;
    for (const auto& row : run_coverage(plan).rows) {
        CHECK(row.invalid == 5);
        CHECK(row.hits == 0);
        CHECK(std::isnan(row.p_hat));
    }
}

TEST_CASE("outer approximations cover at least as often as the indicator") {
    auto plan = small_plan();
    plan.trials = 100;
    plan.methods = {Method::IN, Method::MIV_EOA, Method::IV_EOA};
    const auto report = run_coverage(plan);
    const auto& in = row_of(report, Dim{2, 2}, Method::IN, 0.0, 200);
    const auto& miv = row_of(report, Dim{2, 2}, Method::MIV_EOA, 0.0, 200);
    const auto& iv = row_of(report, Dim{2, 2}, Method::IV_EOA, 0.0, 200);
    CHECK(miv.hits >= in.hits);
    CHECK(miv.p_hat >= in.p_hat - 2.0 / std::sqrt(100.0));
    CHECK(std::fabs(miv.p_hat - iv.p_hat) <= 0.05);
}

TEST_CASE("indicator coverage matches the nominal level") {
    ExperimentPlan plan;
    plan.dims = {Dim{1, 1}, Dim{2, 2}};
    plan.sample_sizes = {500};
    plan.trials = 500;
    plan.methods = {Method::IN};
    plan.seed = 404;
    const auto report = run_coverage(plan);
    for (const auto& row : report.rows) CHECK(std::fabs(row.p_hat - 0.9) <= 0.05);

    plan.instruments = InstrumentMode::TwoSample;
    plan.dims = {Dim{2, 2}};
    const auto two = run_coverage(plan);
    CHECK(std::fabs(two.rows.front().p_hat - 0.9) <= 0.05);
}

TEST_CASE("epsilon sweep trends") {
    ExperimentPlan plan;
    plan.dims = {Dim{2, 2}};
    plan.sample_sizes = {300};
    plan.trials = 200;
    plan.epsilons = {0.0, 0.5, 0.9};
    plan.methods = {Method::IN, Method::MIV_EOA};
    plan.lqr = {LqrWeights{1.0, 1.0}, LqrWeights{10.0, 1.0}};
    plan.seed = 77;
    const auto reports = run_epsilon_sweep(plan);
    REQUIRE(reports.size() == 2);
    CHECK(reports[1].lqr.q == 10.0);

    auto single = plan;
    single.epsilons = {0.0};
    single.lqr = {LqrWeights{1.0, 1.0}};
    const auto base = run_coverage(single);
    CHECK(row_of(base, Dim{2, 2}, Method::MIV_EOA, 0.0, 300).hits ==
          row_of(reports[0], Dim{2, 2}, Method::MIV_EOA, 0.0, 300).hits);

    for (const auto& report : reports) {
        double previous = 0.0;
        for (double eps : plan.epsilons) {
            const auto& in = row_of(report, Dim{2, 2}, Method::IN, eps, 300);
            const auto& miv = row_of(report, Dim{2, 2}, Method::MIV_EOA, eps, 300);
            CAPTURE(eps);
            CHECK(std::fabs(in.p_hat - 0.9) <= 0.05 + 3.0 * std::sqrt(0.09 / 200));
            // more exploitation, more conservative outer approximation
            CHECK(miv.p_hat >= previous - 0.05);
            previous = miv.p_hat;
        }
    }
}

TEST_CASE("indirect mode sweep runs and covers") {
    ExperimentPlan plan;
    plan.dims = {Dim{2, 2}};
    plan.sample_sizes = {300};
    plan.trials = 200;
    plan.epsilons = {0.5};
    plan.modes = {Mode::Indirect};
    plan.methods = {Method::IN, Method::MIV_EOA};
    const auto report = run_coverage(plan);
    const auto& in = row_of(report, Dim{2, 2}, Method::IN, 0.5, 300, Mode::Indirect);
    CHECK(std::fabs(in.p_hat - 0.9) <= 0.07);
    CHECK(row_of(report, Dim{2, 2}, Method::MIV_EOA, 0.5, 300, Mode::Indirect).hits >= in.hits);
}

TEST_CASE("sample sweep shrinks the outer approximation") {
    ExperimentPlan plan;
    plan.dims = {Dim{2, 2}};
    plan.sample_sizes = {200, 2000};
    plan.trials = 100;
    plan.methods = {Method::MIV_EOA};
    plan.seed = 8;
    const auto report = run_sample_sweep(plan);
    const auto& small = row_of(report, Dim{2, 2}, Method::MIV_EOA, 0.0, 200);
    const auto& large = row_of(report, Dim{2, 2}, Method::MIV_EOA, 0.0, 2000);
    CHECK(large.median_radius_sq < small.median_radius_sq);
    CHECK(large.p_hat <= small.p_hat + 0.05);
    CHECK(large.p_hat >= 0.85);
}

TEST_CASE("a fixed system is shared across trials") {
    auto plan = small_plan();
    plan.fresh_system_per_trial = false;
    plan.methods = {Method::IN};
    const auto report = run_coverage(plan);
    CHECK(report.rows.front().invalid == 0);
    CHECK(std::fabs(report.rows.front().p_hat - 0.9) <= 0.15);
}

TEST_CASE("benchmark sizes") {
    const auto rows = run_benchmark({Dim{1, 1}, Dim{2, 2}, Dim{3, 3}, Dim{4, 4}}, 200, 2, SpsConfig{20, 2, 0}, 5);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].params == 2);
    CHECK(rows[3].params == 32);
    for (int i = 0; i < 4; ++i) {
        const int d = i + 1;
        CHECK(rows[i].block_miv == 3 * d);
        CHECK(rows[i].block_iv == 2 * d * d + 1);
        CHECK(rows[i].time_miv_ms > 0.0);
        CHECK(rows[i].time_iv_ms > 0.0);
    }
    CHECK(rows[0].block_miv == rows[0].block_iv);
    CHECK(rows[3].block_iv == 33);
    CHECK(rows[3].block_miv == 12);
}

TEST_CASE("plan validation and method names") {
    auto plan = small_plan();
    plan.trials = 0;
    CHECK_THROWS(run_coverage(plan));
    plan = small_plan();
    plan.epsilons = {1.5};
    CHECK_THROWS(run_coverage(plan));
    plan = small_plan();
    plan.sps = SpsConfig{10, 10, 0};
    CHECK_THROWS(run_coverage(plan));
    CHECK(parse_method("MIV_EOA") == Method::MIV_EOA);
    CHECK_FALSE(parse_method("miv").has_value());
    CHECK(std::string(to_string(Method::IV_EOA)) == "IV_EOA");
    CHECK(trial_seed(1, 2, 0) == trial_seed(1, 2, 0));
    CHECK(trial_seed(1, 2, 0) != trial_seed(1, 2, 1));
    CHECK(trial_seed(1, 2, 0) != trial_seed(1, 3, 0));
}
