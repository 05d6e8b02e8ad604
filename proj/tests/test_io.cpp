#include "support.hpp"

#include "mivsps/config.hpp"
#include "mivsps/csv.hpp"
#include "mivsps/eoa.hpp"

#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace mivsps;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("mivsps_io_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

config::ConfigError system_error(const std::string& text) {
    std::istringstream in(text);
    try {
        config::parse_system(in, "sys.cfg");
    } catch (const config::ConfigError& e) {
        return e;
    }
    FAIL("expected a config error");
    return config::ConfigError("", 0, "");
}

}  // namespace

TEST_CASE("doubles survive formatting bit for bit") {
    Rng rng(1);
    std::uniform_real_distribution<double> mantissa(-1.0, 1.0);
    std::uniform_int_distribution<int> exponent(-300, 300);
    for (int i = 0; i < 10000; ++i) {
        const double v = std::ldexp(mantissa(rng), exponent(rng));
        CHECK(same_bits(csv::parse_double(csv::format_double(v)), v));
    }
    CHECK(std::isnan(csv::parse_double(csv::format_double(std::nan("")))));
    CHECK(csv::parse_double(csv::format_double(-std::numeric_limits<double>::infinity())) < 0.0);
    CHECK(std::isinf(csv::parse_double("inf")));
    CHECK_THROWS(csv::parse_double("1.5x"));
    CHECK(std::isnan(csv::parse_double("")));  // blank cells
}

TEST_CASE("tables require a header and rectangular rows") {
    std::istringstream empty("");
    CHECK_THROWS(csv::read_table(empty));
    std::istringstream ragged("a,b\n1,2\n3\n");
    CHECK_THROWS(csv::read_table(ragged));
    std::istringstream ok("a,b\n1,2\n");
    const auto table = csv::read_table(ok);
    CHECK(table.column("b") == 1);
    CHECK(table.column("c") == -1);
    std::ostringstream out;
    csv::write_table(out, table);
    CHECK(out.str() == "a,b\n1,2\n");
}

TEST_CASE("dimension labels") {
    CHECK(csv::format_dim(Dim{2, 2}) == "2");
    CHECK(csv::format_dim(Dim{2, 1}) == "2x1");
    CHECK(csv::parse_dim("3") == Dim{3, 3});
    CHECK(csv::parse_dim("2x1") == Dim{2, 1});
    CHECK_THROWS(csv::parse_dim("two"));
}

TEST_CASE("trajectory, regression and randomness round trips") {
    const auto dir = scratch_dir("roundtrip");
    const auto inst = support::make_instance(2, 1, 80, 4, 0.5, BimodalGaussianMixture{1.0, 1.0});

    csv::write_trajectory(dir / "traj.csv", inst.traj);
    const auto traj = csv::read_trajectory(dir / "traj.csv");
    REQUIRE(traj.length() == inst.traj.length());
    for (int k = 0; k < traj.length(); ++k) {
        CHECK(traj.x[k] == inst.traj.x[k]);
        CHECK(traj.u[k] == inst.traj.u[k]);
        CHECK(traj.r[k] == inst.traj.r[k]);
        CHECK(traj.w[k] == inst.traj.w[k]);
    }
    CHECK(traj.x.back() == inst.traj.x.back());
    const auto header = csv::read_table(dir / "traj.csv").header;
    CHECK(header == std::vector<std::string>{"k", "x1", "x2", "u1", "r1", "w1", "w2"});

    csv::write_regression(dir / "reg", inst.data);
    const auto data = csv::read_regression(dir / "reg");
    CHECK(data.Y == inst.data.Y);
    CHECK(data.Phi == inst.data.Phi);
    CHECK(data.Psi == inst.data.Psi);
    CHECK(data.state_dim == 2);
    CHECK(data.input_dim == 1);

    const SpsRegion region(inst.data, SpsConfig{20, 2, 5});
    csv::write_randomness(dir / "rnd.csv", region.randomness());
    const auto rnd = csv::read_randomness(dir / "rnd.csv");
    CHECK(rnd.signs == region.randomness().signs);
    CHECK(rnd.pi == region.randomness().pi);
    const SpsRegion reloaded(data, SpsConfig{20, 2, 0}, rnd);
    CHECK(reloaded.evaluate(inst.truth).norms == region.evaluate(inst.truth).norms);
}

TEST_CASE("ellipsoid round trip keeps every decision") {
    const auto dir = scratch_dir("ellipsoid");
    const auto inst = support::make_instance(2, 2, 300, 6);
    const SpsRegion region(inst.data, SpsConfig{100, 10, 1});
    const auto oa = outer_approximation(region);
    csv::write_ellipsoid(dir / "ell.csv", oa.ellipsoid);
    const auto back = csv::read_ellipsoid(dir / "ell.csv");
    CHECK(back.center == oa.ellipsoid.center);
    CHECK(back.map == oa.ellipsoid.map);
    CHECK(same_bits(back.radius_sq, oa.ellipsoid.radius_sq));
    CHECK(back.bounded == oa.ellipsoid.bounded);
    Rng rng(2);
    std::normal_distribution<double> normal(0.0, 1.0);
    int inside = 0;
    for (int t = 0; t < 1000; ++t) {
        Matrix theta = oa.ellipsoid.center;
        for (Eigen::Index i = 0; i < theta.size(); ++i) theta.data()[i] += 0.01 * normal(rng);
        CHECK(same_bits(back.distance_sq(theta), oa.ellipsoid.distance_sq(theta)));
        CHECK(back.contains(theta) == oa.ellipsoid.contains(theta));
        inside += back.contains(theta);
    }
    CHECK(inside > 0);
    CHECK(inside < 1000);

    Ellipsoid open;
    open.center = Matrix::Zero(2, 1);
    open.map = Matrix::Identity(2, 2);
    csv::write_ellipsoid(dir / "open.csv", open);
    const auto open_back = csv::read_ellipsoid(dir / "open.csv");
    CHECK_FALSE(open_back.bounded);
    CHECK(open_back.contains(Matrix::Constant(2, 1, 1e200)));
}

TEST_CASE("report round trip") {
    const auto dir = scratch_dir("report");
    CoverageReport report;
    CoverageRow row;
    row.dim = Dim{3, 1};
    row.method = Method::MIV_EOA;
    row.noise = "laplace_mixture";
    row.mode = Mode::Indirect;
    row.epsilon = 0.25;
    row.n = 500;
    row.trials = 500;
    row.hits = 470;
    row.invalid = 2;
    row.p_hat = 470.0 / 498.0;
    row.median_radius_sq = 0.0123;
    row.wall_ms = 17.5;
    row.block_size = 7;
    report.rows.push_back(row);
    row.method = Method::IN;
    row.median_radius_sq = std::numeric_limits<double>::quiet_NaN();
    row.block_size = 0;
    report.rows.push_back(row);
    csv::write_report(dir / "r.csv", report);

    std::ifstream in(dir / "r.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "dim,params,method,noise,mode,epsilon,n,s,hits,invalid,p_hat,median_radius_sq,wall_ms,block_size");
    std::string first;
    std::getline(in, first);
    CHECK(first.rfind("3x1,12,MIV_EOA,laplace_mixture,indirect,0.25,500,500,470,2,", 0) == 0);

    const auto back = csv::read_report(dir / "r.csv");
    REQUIRE(back.rows.size() == 2);
    CHECK(back.rows[0].dim == Dim{3, 1});
    CHECK(back.rows[0].method == Method::MIV_EOA);
    CHECK(back.rows[0].mode == Mode::Indirect);
    CHECK(back.rows[0].hits == 470);
    CHECK(same_bits(back.rows[0].p_hat, row.p_hat));
    CHECK(back.rows[0].median_radius_sq == 0.0123);
    CHECK(std::isnan(back.rows[1].median_radius_sq));

    std::ofstream bad(dir / "bad.csv");
    bad << "dim,method\n1,IN\n";
    bad.close();
    CHECK_THROWS(csv::read_report(dir / "bad.csv"));
}

TEST_CASE("system config parsing") {
    std::istringstream in(R"(# experiment
[system]
dims = 3x2
seed = 11
n = 250
epsilon = 0.4
mode = indirect
instruments = two_sample

[noise]
family = laplace_mixture
sigma_w = 0.5

[lqr]
q = 2
v = 3

[sps]
m = 20
q = 2
seed = 5
)");
    const auto cfg = config::parse_system(in);
    CHECK(cfg.dims == Dim{3, 2});
    CHECK(cfg.seed == 11);
    CHECK(cfg.n == 250);
    CHECK(cfg.epsilon == 0.4);
    CHECK(cfg.mode == Mode::Indirect);
    CHECK(cfg.instruments == InstrumentMode::TwoSample);
    const auto* noise = std::get_if<TimeVaryingLaplacianMixture>(&cfg.noise);
    REQUIRE(noise != nullptr);
    CHECK(noise->sigma_w == 0.5);
    CHECK(noise->horizon == 250);
    CHECK(cfg.lqr.q == 2.0);
    CHECK(cfg.lqr.v == 3.0);
    CHECK(cfg.sps.m == 20);
    CHECK(cfg.sps.q == 2);
    CHECK(cfg.sps.seed == 5);

    const auto a = config::realize(cfg);
    const auto b = config::realize(cfg);
    CHECK(a.data.Psi == b.data.Psi);
    CHECK(a.truth.rows() == 5);
    CHECK(a.truth.cols() == 3);
    CHECK((a.truth.topRows(3).transpose() - a.spec.closed_loop_C()).norm() == 0.0);

    std::istringstream params("[noise]\nfamily = bimodal_gaussian\nparams = 2, 0.5\n");
    const auto bimodal = std::get<BimodalGaussianMixture>(config::parse_system(params).noise);
    CHECK(bimodal.mu == 2.0);
    CHECK(bimodal.sigma_w == 0.5);
}

TEST_CASE("config errors name the field and line") {
    auto e = system_error("[system]\nn = 10\nbogus = 1\n");
    CHECK(e.field() == "system.bogus");
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("sys.cfg:3") != std::string::npos);

    e = system_error("[system]\nepsilon = 2\n");
    CHECK(e.field() == "system.epsilon");
    CHECK(e.line() == 2);

    e = system_error("[noise]\nfamily = cauchy\n");
    CHECK(e.field() == "noise.family");

    e = system_error("[system]\nn = ten\n");
    CHECK(e.field() == "system.n");

    e = system_error("[extras]\nx = 1\n");
    CHECK(e.field() == "extras");

    e = system_error("[sps]\nm = 10\nq = 10\n");
    CHECK(e.field() == "sps");

    e = system_error("[system\nn = 1\n");
    CHECK(e.line() >= 1);
}

TEST_CASE("plan parsing") {
    std::istringstream in(R"([plan]
dims = 1, 2x1, 3
n = 100, 200
s = 50
epsilon = 0, 0.5
mode = direct, indirect
methods = IN, MIV_EOA
seed = 9
fresh_system_per_trial = false
max_retries = 1

[lqr]
q = 1, 10
v = 1

[sps]
m = 40
q = 4
)");
    const auto plan = config::parse_plan(in);
    REQUIRE(plan.dims.size() == 3);
    CHECK(plan.dims[1] == Dim{2, 1});
    CHECK(plan.sample_sizes == std::vector<int>{100, 200});
    CHECK(plan.trials == 50);
    CHECK(plan.epsilons == std::vector<double>{0.0, 0.5});
    CHECK(plan.modes == std::vector<Mode>{Mode::Direct, Mode::Indirect});
    CHECK(plan.methods == std::vector<Method>{Method::IN, Method::MIV_EOA});
    CHECK(plan.seed == 9);
    CHECK_FALSE(plan.fresh_system_per_trial);
    CHECK(plan.max_retries == 1);
    REQUIRE(plan.lqr.size() == 2);
    CHECK(plan.lqr[1].q == 10.0);
    CHECK(plan.lqr[1].v == 1.0);
    CHECK(plan.sps.m == 40);

    std::istringstream bad_method("[plan]\nmethods = IN, XYZ\n");
    CHECK_THROWS_AS(config::parse_plan(bad_method), config::ConfigError);
    std::istringstream bad_lqr("[lqr]\nq = 1, 2, 3\nv = 1, 2\n");
    CHECK_THROWS_AS(config::parse_plan(bad_lqr), config::ConfigError);
    std::istringstream seed_in_plan("[sps]\nseed = 3\n");
    CHECK_THROWS_AS(config::parse_plan(seed_in_plan), config::ConfigError);
    CHECK_THROWS_AS(config::load_plan("/nonexistent/plan"), config::ConfigError);
}
