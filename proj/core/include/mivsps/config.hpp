#pragma once

#include "mivsps/mc.hpp"
#include "mivsps/model.hpp"
#include "mivsps/sps.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

// Plain-text configuration: `key = value` lines grouped under `[section]`
// headers, `;` or `#` comments. Unknown sections or keys are rejected.
//
// System config (single experiment):
//   [system] dims = 2 | 2x1, seed, target_radius, epsilon, n,
//            mode = direct|indirect, instruments = single|two_sample
//   [noise]  family = gaussian|bimodal_gaussian|laplace_mixture,
//            sigma | mu, sigma_w | params = comma list in that order
//   [lqr]    q, v
//   [sps]    m, q, seed
//
// Plan (Monte Carlo experiment): the [noise] and [sps] sections above plus
//   [plan]   dims = 1,2,3 ; n = 500 (list) ; s ; epsilon (list) ;
//            mode (list) ; methods = AS,IN,IV_EOA,MIV_EOA ; seed ;
//            fresh_system_per_trial ; instruments ; target_radius ; max_retries
//   [lqr]    q = 1,10 ; v = 1,1   (zipped into weight pairs)
namespace mivsps::config {

class ConfigError : public Error {
public:
    ConfigError(std::string field, int line, const std::string& what)
        : Error(what), field_(std::move(field)), line_(line) {}
    const std::string& field() const noexcept { return field_; }
    int line() const noexcept { return line_; }  // 0 when not tied to a line

private:
    std::string field_;
    int line_;
};

struct SystemConfig {
    Dim dims{2, 2};
    std::uint64_t seed = 1;
    double target_radius = 0.9;
    double epsilon = 0.0;
    int n = 500;
    Mode mode = Mode::Direct;
    InstrumentMode instruments = InstrumentMode::SingleSample;
    NoiseModel noise = IidGaussian{1.0};
    LqrWeights lqr;
    SpsConfig sps{100, 10, 0};
};

SystemConfig parse_system(std::istream& in, const std::string& source = "<config>");
SystemConfig load_system(const std::filesystem::path& path);

ExperimentPlan parse_plan(std::istream& in, const std::string& source = "<plan>");
ExperimentPlan load_plan(const std::filesystem::path& path);

// Everything derived deterministically from a SystemConfig.
struct Experiment {
    SystemSpec spec;
    Trajectory trajectory;
    RegressionData data;  // with instruments
    Matrix truth;
};

Experiment realize(const SystemConfig& config);

}  // namespace mivsps::config
