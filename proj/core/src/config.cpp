#include "mivsps/config.hpp"

#include "mivsps/regression.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace mivsps::config {

namespace pt = boost::property_tree;

namespace {

enum Stream : std::uint64_t { kSystemStream = 1, kSimulationStream = 2, kSpsStream = 3, kEstimationStream = 4 };

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

// Line numbers of `section.key` entries, recovered from the raw text so
// field errors can point at the offending line.
class Source {
public:
    Source(std::istream& in, std::string name) : name_(std::move(name)) {
        std::ostringstream buffer;
        buffer << in.rdbuf();
        text_ = buffer.str();
        std::istringstream lines(text_);
        std::string line, section;
        int lineno = 0;
        while (std::getline(lines, line)) {
            ++lineno;
            const std::string t = trim(line);
            if (t.empty() || t[0] == ';' || t[0] == '#') continue;
            if (t.front() == '[' && t.back() == ']') {
                section = trim(t.substr(1, t.size() - 2));
                continue;
            }
            const auto eq = t.find('=');
            if (eq != std::string::npos) lines_[section + "." + trim(t.substr(0, eq))] = lineno;
        }
        std::istringstream parse_in(strip_hash_comments(text_));
        try {
            pt::read_ini(parse_in, tree_);
        } catch (const pt::ini_parser_error& e) {
            std::ostringstream msg;
            msg << name_ << ":" << e.line() << ": " << e.message();
            throw ConfigError("", static_cast<int>(e.line()), msg.str());
        }
    }

    const pt::ptree& tree() const { return tree_; }

    int line_of(const std::string& field) const {
        const auto it = lines_.find(field);
        return it == lines_.end() ? 0 : it->second;
    }

    [[noreturn]] void fail(const std::string& field, const std::string& what) const {
        std::ostringstream msg;
        msg << name_;
        const int line = line_of(field);
        if (line > 0) msg << ":" << line;
        msg << ": " << field << ": " << what;
        throw ConfigError(field, line, msg.str());
    }

    void check_keys(const std::map<std::string, std::set<std::string>>& allowed) const {
        for (const auto& [section, body] : tree_) {
            const auto it = allowed.find(section);
            if (it == allowed.end()) fail(section, "unknown section");
            if (body.empty() && !body.data().empty()) fail(section, "entries must live inside a [section]");
            for (const auto& [key, value] : body) {
                if (!it->second.contains(key)) fail(section + "." + key, "unknown key");
            }
        }
    }

    std::optional<std::string> raw(const std::string& field) const {
        auto value = tree_.get_optional<std::string>(pt::ptree::path_type(field, '.'));
        if (!value) return std::nullopt;
        return trim(*value);
    }

    template <class T>
    T number(const std::string& field, T fallback) const {
        const auto text = raw(field);
        return text ? parse_number<T>(field, *text) : fallback;
    }

    template <class T>
    std::vector<T> numbers(const std::string& field, std::vector<T> fallback) const {
        const auto text = raw(field);
        if (!text) return fallback;
        std::vector<T> out;
        for (const auto& item : split_list(*text)) out.push_back(parse_number<T>(field, item));
        if (out.empty()) fail(field, "empty list");
        return out;
    }

    template <class T>
    T parse_number(const std::string& field, const std::string& text) const {
        T value{};
        const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
        if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
            fail(field, "expected a number, got '" + text + "'");
        }
        return value;
    }

    bool boolean(const std::string& field, bool fallback) const {
        const auto text = raw(field);
        if (!text) return fallback;
        if (*text == "true" || *text == "1" || *text == "yes") return true;
        if (*text == "false" || *text == "0" || *text == "no") return false;
        fail(field, "expected true or false, got '" + *text + "'");
    }

private:
    static std::string strip_hash_comments(const std::string& text) {
        std::istringstream in(text);
        std::ostringstream out;
        std::string line;
        while (std::getline(in, line)) {
            const std::string t = trim(line);
            out << (!t.empty() && t[0] == '#' ? std::string() : line) << '\n';
        }
        return out.str();
    }

    std::string name_;
    std::string text_;
    pt::ptree tree_;
    std::map<std::string, int> lines_;
};

Dim parse_dim(const Source& src, const std::string& field, const std::string& text) {
    const auto x = text.find('x');
    if (x == std::string::npos) {
        const int d = src.parse_number<int>(field, text);
        if (d < 1) src.fail(field, "dimensions must be positive");
        return Dim{d, d};
    }
    Dim dim{src.parse_number<int>(field, trim(text.substr(0, x))),
            src.parse_number<int>(field, trim(text.substr(x + 1)))};
    if (dim.dx < 1 || dim.du < 1) src.fail(field, "dimensions must be positive");
    return dim;
}

Mode parse_mode(const Source& src, const std::string& field, const std::string& text) {
    if (text == "direct") return Mode::Direct;
    if (text == "indirect") return Mode::Indirect;
    src.fail(field, "expected direct or indirect, got '" + text + "'");
}

InstrumentMode parse_instruments(const Source& src, const std::string& field) {
    const auto text = src.raw(field);
    if (!text || *text == "single") return InstrumentMode::SingleSample;
    if (*text == "two_sample") return InstrumentMode::TwoSample;
    src.fail(field, "expected single or two_sample, got '" + *text + "'");
}

NoiseModel parse_noise(const Source& src, int horizon) {
    const std::string family = src.raw("noise.family").value_or("gaussian");
    std::vector<double> params;
    if (src.raw("noise.params")) params = src.numbers<double>("noise.params", {});
    const auto param = [&](std::size_t idx, const std::string& key, double fallback) {
        if (src.raw("noise." + key)) return src.number<double>("noise." + key, fallback);
        return idx < params.size() ? params[idx] : fallback;
    };
    NoiseModel noise;
    if (family == "gaussian") {
        noise = IidGaussian{param(0, "sigma", 1.0)};
    } else if (family == "bimodal_gaussian") {
        noise = BimodalGaussianMixture{param(0, "mu", 1.0), param(1, "sigma_w", 1.0)};
    } else if (family == "laplace_mixture") {
        noise = TimeVaryingLaplacianMixture{param(0, "sigma_w", 1.0), horizon};
    } else {
        src.fail("noise.family", "unknown noise family '" + family + "'");
    }
    try {
        validate(noise);
    } catch (const Error& e) {
        src.fail("noise", e.what());
    }
    return noise;
}

SpsConfig parse_sps(const Source& src, std::uint64_t default_seed) {
    SpsConfig sps;
    sps.m = src.number<int>("sps.m", 100);
    sps.q = src.number<int>("sps.q", 10);
    sps.seed = src.number<std::uint64_t>("sps.seed", default_seed);
    try {
        validate(sps);
    } catch (const Error& e) {
        src.fail("sps", e.what());
    }
    return sps;
}

const std::set<std::string> kNoiseKeys{"family", "sigma", "mu", "sigma_w", "params"};

}  // namespace

SystemConfig parse_system(std::istream& in, const std::string& source) {
    const Source src(in, source);
    src.check_keys({
        {"system", {"dims", "seed", "target_radius", "epsilon", "n", "mode", "instruments"}},
        {"noise", kNoiseKeys},
        {"lqr", {"q", "v"}},
        {"sps", {"m", "q", "seed"}},
    });
    SystemConfig cfg;
    if (const auto dims = src.raw("system.dims")) cfg.dims = parse_dim(src, "system.dims", *dims);
    cfg.seed = src.number<std::uint64_t>("system.seed", 1);
    cfg.target_radius = src.number<double>("system.target_radius", 0.9);
    if (!(cfg.target_radius > 0.0 && cfg.target_radius < 1.0)) {
        src.fail("system.target_radius", "must lie in (0, 1)");
    }
    cfg.epsilon = src.number<double>("system.epsilon", 0.0);
    if (!(cfg.epsilon >= 0.0 && cfg.epsilon <= 1.0)) src.fail("system.epsilon", "must lie in [0, 1]");
    cfg.n = src.number<int>("system.n", 500);
    if (cfg.n < 1) src.fail("system.n", "must be >= 1");
    if (const auto mode = src.raw("system.mode")) cfg.mode = parse_mode(src, "system.mode", *mode);
    cfg.instruments = parse_instruments(src, "system.instruments");
    cfg.noise = parse_noise(src, cfg.n);
    cfg.lqr.q = src.number<double>("lqr.q", 1.0);
    cfg.lqr.v = src.number<double>("lqr.v", 1.0);
    if (!(cfg.lqr.q > 0.0)) src.fail("lqr.q", "must be positive");
    if (!(cfg.lqr.v > 0.0)) src.fail("lqr.v", "must be positive");
    cfg.sps = parse_sps(src, derive_seed(cfg.seed, kSpsStream));
    return cfg;
}

SystemConfig load_system(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", 0, "cannot open config '" + path.string() + "'");
    return parse_system(in, path.string());
}

ExperimentPlan parse_plan(std::istream& in, const std::string& source) {
    const Source src(in, source);
    src.check_keys({
        {"plan",
         {"dims", "n", "s", "epsilon", "mode", "methods", "seed", "fresh_system_per_trial",
          "instruments", "target_radius", "max_retries"}},
        {"noise", kNoiseKeys},
        {"lqr", {"q", "v"}},
        {"sps", {"m", "q"}},
    });
    ExperimentPlan plan;
    if (const auto dims = src.raw("plan.dims")) {
        plan.dims.clear();
        for (const auto& item : split_list(*dims)) plan.dims.push_back(parse_dim(src, "plan.dims", item));
        if (plan.dims.empty()) src.fail("plan.dims", "empty list");
    }
    plan.sample_sizes = src.numbers<int>("plan.n", {500});
    for (int n : plan.sample_sizes) {
        if (n < 1) src.fail("plan.n", "sample sizes must be >= 1");
    }
    plan.trials = src.number<int>("plan.s", 500);
    if (plan.trials < 1) src.fail("plan.s", "must be >= 1");
    plan.epsilons = src.numbers<double>("plan.epsilon", {0.0});
    for (double e : plan.epsilons) {
        if (!(e >= 0.0 && e <= 1.0)) src.fail("plan.epsilon", "values must lie in [0, 1]");
    }
    if (const auto modes = src.raw("plan.mode")) {
        plan.modes.clear();
        for (const auto& item : split_list(*modes)) plan.modes.push_back(parse_mode(src, "plan.mode", item));
    }
    if (const auto methods = src.raw("plan.methods")) {
        plan.methods.clear();
        for (const auto& item : split_list(*methods)) {
            const auto method = parse_method(item);
            if (!method) src.fail("plan.methods", "unknown method '" + item + "'");
            plan.methods.push_back(*method);
        }
        if (plan.methods.empty()) src.fail("plan.methods", "empty list");
    }
    plan.seed = src.number<std::uint64_t>("plan.seed", 1);
    plan.fresh_system_per_trial = src.boolean("plan.fresh_system_per_trial", true);
    plan.instruments = parse_instruments(src, "plan.instruments");
    plan.target_radius = src.number<double>("plan.target_radius", 0.9);
    if (!(plan.target_radius > 0.0 && plan.target_radius < 1.0)) {
        src.fail("plan.target_radius", "must lie in (0, 1)");
    }
    plan.max_retries = src.number<int>("plan.max_retries", 3);
    if (plan.max_retries < 0) src.fail("plan.max_retries", "must be >= 0");
    plan.noise = parse_noise(src, plan.sample_sizes.front());
    const auto qs = src.numbers<double>("lqr.q", {1.0});
    const auto vs = src.numbers<double>("lqr.v", {1.0});
    if (qs.size() != vs.size() && qs.size() != 1 && vs.size() != 1) {
        src.fail("lqr", "q and v lists must have equal length (or one of them a single value)");
    }
    plan.lqr.clear();
    for (std::size_t i = 0; i < std::max(qs.size(), vs.size()); ++i) {
        const LqrWeights w{qs[qs.size() == 1 ? 0 : i], vs[vs.size() == 1 ? 0 : i]};
        if (!(w.q > 0.0 && w.v > 0.0)) src.fail("lqr", "weights must be positive");
        plan.lqr.push_back(w);
    }
    plan.sps = parse_sps(src, 0);
    return plan;
}

ExperimentPlan load_plan(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", 0, "cannot open plan '" + path.string() + "'");
    return parse_plan(in, path.string());
}

Experiment realize(const SystemConfig& config) {
    const auto sys = random_stable_system(config.dims.dx, config.dims.du, config.target_radius,
                                          derive_seed(config.seed, kSystemStream));
    Matrix K = Matrix::Zero(config.dims.du, config.dims.dx);
    if (config.epsilon > 0.0) K = synthesize_lqr(sys.A, sys.B, config.lqr.q, config.lqr.v);
    Experiment out;
    out.spec = make_system(sys.A, sys.B, K, config.epsilon, config.noise);
    out.trajectory = simulate(out.spec, config.n, derive_seed(config.seed, kSimulationStream));
    const auto regression = [&](const Trajectory& traj) {
        return config.mode == Mode::Direct ? build_direct(traj) : build_indirect(traj, out.spec).data;
    };
    const RegressionData plain = regression(out.trajectory);
    if (config.instruments == InstrumentMode::TwoSample) {
        const Trajectory other =
            simulate(out.spec, config.n, derive_seed(config.seed, kEstimationStream));
        out.data = build_instruments(plain, out.trajectory, regression(other));
    } else {
        out.data = build_instruments(plain, out.trajectory);
    }
    out.truth = true_parameter(out.spec, config.mode);
    return out;
}

}  // namespace mivsps::config
