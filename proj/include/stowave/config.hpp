#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "stowave/ensemble.hpp"

namespace stowave {

/// Flat key/value run configuration. Every field has a default matching the
/// reference experiment set-up (dx = 0.1, dt = 0.05, L = 500, T = 100,
/// R = 100, t0 = T/2, Neumann boundaries). Optional fields left at "auto"
/// round-trip as "auto".
struct RunConfig {
    std::string run_kind = "spde";
    double domain_length = 500.0;
    double dx = 0.1;
    std::string bc = "neumann";
    double bc_left = 0.0;
    double bc_right = 1.0;
    double alpha = -0.25;
    double nu = 0.0;
    double mu = 0.1;
    std::string interpretation = "stratonovich";
    std::string scheme = "auto";
    double xi = 0.1;
    std::optional<long> noise_modes;          // auto: zeta cutoff at 1e-12
    double dt = 0.05;
    double total_time = 100.0;
    std::optional<double> t0;                 // auto: T/2
    long realizations = 100;
    std::uint64_t master_seed = 1;
    long snapshot_stride = 100;
    double initial_k = 0.70710678118654752;
    std::optional<double> initial_x0;         // auto: 2L/5
    double template_k = 0.70710678118654752;
    std::optional<double> template_x0;        // auto: 2L/5
    double width_delta = 0.05;
    double level_offset = 0.01;
    std::string advection = "central";        // central | blend
    double beta = 0.5;
    double blowup_threshold = 25.0;
    long extinction_steps = 10;
    double fixed_speed = 0.0;                 // propagation-positive convention
    std::string speed_source = "constant";

    bool operator==(const RunConfig&) const = default;
};

namespace detail {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_real(const std::string& v, int line) {
    size_t pos = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw ConfigError("line " + std::to_string(line) + ": expected a number, got '" + v + "'");
    }
    if (pos != v.size())
        throw ConfigError("line " + std::to_string(line) + ": trailing characters in '" + v + "'");
    return x;
}

inline long parse_int(const std::string& v, int line) {
    size_t pos = 0;
    long x = 0;
    try {
        x = std::stol(v, &pos);
    } catch (const std::exception&) {
        throw ConfigError("line " + std::to_string(line) + ": expected an integer, got '" + v +
                          "'");
    }
    if (pos != v.size())
        throw ConfigError("line " + std::to_string(line) + ": trailing characters in '" + v + "'");
    return x;
}

inline std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

inline RunConfig parse_run_config(const std::string& text) {
    RunConfig cfg;
    std::istringstream ss(text);
    std::string line;
    int lineno = 0;
    std::vector<std::string> seen;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw detail::ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        for (const auto& k : seen)
            if (k == key)
                throw detail::ConfigError("line " + std::to_string(lineno) + ": duplicate key '" +
                                          key + "'");
        seen.push_back(key);

        auto real = [&] { return detail::parse_real(value, lineno); };
        auto integer = [&] { return detail::parse_int(value, lineno); };
        auto optional_real = [&]() -> std::optional<double> {
            if (value == "auto") return std::nullopt;
            return detail::parse_real(value, lineno);
        };

        if (key == "run_kind") cfg.run_kind = value;
        else if (key == "L") cfg.domain_length = real();
        else if (key == "dx") cfg.dx = real();
        else if (key == "bc") cfg.bc = value;
        else if (key == "bc_left") cfg.bc_left = real();
        else if (key == "bc_right") cfg.bc_right = real();
        else if (key == "alpha") cfg.alpha = real();
        else if (key == "nu") cfg.nu = real();
        else if (key == "mu") cfg.mu = real();
        else if (key == "interpretation") cfg.interpretation = value;
        else if (key == "scheme") cfg.scheme = value;
        else if (key == "xi") cfg.xi = real();
        else if (key == "noise_modes") {
            if (value == "auto") cfg.noise_modes.reset();
            else cfg.noise_modes = integer();
        }
        else if (key == "dt") cfg.dt = real();
        else if (key == "T") cfg.total_time = real();
        else if (key == "t0") cfg.t0 = optional_real();
        else if (key == "realizations") cfg.realizations = integer();
        else if (key == "master_seed") cfg.master_seed = static_cast<std::uint64_t>(integer());
        else if (key == "snapshot_stride") cfg.snapshot_stride = integer();
        else if (key == "initial_k") cfg.initial_k = real();
        else if (key == "initial_x0") cfg.initial_x0 = optional_real();
        else if (key == "template_k") cfg.template_k = real();
        else if (key == "template_x0") cfg.template_x0 = optional_real();
        else if (key == "width_delta") cfg.width_delta = real();
        else if (key == "level_offset") cfg.level_offset = real();
        else if (key == "advection") cfg.advection = value;
        else if (key == "beta") cfg.beta = real();
        else if (key == "blowup_threshold") cfg.blowup_threshold = real();
        else if (key == "extinction_steps") cfg.extinction_steps = integer();
        else if (key == "fixed_speed") cfg.fixed_speed = real();
        else if (key == "speed_source") cfg.speed_source = value;
        else
            throw detail::ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key +
                                      "'");
    }
    return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("config: cannot open " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    try {
        return parse_run_config(buf.str());
    } catch (const detail::ConfigError& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

inline std::string serialize_run_config(const RunConfig& c) {
    using detail::format_real;
    std::ostringstream os;
    auto opt = [&](const std::optional<double>& v) {
        return v ? format_real(*v) : std::string("auto");
    };
    os << "run_kind = " << c.run_kind << "\n";
    os << "L = " << format_real(c.domain_length) << "\n";
    os << "dx = " << format_real(c.dx) << "\n";
    os << "bc = " << c.bc << "\n";
    os << "bc_left = " << format_real(c.bc_left) << "\n";
    os << "bc_right = " << format_real(c.bc_right) << "\n";
    os << "alpha = " << format_real(c.alpha) << "\n";
    os << "nu = " << format_real(c.nu) << "\n";
    os << "mu = " << format_real(c.mu) << "\n";
    os << "interpretation = " << c.interpretation << "\n";
    os << "scheme = " << c.scheme << "\n";
    os << "xi = " << format_real(c.xi) << "\n";
    os << "noise_modes = " << (c.noise_modes ? std::to_string(*c.noise_modes) : "auto") << "\n";
    os << "dt = " << format_real(c.dt) << "\n";
    os << "T = " << format_real(c.total_time) << "\n";
    os << "t0 = " << opt(c.t0) << "\n";
    os << "realizations = " << c.realizations << "\n";
    os << "master_seed = " << c.master_seed << "\n";
    os << "snapshot_stride = " << c.snapshot_stride << "\n";
    os << "initial_k = " << format_real(c.initial_k) << "\n";
    os << "initial_x0 = " << opt(c.initial_x0) << "\n";
    os << "template_k = " << format_real(c.template_k) << "\n";
    os << "template_x0 = " << opt(c.template_x0) << "\n";
    os << "width_delta = " << format_real(c.width_delta) << "\n";
    os << "level_offset = " << format_real(c.level_offset) << "\n";
    os << "advection = " << c.advection << "\n";
    os << "beta = " << format_real(c.beta) << "\n";
    os << "blowup_threshold = " << format_real(c.blowup_threshold) << "\n";
    os << "extinction_steps = " << c.extinction_steps << "\n";
    os << "fixed_speed = " << format_real(c.fixed_speed) << "\n";
    os << "speed_source = " << c.speed_source << "\n";
    return os.str();
}

inline RunKind parse_run_kind(const std::string& s) {
    if (s == "pde") return RunKind::Pde;
    if (s == "pdae") return RunKind::Pdae;
    if (s == "spde") return RunKind::Spde;
    if (s == "spdae") return RunKind::Spdae;
    if (s == "fixed_speed_spde") return RunKind::FixedSpeedSpde;
    throw std::runtime_error("config: unknown run_kind '" + s + "'");
}

inline SpeedSource parse_speed_source(const std::string& s) {
    if (s == "constant") return SpeedSource::Constant;
    if (s == "per_realization_Lambda") return SpeedSource::PerRealizationTimeAverage;
    if (s == "ensemble_mean_lambda") return SpeedSource::EnsembleMeanInstantaneous;
    if (s == "ensemble_mean_Lambda") return SpeedSource::EnsembleMeanTimeAverage;
    throw std::runtime_error("config: unknown speed_source '" + s + "'");
}

/// Resolves the file-level configuration to the executable description.
inline EnsembleConfig to_ensemble_config(const RunConfig& c) {
    EnsembleConfig out;
    RunSetup& run = out.run;
    BoundaryKind bc;
    if (c.bc == "neumann") bc = BoundaryKind::Neumann;
    else if (c.bc == "dirichlet") bc = BoundaryKind::Dirichlet;
    else throw std::runtime_error("config: unknown bc '" + c.bc + "'");
    run.grid = make_grid(c.domain_length, c.dx, bc, c.bc_left, c.bc_right);

    run.model.alpha = c.alpha;
    run.model.nu = c.nu;
    run.model.mu = c.mu;
    if (c.interpretation == "ito") run.model.interpretation = NoiseInterpretation::Ito;
    else if (c.interpretation == "stratonovich")
        run.model.interpretation = NoiseInterpretation::Stratonovich;
    else throw std::runtime_error("config: unknown interpretation '" + c.interpretation + "'");

    run.kind = parse_run_kind(c.run_kind);
    if (c.scheme == "auto")
        run.scheme = run.model.interpretation == NoiseInterpretation::Stratonovich
                         ? SpdeScheme::EulerHeun
                         : SpdeScheme::EulerMaruyama;
    else if (c.scheme == "euler_heun") run.scheme = SpdeScheme::EulerHeun;
    else if (c.scheme == "euler_maruyama") run.scheme = SpdeScheme::EulerMaruyama;
    else throw std::runtime_error("config: unknown scheme '" + c.scheme + "'");

    if (c.advection == "central") run.advection = AdvectionKind::Central;
    else if (c.advection == "blend") run.advection = AdvectionKind::UpwindBlend;
    else throw std::runtime_error("config: unknown advection '" + c.advection + "'");

    run.beta = c.beta;
    run.dt = c.dt;
    run.total_time = c.total_time;
    run.t0 = c.t0.value_or(0.5 * c.total_time);
    run.xi = c.xi;
    run.noise_truncation = c.noise_modes ? static_cast<int>(*c.noise_modes) : -1;
    run.initial.steepness = c.initial_k;
    run.initial.shift = c.initial_x0.value_or(0.4 * c.domain_length);
    run.reference.steepness = c.template_k;
    run.reference.shift = c.template_x0.value_or(0.4 * c.domain_length);
    run.width_delta = c.width_delta;
    run.level_offset = c.level_offset;
    run.blowup_threshold = c.blowup_threshold;
    run.extinction_steps = static_cast<int>(c.extinction_steps);
    run.frame_speed = kPropagationSign * c.fixed_speed;
    run.master_seed = c.master_seed;
    run.snapshot_stride = static_cast<std::uint32_t>(c.snapshot_stride);
    out.realizations = static_cast<int>(c.realizations);
    return out;
}

}  // namespace stowave
