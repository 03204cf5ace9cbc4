#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stowave/grid.hpp"
#include "stowave/metrics.hpp"
#include "stowave/model.hpp"
#include "stowave/stepper.hpp"

namespace stowave {

/// Everything needed to interpret a stored trajectory without the original
/// configuration file.
struct TrajectoryMeta {
    Grid grid;
    double alpha = 0.0, nu = 0.0, mu = 0.0;
    NoiseInterpretation interpretation = NoiseInterpretation::Stratonovich;
    double xi = 0.0;
    std::uint32_t truncation = 0;
    double dt = 0.0;
    std::uint32_t stride = 0;
    std::uint64_t master_seed = 0;
    std::uint32_t realization = 0;
    RunKind kind = RunKind::Spde;
    double frame_speed = 0.0;  // internal convention; FixedSpeedSpde only
};

/// Per-step series of one realization plus optional strided profile frames.
/// lambda/gamma/shift use the internal sign convention; level positions and
/// widths are lab-frame values (NaN where the crossing was absent).
struct TrajectoryRecord {
    TrajectoryMeta meta;
    std::vector<double> times, lambda, gamma, level_a, level_b, level_c, shift, width;
    std::vector<std::pair<std::uint64_t, std::vector<double>>> frames;
    std::vector<double> final_full;  // full-grid profile at termination
    SolverStatus status = SolverStatus::Done;
    long fail_step = -1;
    long template_fail_step = -1;
};

enum class Estimator {
    LambdaMin,
    LambdaGamma,
    LevelA,
    LevelB,
    LevelC,
    LevelFitA,
    LevelFitB,
    LevelFitC,
};

inline const char* estimator_name(Estimator e) {
    switch (e) {
        case Estimator::LambdaMin: return "Lambda_min";
        case Estimator::LambdaGamma: return "Lambda_gamma";
        case Estimator::LevelA: return "Lambda_a";
        case Estimator::LevelB: return "Lambda_b";
        case Estimator::LevelC: return "Lambda_c";
        case Estimator::LevelFitA: return "Lambdafit_a";
        case Estimator::LevelFitB: return "Lambdafit_b";
        case Estimator::LevelFitC: return "Lambdafit_c";
    }
    return "?";
}

constexpr Estimator kAllEstimators[] = {
    Estimator::LambdaMin,  Estimator::LambdaGamma, Estimator::LevelA,
    Estimator::LevelB,     Estimator::LevelC,      Estimator::LevelFitA,
    Estimator::LevelFitB,  Estimator::LevelFitC,
};

/// Reported wave speeds are positive in the direction of propagation. The
/// increasing logistic front invades the u- = 0 state at small x, so lab and
/// frame velocities are converted with this fixed factor.
constexpr double kPropagationSign = -1.0;

struct RealizationEstimates {
    std::map<Estimator, double> speeds;               // propagation-positive
    std::vector<double> lambda_window;                // instantaneous, reported sign
    std::optional<double> width_mean;
    bool template_failed = false;
};

/// Extracts all speed estimators from a stored series. Frozen kinds take the
/// instantaneous speed directly from the solved lambda series; free kinds
/// difference the template shift.
inline RealizationEstimates compute_estimates(const TrajectoryRecord& rec, double t0) {
    RealizationEstimates out;
    out.template_failed = rec.template_fail_step >= 0;
    const bool frozen = is_frozen(rec.meta.kind);
    const std::vector<double>* position = frozen ? &rec.gamma : &rec.shift;

    if (frozen) {
        double sum = 0.0;
        int count = 0;
        for (size_t i = 1; i < rec.times.size(); ++i) {
            if (rec.times[i] > t0 && std::isfinite(rec.lambda[i])) {
                out.lambda_window.push_back(kPropagationSign * rec.lambda[i]);
                sum += rec.lambda[i];
                ++count;
            }
        }
        if (count > 0) out.speeds[Estimator::LambdaMin] = kPropagationSign * sum / count;
        if (auto fit = speed_linfit(rec.times, rec.gamma, t0))
            out.speeds[Estimator::LambdaGamma] = kPropagationSign * fit->value;
    } else {
        const auto series = template_speed_series(rec.times, *position, t0);
        for (size_t i = 1; i < rec.times.size(); ++i)
            if (rec.times[i] > t0 && std::isfinite(series.lambda[i]))
                out.lambda_window.push_back(kPropagationSign * series.lambda[i]);
        if (series.lambda_min)
            out.speeds[Estimator::LambdaMin] = kPropagationSign * *series.lambda_min;
        if (series.lambda_gamma)
            out.speeds[Estimator::LambdaGamma] = kPropagationSign * *series.lambda_gamma;
    }
    // a FixedSpeedSpde run measures positions in the moving frame; add the
    // frame velocity back to report lab-frame speeds
    const double frame_boost = rec.meta.kind == RunKind::FixedSpeedSpde
                                   ? kPropagationSign * rec.meta.frame_speed
                                   : 0.0;

    const std::vector<double>* levels[3] = {&rec.level_a, &rec.level_b, &rec.level_c};
    const Estimator secants[3] = {Estimator::LevelA, Estimator::LevelB, Estimator::LevelC};
    const Estimator fits[3] = {Estimator::LevelFitA, Estimator::LevelFitB, Estimator::LevelFitC};
    for (int k = 0; k < 3; ++k) {
        if (auto est = speed_secant(rec.times, *levels[k], t0))
            out.speeds[secants[k]] = kPropagationSign * est->value + frame_boost;
        if (auto est = speed_linfit(rec.times, *levels[k], t0))
            out.speeds[fits[k]] = kPropagationSign * est->value + frame_boost;
    }
    if (rec.meta.kind == RunKind::FixedSpeedSpde) {
        // the template shift is also frame-relative
        if (out.speeds.count(Estimator::LambdaMin)) out.speeds[Estimator::LambdaMin] += frame_boost;
        if (out.speeds.count(Estimator::LambdaGamma))
            out.speeds[Estimator::LambdaGamma] += frame_boost;
        for (double& l : out.lambda_window) l += frame_boost;
    }

    double wsum = 0.0;
    int wcount = 0;
    for (size_t i = 0; i < rec.times.size(); ++i) {
        if (rec.times[i] >= t0 && std::isfinite(rec.width[i])) {
            wsum += rec.width[i];
            ++wcount;
        }
    }
    if (wcount > 0) out.width_mean = wsum / wcount;
    return out;
}

// ---------------------------------------------------------------------------
// Versioned binary trajectory file.
// Layout (little-endian):
//   char[8] magic "STWTRAJ1"; u32 version (1)
//   f64 L; u32 M; u8 bc; f64 bc_left, bc_right
//   f64 alpha, nu, mu; u8 interpretation
//   f64 xi; u32 truncation; f64 dt; u32 stride
//   u64 master_seed; u32 realization; u8 run_kind; f64 frame_speed
//   u8 status; i64 fail_step; i64 template_fail_step
//   u64 n_series; u32 n_unknowns; u32 n_frames; u32 n_full
//   series: n_series records of 8 f64 {t, lambda, gamma, a, b, c, shift, width}
//   frames: n_frames of {u64 step; f64[n_unknowns]}
//   final:  f64[n_full] full-grid profile at termination
// ---------------------------------------------------------------------------

inline constexpr char kTrajectoryMagic[8] = {'S', 'T', 'W', 'T', 'R', 'A', 'J', '1'};

namespace detail {
template <class T>
void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
void get(std::istream& is, T& v) {
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
}
}  // namespace detail

inline void write_trajectory(const std::string& path, const TrajectoryRecord& rec) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("trajectory: cannot open " + path);
    using detail::put;
    os.write(kTrajectoryMagic, 8);
    put(os, std::uint32_t{1});
    put(os, rec.meta.grid.length);
    put(os, static_cast<std::uint32_t>(rec.meta.grid.n_points));
    put(os, static_cast<std::uint8_t>(rec.meta.grid.bc));
    put(os, rec.meta.grid.left_value);
    put(os, rec.meta.grid.right_value);
    put(os, rec.meta.alpha);
    put(os, rec.meta.nu);
    put(os, rec.meta.mu);
    put(os, static_cast<std::uint8_t>(rec.meta.interpretation));
    put(os, rec.meta.xi);
    put(os, rec.meta.truncation);
    put(os, rec.meta.dt);
    put(os, rec.meta.stride);
    put(os, rec.meta.master_seed);
    put(os, rec.meta.realization);
    put(os, static_cast<std::uint8_t>(rec.meta.kind));
    put(os, rec.meta.frame_speed);
    put(os, static_cast<std::uint8_t>(rec.status));
    put(os, static_cast<std::int64_t>(rec.fail_step));
    put(os, static_cast<std::int64_t>(rec.template_fail_step));
    put(os, static_cast<std::uint64_t>(rec.times.size()));
    const std::uint32_t n_unknowns =
        rec.frames.empty() ? 0u : static_cast<std::uint32_t>(rec.frames.front().second.size());
    put(os, n_unknowns);
    put(os, static_cast<std::uint32_t>(rec.frames.size()));
    put(os, static_cast<std::uint32_t>(rec.final_full.size()));
    for (size_t i = 0; i < rec.times.size(); ++i) {
        put(os, rec.times[i]);
        put(os, rec.lambda[i]);
        put(os, rec.gamma[i]);
        put(os, rec.level_a[i]);
        put(os, rec.level_b[i]);
        put(os, rec.level_c[i]);
        put(os, rec.shift[i]);
        put(os, rec.width[i]);
    }
    for (const auto& [step, u] : rec.frames) {
        put(os, step);
        os.write(reinterpret_cast<const char*>(u.data()),
                 static_cast<std::streamsize>(u.size() * sizeof(double)));
    }
    os.write(reinterpret_cast<const char*>(rec.final_full.data()),
             static_cast<std::streamsize>(rec.final_full.size() * sizeof(double)));
    if (!os) throw std::runtime_error("trajectory: write failed for " + path);
}

inline TrajectoryRecord read_trajectory(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("trajectory: cannot open " + path);
    using detail::get;
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kTrajectoryMagic, 8) != 0)
        throw std::runtime_error("trajectory: bad magic in " + path);
    std::uint32_t version = 0;
    get(is, version);
    if (version != 1) throw std::runtime_error("trajectory: unsupported version");
    TrajectoryRecord rec;
    std::uint32_t m = 0;
    std::uint8_t bc = 0, interp = 0, kind = 0, status = 0;
    get(is, rec.meta.grid.length);
    get(is, m);
    get(is, bc);
    get(is, rec.meta.grid.left_value);
    get(is, rec.meta.grid.right_value);
    rec.meta.grid.n_points = static_cast<int>(m);
    rec.meta.grid.bc = static_cast<BoundaryKind>(bc);
    get(is, rec.meta.alpha);
    get(is, rec.meta.nu);
    get(is, rec.meta.mu);
    get(is, interp);
    rec.meta.interpretation = static_cast<NoiseInterpretation>(interp);
    get(is, rec.meta.xi);
    get(is, rec.meta.truncation);
    get(is, rec.meta.dt);
    get(is, rec.meta.stride);
    get(is, rec.meta.master_seed);
    get(is, rec.meta.realization);
    get(is, kind);
    rec.meta.kind = static_cast<RunKind>(kind);
    get(is, rec.meta.frame_speed);
    get(is, status);
    rec.status = static_cast<SolverStatus>(status);
    std::int64_t fail = 0, tfail = 0;
    get(is, fail);
    get(is, tfail);
    rec.fail_step = static_cast<long>(fail);
    rec.template_fail_step = static_cast<long>(tfail);
    std::uint64_t n_series = 0;
    std::uint32_t n_unknowns = 0, n_frames = 0, n_full = 0;
    get(is, n_series);
    get(is, n_unknowns);
    get(is, n_frames);
    get(is, n_full);
    if (!is) throw std::runtime_error("trajectory: truncated header in " + path);
    auto resize_all = [&](std::uint64_t n) {
        rec.times.resize(n);
        rec.lambda.resize(n);
        rec.gamma.resize(n);
        rec.level_a.resize(n);
        rec.level_b.resize(n);
        rec.level_c.resize(n);
        rec.shift.resize(n);
        rec.width.resize(n);
    };
    resize_all(n_series);
    for (std::uint64_t i = 0; i < n_series; ++i) {
        get(is, rec.times[i]);
        get(is, rec.lambda[i]);
        get(is, rec.gamma[i]);
        get(is, rec.level_a[i]);
        get(is, rec.level_b[i]);
        get(is, rec.level_c[i]);
        get(is, rec.shift[i]);
        get(is, rec.width[i]);
        if (!is) throw std::runtime_error("trajectory: truncated series in " + path);
    }
    rec.frames.resize(n_frames);
    for (auto& [step, u] : rec.frames) {
        get(is, step);
        u.resize(n_unknowns);
        is.read(reinterpret_cast<char*>(u.data()),
                static_cast<std::streamsize>(u.size() * sizeof(double)));
        if (!is) throw std::runtime_error("trajectory: truncated frame in " + path);
    }
    rec.final_full.resize(n_full);
    is.read(reinterpret_cast<char*>(rec.final_full.data()),
            static_cast<std::streamsize>(n_full * sizeof(double)));
    if (!is) throw std::runtime_error("trajectory: truncated profile in " + path);
    is.peek();
    if (!is.eof()) throw std::runtime_error("trajectory: trailing bytes in " + path);
    return rec;
}

}  // namespace stowave
