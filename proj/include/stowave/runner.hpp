#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stowave/grid.hpp"
#include "stowave/metrics.hpp"
#include "stowave/model.hpp"
#include "stowave/noise.hpp"
#include "stowave/rng.hpp"
#include "stowave/stepper.hpp"
#include "stowave/trajectory.hpp"

namespace stowave {

/// Complete description of a run, shared by every realization of an
/// ensemble. Speeds are stored in the internal frame convention.
struct RunSetup {
    Grid grid;
    NagumoModel model;
    RunKind kind = RunKind::Spde;
    SpdeScheme scheme = SpdeScheme::EulerHeun;
    AdvectionKind advection = AdvectionKind::Central;
    double beta = 0.5;
    double dt = 0.05;
    double total_time = 100.0;
    double t0 = 50.0;
    double xi = 0.1;
    int noise_truncation = -1;  // -1 = auto
    ProfileSpec initial;
    ProfileSpec reference;  // template for phase condition and fitting
    double width_delta = 0.05;
    double level_offset = 0.01;  // a/b tracks sit at u- + offset and u+ - offset
    double blowup_threshold = 25.0;
    int extinction_steps = 10;
    double frame_speed = 0.0;  // internal convention; FixedSpeedSpde only
    std::uint64_t master_seed = 1;
    std::uint32_t snapshot_stride = 0;  // 0 = no frames
    bool keep_frames = false;

    long n_steps() const { return std::lround(total_time / dt); }
};

/// Immutable per-ensemble machinery built once and shared across workers.
struct PreparedRun {
    RunSetup setup;
    NoiseModel noise;
    std::shared_ptr<const WaveStepper<NagumoModel>> stepper;
    std::shared_ptr<const TemplateRef> template_ref;
    std::shared_ptr<const IncrementSampler> sampler_prototype;

    explicit PreparedRun(const RunSetup& s) : setup(s) {
        setup.grid.validate();
        if (!(setup.t0 < setup.total_time))
            throw std::invalid_argument("run: t0 must be smaller than T");
        noise = build_noise_model(setup.grid.length, setup.xi, setup.noise_truncation);
        const double c0 = covariance(0.0, setup.xi);
        std::vector<double> template_full = sample_profile(setup.reference, setup.grid);
        stepper = std::make_shared<const WaveStepper<NagumoModel>>(
            setup.grid, setup.model, setup.dt, template_full, setup.advection, setup.beta, c0,
            setup.blowup_threshold);
        template_ref = std::make_shared<const TemplateRef>(setup.reference, setup.grid);
        if (is_stochastic(setup.kind))
            sampler_prototype = std::make_shared<const IncrementSampler>(noise, setup.grid);
    }
};

namespace detail {
inline double nan_value() { return std::numeric_limits<double>::quiet_NaN(); }
}

/// Runs one realization to the final time (or failure) and records the
/// per-step series. `frame_speed_override` supports the two-pass averaged
/// freezing protocol. Thread-safe: shares only immutable state.
inline TrajectoryRecord run_realization(const PreparedRun& prep, std::uint32_t realization,
                                        std::optional<double> frame_speed_override = {},
                                        NoiseDumpWriter* noise_dump = nullptr) {
    const RunSetup& s = prep.setup;
    const Grid& grid = s.grid;
    const long n_steps = s.n_steps();
    const double frame_speed = frame_speed_override.value_or(s.frame_speed);

    TrajectoryRecord rec;
    rec.meta.grid = grid;
    rec.meta.alpha = s.model.alpha;
    rec.meta.nu = s.model.nu;
    rec.meta.mu = s.model.mu;
    rec.meta.interpretation = s.model.interpretation;
    rec.meta.xi = s.xi;
    rec.meta.truncation = static_cast<std::uint32_t>(prep.noise.truncation);
    rec.meta.dt = s.dt;
    rec.meta.stride = s.snapshot_stride;
    rec.meta.master_seed = s.master_seed;
    rec.meta.realization = realization;
    rec.meta.kind = s.kind;
    rec.meta.frame_speed = frame_speed;

    const size_t n_rec = static_cast<size_t>(n_steps) + 1;
    rec.times.assign(n_rec, detail::nan_value());
    rec.lambda.assign(n_rec, detail::nan_value());
    rec.gamma.assign(n_rec, detail::nan_value());
    rec.level_a.assign(n_rec, detail::nan_value());
    rec.level_b.assign(n_rec, detail::nan_value());
    rec.level_c.assign(n_rec, detail::nan_value());
    rec.shift.assign(n_rec, detail::nan_value());
    rec.width.assign(n_rec, detail::nan_value());

    SolverState state;
    state.u.resize(static_cast<size_t>(grid.unknowns()));
    const std::vector<double> initial_full = sample_profile(s.initial, grid);
    for (int i = 0; i < grid.unknowns(); ++i)
        state.u[static_cast<size_t>(i)] =
            initial_full[static_cast<size_t>(i + grid.first_unknown())];

    const WaveStepper<NagumoModel>& stepper = *prep.stepper;
    typename WaveStepper<NagumoModel>::Workspace ws;
    GaussianStream stream(s.master_seed, realization);
    std::optional<IncrementSampler> sampler;
    if (prep.sampler_prototype) sampler.emplace(*prep.sampler_prototype);
    std::vector<double> dW, full;

    const bool track_template = !is_frozen(s.kind);
    const double level_a = s.level_offset;
    const double level_b = 1.0 - s.level_offset;
    const double level_c = 0.5;
    bool template_ok = track_template;
    double shift = 0.0;
    int no_crossing_streak = 0;

    auto record_step = [&](long n) {
        const size_t k = static_cast<size_t>(n);
        rec.times[k] = static_cast<double>(n) * s.dt;
        rec.lambda[k] = state.lambda;
        rec.gamma[k] = state.gamma;
        expand_to_full(grid, state.u, full);
        const auto a = level_crossing(full, grid, level_a, ScanDirection::FromRight);
        const auto b = level_crossing(full, grid, level_b, ScanDirection::FromLeft);
        const auto c = level_crossing(full, grid, level_c, ScanDirection::FromRight);
        if (a) rec.level_a[k] = *a;
        if (b) rec.level_b[k] = *b;
        if (c) rec.level_c[k] = *c;
        if (auto w = wave_width(full, grid, s.width_delta)) rec.width[k] = *w;
        if (template_ok) {
            const ShiftResult fit = template_shift(full, grid, *prep.template_ref, shift);
            if (fit.ok()) {
                shift = fit.shift;
                rec.shift[k] = shift;
            } else {
                template_ok = false;
                rec.template_fail_step = n;
            }
        }
        return c.has_value();
    };

    long recorded = 0;
    record_step(0);
    ++recorded;
    for (long n = 0; n < n_steps && state.status == SolverStatus::Running; ++n) {
        if (sampler) {
            sampler->sample(s.dt, stream, static_cast<std::uint64_t>(n), dW);
            if (noise_dump) noise_dump->append(dW);
        }
        switch (s.kind) {
            case RunKind::Pde: stepper.step_pde(state, ws); break;
            case RunKind::Pdae: stepper.step_pdae(state, ws); break;
            case RunKind::Spde: stepper.step_spde(state, dW, s.scheme, ws); break;
            case RunKind::Spdae: stepper.step_spdae(state, dW, ws); break;
            case RunKind::FixedSpeedSpde:
                stepper.step_fixed_speed(state, frame_speed, dW, s.scheme, ws);
                break;
        }
        if (state.status != SolverStatus::Running) break;
        const bool has_front = record_step(n + 1);
        ++recorded;
        no_crossing_streak = has_front ? 0 : no_crossing_streak + 1;
        if (no_crossing_streak >= s.extinction_steps) {
            state.fail(SolverStatus::Extinct);
            break;
        }
        if (s.keep_frames && s.snapshot_stride > 0 &&
            (n + 1) % static_cast<long>(s.snapshot_stride) == 0)
            rec.frames.emplace_back(static_cast<std::uint64_t>(n + 1), state.u);
    }

    if (state.status == SolverStatus::Running) state.status = SolverStatus::Done;
    rec.status = state.status;
    rec.fail_step = state.fail_step;
    // trim the series to what was actually recorded
    if (static_cast<size_t>(recorded) < rec.times.size()) {
        const size_t keep = static_cast<size_t>(recorded);
        rec.times.resize(keep);
        rec.lambda.resize(keep);
        rec.gamma.resize(keep);
        rec.level_a.resize(keep);
        rec.level_b.resize(keep);
        rec.level_c.resize(keep);
        rec.shift.resize(keep);
        rec.width.resize(keep);
    }
    expand_to_full(grid, state.u, rec.final_full);
    return rec;
}

}  // namespace stowave
