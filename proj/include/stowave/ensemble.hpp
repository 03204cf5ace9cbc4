#pragma once

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "stowave/runner.hpp"
#include "stowave/trajectory.hpp"

namespace stowave {

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("STOWAVE_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

/// Runs fn(0..n-1) on a small worker pool. Work items are claimed via an
/// atomic counter; the caller is responsible for making results independent
/// of claiming order.
inline void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

struct EnsembleConfig {
    RunSetup run;
    int realizations = 100;
    int threads = 0;                // 0 = env / hardware default
    std::string trajectory_dir;     // empty = do not write per-realization files
    std::string noise_dump_dir;     // empty = do not dump increments
};

struct EstimatorStat {
    double mean = 0.0;
    double stddev = 0.0;
    double std_error = 0.0;
    int n = 0;
};

struct EnsembleSummary {
    Grid grid;
    RunKind kind = RunKind::Spde;
    double t0 = 0.0;
    int realizations = 0;
    int completed = 0, blown_up = 0, extinct = 0, template_failed = 0;

    std::map<Estimator, EstimatorStat> stats;  // across completed realizations
    double lambda_mean = 0.0, lambda_std = 0.0;
    long lambda_samples = 0;
    std::vector<double> lambda_pool;  // pooled instantaneous speeds, reported sign
    EstimatorStat width;              // per-realization window means

    std::vector<double> mean_profile;      // final-time mean, aligned at the reference
    std::vector<double> mean_profile_raw;  // final-time mean, no alignment
    int aligned_count = 0;
    std::vector<double> lambda_min_by_realization;  // NaN where unavailable

    double completed_fraction() const {
        return realizations > 0 ? static_cast<double>(completed) / realizations : 0.0;
    }
};

struct AllRealizationsFailed : std::runtime_error {
    int blown_up = 0, extinct = 0;
    AllRealizationsFailed(int b, int e)
        : std::runtime_error("ensemble: all realizations failed (blown up " +
                             std::to_string(b) + ", extinct " + std::to_string(e) + ")"),
          blown_up(b),
          extinct(e) {}
};

namespace detail {

inline EstimatorStat make_stat(const std::vector<double>& values) {
    EstimatorStat st;
    for (double v : values) {
        if (std::isfinite(v)) {
            st.mean += v;
            ++st.n;
        }
    }
    if (st.n == 0) return st;
    st.mean /= st.n;
    double ssq = 0.0;
    for (double v : values)
        if (std::isfinite(v)) ssq += (v - st.mean) * (v - st.mean);
    if (st.n > 1) st.stddev = std::sqrt(ssq / (st.n - 1));
    st.std_error = st.stddev / std::sqrt(static_cast<double>(st.n));
    return st;
}

/// Translate full-grid samples by delta (whole cells plus linear remainder),
/// filling from the rest states at the edges.
inline std::vector<double> translate_profile(const Grid& grid,
                                             const std::vector<double>& u, double delta) {
    std::vector<double> out(u.size());
    const double dx = grid.dx();
    for (int i = 0; i < grid.n_points; ++i) {
        const double x = grid.point(i) - delta;
        if (x <= 0.0) {
            out[static_cast<size_t>(i)] = u.front();
        } else if (x >= grid.length) {
            out[static_cast<size_t>(i)] = u.back();
        } else {
            const double s = x / dx;
            int j = static_cast<int>(s);
            if (j >= grid.n_points - 1) j = grid.n_points - 2;
            const double w = s - static_cast<double>(j);
            out[static_cast<size_t>(i)] =
                (1.0 - w) * u[static_cast<size_t>(j)] + w * u[static_cast<size_t>(j) + 1];
        }
    }
    return out;
}

}  // namespace detail

/// Deterministic ordered aggregation of per-realization outcomes. Summation
/// runs in realization order, so the summary is independent of the worker
/// count. Means use completed realizations only; the failure tallies and the
/// completed fraction always accompany them.
inline EnsembleSummary aggregate_realizations(
    const PreparedRun& prep, const std::vector<TrajectoryRecord>& records,
    const std::vector<RealizationEstimates>& estimates) {
    const RunSetup& s = prep.setup;
    EnsembleSummary sum;
    sum.grid = s.grid;
    sum.kind = s.kind;
    sum.t0 = s.t0;
    sum.realizations = static_cast<int>(records.size());
    sum.lambda_min_by_realization.assign(records.size(),
                                         std::numeric_limits<double>::quiet_NaN());

    std::map<Estimator, std::vector<double>> values;
    std::vector<double> width_values;
    sum.mean_profile.assign(static_cast<size_t>(s.grid.n_points), 0.0);
    sum.mean_profile_raw.assign(static_cast<size_t>(s.grid.n_points), 0.0);
    double lam_sum = 0.0, lam_ssq = 0.0;
    int raw_count = 0;

    for (size_t r = 0; r < records.size(); ++r) {
        const TrajectoryRecord& rec = records[r];
        if (rec.status == SolverStatus::BlownUp) {
            ++sum.blown_up;
            continue;
        }
        if (rec.status == SolverStatus::Extinct) {
            ++sum.extinct;
            continue;
        }
        ++sum.completed;
        const RealizationEstimates& est = estimates[r];
        if (est.template_failed) ++sum.template_failed;
        for (const auto& [key, value] : est.speeds) values[key].push_back(value);
        if (est.width_mean) width_values.push_back(*est.width_mean);
        if (auto it = est.speeds.find(Estimator::LambdaMin); it != est.speeds.end())
            sum.lambda_min_by_realization[r] = it->second;
        for (double l : est.lambda_window) {
            sum.lambda_pool.push_back(l);
            lam_sum += l;
            lam_ssq += l * l;
        }
        // mean profiles at final time
        for (size_t i = 0; i < rec.final_full.size(); ++i)
            sum.mean_profile_raw[i] += rec.final_full[i];
        ++raw_count;
        const auto c_final =
            level_crossing(rec.final_full, s.grid, 0.5, ScanDirection::FromRight);
        if (c_final) {
            const auto shifted = detail::translate_profile(
                s.grid, rec.final_full, s.reference.shift - *c_final);
            for (size_t i = 0; i < shifted.size(); ++i) sum.mean_profile[i] += shifted[i];
            ++sum.aligned_count;
        }
    }

    if (sum.completed == 0) throw AllRealizationsFailed(sum.blown_up, sum.extinct);

    for (const auto& [key, vals] : values) sum.stats[key] = detail::make_stat(vals);
    sum.width = detail::make_stat(width_values);
    sum.lambda_samples = static_cast<long>(sum.lambda_pool.size());
    if (sum.lambda_samples > 0) {
        sum.lambda_mean = lam_sum / static_cast<double>(sum.lambda_samples);
        if (sum.lambda_samples > 1) {
            const double var = (lam_ssq - lam_sum * lam_sum / sum.lambda_samples) /
                               static_cast<double>(sum.lambda_samples - 1);
            sum.lambda_std = var > 0.0 ? std::sqrt(var) : 0.0;
        }
    }
    for (auto& v : sum.mean_profile_raw) v /= std::max(raw_count, 1);
    for (auto& v : sum.mean_profile) v /= std::max(sum.aligned_count, 1);
    return sum;
}

/// Runs R realizations of the configured system. Realization r draws from
/// the counter-based stream (master_seed, r), so the summary is a
/// deterministic function of the configuration alone.
inline EnsembleSummary run_ensemble(const EnsembleConfig& config,
                                    const std::vector<double>* frame_speeds = nullptr) {
    const PreparedRun prep(config.run);
    const int R = config.realizations;
    if (R < 1) throw std::invalid_argument("ensemble: need at least one realization");
    std::vector<TrajectoryRecord> records(static_cast<size_t>(R));
    std::vector<RealizationEstimates> estimates(static_cast<size_t>(R));

    const int threads = resolve_threads(config.threads);
    parallel_for(R, threads, [&](int r) {
        std::optional<double> speed;
        if (frame_speeds) speed = (*frame_speeds)[static_cast<size_t>(r)];
        std::optional<NoiseDumpWriter> dump;
        if (!config.noise_dump_dir.empty() && is_stochastic(config.run.kind)) {
            NoiseDumpHeader h;
            h.domain_length = config.run.grid.length;
            h.correlation_length = config.run.xi;
            h.truncation = static_cast<std::uint32_t>(prep.noise.truncation);
            h.dt = config.run.dt;
            h.master_seed = config.run.master_seed;
            h.realization = static_cast<std::uint32_t>(r);
            h.n_points = static_cast<std::uint32_t>(config.run.grid.n_points);
            dump.emplace(config.noise_dump_dir + "/noise_r" + std::to_string(r) + ".bin", h);
        }
        records[static_cast<size_t>(r)] = run_realization(
            prep, static_cast<std::uint32_t>(r), speed, dump ? &*dump : nullptr);
        estimates[static_cast<size_t>(r)] =
            compute_estimates(records[static_cast<size_t>(r)], config.run.t0);
        if (!config.trajectory_dir.empty())
            write_trajectory(config.trajectory_dir + "/traj_r" + std::to_string(r) + ".bin",
                             records[static_cast<size_t>(r)]);
    });

    return aggregate_realizations(prep, records, estimates);
}

/// Squared L2 distance between the aligned final-time mean profiles of two
/// ensembles, by trapezoidal quadrature on the shared grid.
inline double weak_error(const EnsembleSummary& a, const EnsembleSummary& b) {
    if (a.grid.n_points != b.grid.n_points || a.grid.length != b.grid.length)
        throw std::invalid_argument("weak_error: grids do not match");
    const double dx = a.grid.dx();
    double sum = 0.0;
    for (int i = 0; i < a.grid.n_points; ++i) {
        const double d = a.mean_profile[static_cast<size_t>(i)] -
                         b.mean_profile[static_cast<size_t>(i)];
        const double w = (i == 0 || i == a.grid.n_points - 1) ? 0.5 : 1.0;
        sum += w * d * d;
    }
    return dx * sum;
}

enum class SpeedSource {
    Constant,                  // frame_speed from the configuration
    PerRealizationTimeAverage, // each realization frozen at its own pass-1 Lambda
    EnsembleMeanInstantaneous, // grand mean of the instantaneous speed E[lambda]
    EnsembleMeanTimeAverage,   // mean over realizations of Lambda, E[Lambda]
};

struct FixedSpeedResult {
    EnsembleSummary pass1;    // the SPDAE ensemble used to estimate the speed
    EnsembleSummary summary;  // the fixed-speed ensemble
    double speed_used = 0.0;  // reported (propagation-positive) common speed
};

/// Two-pass protocol for the averaged-speed weak variants: estimate the
/// speed statistic from a frozen ensemble, then re-run the same noise
/// realizations in a frame moving at that fixed speed.
inline FixedSpeedResult fixed_speed_ensemble(const EnsembleConfig& config, SpeedSource source) {
    FixedSpeedResult result;
    EnsembleConfig pass2 = config;
    pass2.run.kind = RunKind::FixedSpeedSpde;

    if (source == SpeedSource::Constant) {
        result.speed_used = kPropagationSign * config.run.frame_speed;
        result.summary = run_ensemble(pass2);
        return result;
    }

    EnsembleConfig pass1 = config;
    pass1.run.kind = RunKind::Spdae;
    pass1.trajectory_dir.clear();
    pass1.noise_dump_dir.clear();
    result.pass1 = run_ensemble(pass1);

    const double mean_time_avg = result.pass1.stats.count(Estimator::LambdaMin)
                                     ? result.pass1.stats[Estimator::LambdaMin].mean
                                     : result.pass1.lambda_mean;
    if (source == SpeedSource::PerRealizationTimeAverage) {
        std::vector<double> speeds(static_cast<size_t>(config.realizations));
        for (size_t r = 0; r < speeds.size(); ++r) {
            double v = result.pass1.lambda_min_by_realization[r];
            if (!std::isfinite(v)) v = mean_time_avg;  // failed pass-1 realization
            speeds[r] = kPropagationSign * v;          // back to the internal frame
        }
        result.speed_used = mean_time_avg;
        result.summary = run_ensemble(pass2, &speeds);
        return result;
    }

    const double reported = source == SpeedSource::EnsembleMeanInstantaneous
                                ? result.pass1.lambda_mean
                                : mean_time_avg;
    result.speed_used = reported;
    pass2.run.frame_speed = kPropagationSign * reported;
    result.summary = run_ensemble(pass2);
    return result;
}

struct SweepCell {
    double alpha = 0.0, mu2 = 0.0, xi = 0.0;
    NoiseInterpretation interpretation = NoiseInterpretation::Stratonovich;
    std::optional<EnsembleSummary> summary;
    std::string error;
};

/// Cartesian parameter sweep; per-cell failures are recorded and the sweep
/// continues.
inline std::vector<SweepCell> sweep(const EnsembleConfig& base,
                                    const std::vector<double>& mu2_values,
                                    const std::vector<double>& xi_values,
                                    const std::vector<double>& alpha_values,
                                    const std::vector<NoiseInterpretation>& interpretations) {
    if (mu2_values.empty() || xi_values.empty() || alpha_values.empty() ||
        interpretations.empty())
        throw std::invalid_argument("sweep: empty parameter list");
    std::vector<SweepCell> cells;
    for (NoiseInterpretation interp : interpretations) {
        for (double alpha : alpha_values) {
            for (double xi : xi_values) {
                for (double mu2 : mu2_values) {
                    SweepCell cell;
                    cell.alpha = alpha;
                    cell.mu2 = mu2;
                    cell.xi = xi;
                    cell.interpretation = interp;
                    EnsembleConfig config = base;
                    config.run.model.alpha = alpha;
                    config.run.model.mu = std::sqrt(mu2);
                    config.run.model.interpretation = interp;
                    config.run.scheme = interp == NoiseInterpretation::Stratonovich
                                            ? SpdeScheme::EulerHeun
                                            : SpdeScheme::EulerMaruyama;
                    config.run.xi = xi;
                    try {
                        cell.summary = run_ensemble(config);
                    } catch (const std::exception& e) {
                        cell.error = e.what();
                    }
                    cells.push_back(std::move(cell));
                }
            }
        }
    }
    return cells;
}

}  // namespace stowave
