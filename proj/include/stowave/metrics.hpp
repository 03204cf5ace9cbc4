#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "stowave/grid.hpp"
#include "stowave/model.hpp"
#include "stowave/operators.hpp"

namespace stowave {

/// Scan order for multi-valued level sets. The boundary of the u- region and
/// the midpoint set (the paper's a and c) take the supremum crossing, i.e.
/// the first bracket found scanning from the right end; the u+ boundary (b)
/// scans from the left.
enum class ScanDirection { FromLeft, FromRight };

/// Piecewise-linear crossing position of `level`, or nothing when the grid
/// function never brackets the level. Absence is a value (extinction), not an
/// error.
inline std::optional<double> level_crossing(std::span<const double> u, const Grid& grid,
                                            double level, ScanDirection scan) {
    const int m = static_cast<int>(u.size());
    const double dx = grid.dx();
    auto cross_in_cell = [&](int i) -> std::optional<double> {
        const double a = u[static_cast<size_t>(i)] - level;
        const double b = u[static_cast<size_t>(i) + 1] - level;
        if (a == 0.0) return grid.point(i);
        if (b == 0.0) return grid.point(i + 1);
        if ((a < 0.0) == (b < 0.0)) return std::nullopt;
        return grid.point(i) + dx * (a / (a - b));
    };
    if (scan == ScanDirection::FromRight) {
        for (int i = m - 2; i >= 0; --i)
            if (auto x = cross_in_cell(i)) return x;
    } else {
        for (int i = 0; i < m - 1; ++i)
            if (auto x = cross_in_cell(i)) return x;
    }
    return std::nullopt;
}

/// Time series of the position of one level set. Positions are NaN where the
/// crossing was absent.
struct LevelSetTrack {
    double level = 0.5;
    ScanDirection scan = ScanDirection::FromRight;
    std::vector<double> times;
    std::vector<double> positions;
};

struct SpeedEstimate {
    double value = 0.0;
    double intercept = 0.0;  // fit estimators only
    int samples = 0;
};

namespace detail {
inline bool usable(double t, double z, double t0) { return t >= t0 && std::isfinite(z); }
}

/// Secant speed (z(t1) - z(t0)) / (t1 - t0) between the first usable sample
/// at or after t0 and the last usable sample.
inline std::optional<SpeedEstimate> speed_secant(std::span<const double> times,
                                                 std::span<const double> positions, double t0) {
    const size_t n = times.size();
    size_t first = n, last = n;
    for (size_t i = 0; i < n; ++i) {
        if (detail::usable(times[i], positions[i], t0)) {
            if (first == n) first = i;
            last = i;
        }
    }
    if (first == n || last == first) return std::nullopt;
    SpeedEstimate est;
    est.value = (positions[last] - positions[first]) / (times[last] - times[first]);
    est.samples = 2;
    return est;
}

/// Ordinary least-squares line through the usable samples with t >= t0.
inline std::optional<SpeedEstimate> speed_linfit(std::span<const double> times,
                                                 std::span<const double> positions, double t0) {
    double st = 0.0, sz = 0.0;
    int n = 0;
    for (size_t i = 0; i < times.size(); ++i) {
        if (detail::usable(times[i], positions[i], t0)) {
            st += times[i];
            sz += positions[i];
            ++n;
        }
    }
    if (n < 2) return std::nullopt;
    const double tbar = st / n, zbar = sz / n;
    double sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < times.size(); ++i) {
        if (detail::usable(times[i], positions[i], t0)) {
            const double dt = times[i] - tbar;
            sxx += dt * dt;
            sxy += dt * (positions[i] - zbar);
        }
    }
    if (sxx == 0.0) return std::nullopt;  // all samples at one time
    SpeedEstimate est;
    est.value = sxy / sxx;
    est.intercept = zbar - est.value * tbar;
    est.samples = n;
    return est;
}

inline std::optional<SpeedEstimate> speed_secant(const LevelSetTrack& track, double t0) {
    return speed_secant(track.times, track.positions, t0);
}
inline std::optional<SpeedEstimate> speed_linfit(const LevelSetTrack& track, double t0) {
    return speed_linfit(track.times, track.positions, t0);
}

// ---------------------------------------------------------------------------
// Template fitting: solve <u_hat_x(. - y), u - u_hat(. - y)> = 0 for the
// shift y of a fixed reference profile.
// ---------------------------------------------------------------------------

/// Grid samples of a reference profile and its central-difference derivative,
/// with flat extension outside [0, L] (the template has constant tails).
class TemplateRef {
  public:
    TemplateRef(const ProfileSpec& spec, const Grid& grid)
        : grid_(grid), values_(sample_profile(spec, grid)) {
        const int m = grid.n_points;
        const double dx = grid.dx();
        deriv_.assign(static_cast<size_t>(m), 0.0);
        for (int i = 1; i < m - 1; ++i)
            deriv_[static_cast<size_t>(i)] =
                (values_[static_cast<size_t>(i) + 1] - values_[static_cast<size_t>(i) - 1]) /
                (2.0 * dx);
        // support window of the derivative; tail weights below the relative
        // cutoff contribute far less than the root tolerance
        double dmax = 0.0;
        for (double d : deriv_) dmax = std::max(dmax, std::abs(d));
        const double cutoff = 1e-16 * dmax;
        lo_ = 0;
        hi_ = m - 1;
        while (lo_ < m - 1 && std::abs(deriv_[static_cast<size_t>(lo_)]) <= cutoff) ++lo_;
        while (hi_ > 0 && std::abs(deriv_[static_cast<size_t>(hi_)]) <= cutoff) --hi_;
        double nsq = 0.0;
        for (double d : deriv_) nsq += d * d;
        deriv_norm_ = std::sqrt(dx * nsq);
    }

    const Grid& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    const std::vector<double>& derivative() const { return deriv_; }
    double derivative_norm() const { return deriv_norm_; }

    double value_at(double x) const { return flat_interp(values_, x); }
    double derivative_at(double x) const { return flat_interp(deriv_, x); }

    /// Discrete phase-condition residual rho(y) = dx * sum u_hat_x(x_i - y) *
    /// (u_i - u_hat(x_i - y)), restricted to the derivative's support.
    double residual(std::span<const double> u, double shift) const {
        const double dx = grid_.dx();
        const int m = grid_.n_points;
        // x_i - shift must land in [x(lo), x(hi)] for a nonzero contribution
        int ifirst = static_cast<int>(std::ceil((grid_.point(lo_) + shift) / dx));
        int ilast = static_cast<int>(std::floor((grid_.point(hi_) + shift) / dx));
        ifirst = std::max(ifirst, 0);
        ilast = std::min(ilast, m - 1);
        double sum = 0.0;
        for (int i = ifirst; i <= ilast; ++i) {
            const double x = grid_.point(i) - shift;
            const double d = flat_interp(deriv_, x);
            sum += d * (u[static_cast<size_t>(i)] - flat_interp(values_, x));
        }
        return dx * sum;
    }

  private:
    double flat_interp(const std::vector<double>& v, double x) const {
        if (x <= 0.0) return v.front();
        if (x >= grid_.length) return v.back();
        const double s = x / grid_.dx();
        int i = static_cast<int>(s);
        if (i >= grid_.n_points - 1) i = grid_.n_points - 2;
        const double w = s - static_cast<double>(i);
        return (1.0 - w) * v[static_cast<size_t>(i)] + w * v[static_cast<size_t>(i) + 1];
    }

    Grid grid_;
    std::vector<double> values_, deriv_;
    double deriv_norm_ = 0.0;
    int lo_ = 0, hi_ = 0;
};

enum class ShiftStatus { Ok, NoRootInBracket, Degenerate };

struct ShiftResult {
    ShiftStatus status = ShiftStatus::NoRootInBracket;
    double shift = 0.0;
    bool multiple_roots = false;  // >1 sign change in the scan; nearest root returned
    bool ok() const { return status == ShiftStatus::Ok; }
};

/// Safeguarded root search for the phase condition, warm-started at the
/// previous shift: bracket scan at grid spacing around prev_shift (doubling
/// the window until a sign change appears), then bisection/secant refinement
/// down to |residual| < 1e-10 * ||u_hat_x|| * ||u||.
inline ShiftResult template_shift(std::span<const double> u, const Grid& grid,
                                  const TemplateRef& ref, double prev_shift) {
    ShiftResult result;
    const double dx = grid.dx();
    double unorm_sq = 0.0;
    for (double v : u) unorm_sq += v * v;
    const double tol = 1e-10 * ref.derivative_norm() * std::sqrt(dx * unorm_sq);
    if (ref.derivative_norm() == 0.0) {
        result.status = ShiftStatus::Degenerate;
        return result;
    }

    auto rho = [&](double y) { return ref.residual(u, y); };

    // expanding bracket scan
    double lo = 0.0, hi = 0.0, flo = 0.0, fhi = 0.0;
    bool found = false;
    for (int half = 4; half <= 4 * grid.n_points && !found; half *= 2) {
        double best_dist = std::numeric_limits<double>::infinity();
        int nchanges = 0;
        double yprev = prev_shift - half * dx;
        double fprev = rho(yprev);
        for (int k = -half + 1; k <= half; ++k) {
            const double y = prev_shift + k * dx;
            const double f = rho(y);
            if ((fprev < 0.0 && f >= 0.0) || (fprev > 0.0 && f <= 0.0) ||
                (fprev == 0.0 && f != 0.0)) {
                ++nchanges;
                const double dist = std::abs(0.5 * (yprev + y) - prev_shift);
                if (dist < best_dist) {
                    best_dist = dist;
                    lo = yprev;
                    hi = y;
                    flo = fprev;
                    fhi = f;
                }
            }
            yprev = y;
            fprev = f;
        }
        if (nchanges > 0) {
            found = true;
            result.multiple_roots = nchanges > 1;
        }
    }
    if (!found) {
        result.status = ShiftStatus::NoRootInBracket;
        return result;
    }

    // bisection with secant acceleration
    double y = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
        double candidate = (std::abs(fhi - flo) > 0.0) ? hi - fhi * (hi - lo) / (fhi - flo)
                                                       : 0.5 * (lo + hi);
        if (!(candidate > lo && candidate < hi)) candidate = 0.5 * (lo + hi);
        y = candidate;
        const double f = rho(y);
        if (std::abs(f) < tol || hi - lo < 1e-13 * std::max(1.0, std::abs(y))) break;
        if ((f < 0.0) == (flo < 0.0)) {
            lo = y;
            flo = f;
        } else {
            hi = y;
            fhi = f;
        }
    }
    result.status = ShiftStatus::Ok;
    result.shift = y;
    return result;
}

/// Instantaneous speeds and averaged speeds from a shift series on a uniform
/// time grid: lambda_n = (y_n - y_{n-1})/dt, Lambda_min the time average of
/// lambda over (t0, T], Lambda_gamma the least-squares slope of (t, y).
struct TemplateSpeedSeries {
    std::vector<double> lambda;  // lambda[n] for step n, lambda[0] = 0
    std::optional<double> lambda_min;
    std::optional<double> lambda_gamma;
};

inline TemplateSpeedSeries template_speed_series(std::span<const double> times,
                                                 std::span<const double> shifts, double t0) {
    TemplateSpeedSeries out;
    const size_t n = times.size();
    out.lambda.assign(n, std::numeric_limits<double>::quiet_NaN());
    if (n == 0) return out;
    out.lambda[0] = 0.0;
    for (size_t i = 1; i < n; ++i)
        out.lambda[i] = (shifts[i] - shifts[i - 1]) / (times[i] - times[i - 1]);
    double sum = 0.0;
    int count = 0;
    for (size_t i = 1; i < n; ++i) {
        if (times[i] > t0 && std::isfinite(out.lambda[i])) {
            sum += out.lambda[i];
            ++count;
        }
    }
    if (count > 0) out.lambda_min = sum / count;
    if (auto fit = speed_linfit(times, shifts, t0)) out.lambda_gamma = fit->value;
    return out;
}

/// Front width: distance between the delta and (1-delta) level boundaries
/// (the a/b conventions relaxed to those levels). Nothing when either
/// crossing is absent.
inline std::optional<double> wave_width(std::span<const double> u, const Grid& grid,
                                        double delta) {
    if (!(delta > 0.0 && delta < 0.5))
        throw std::invalid_argument("wave_width: delta must lie in (0, 1/2)");
    const auto lower = level_crossing(u, grid, delta, ScanDirection::FromRight);
    const auto upper = level_crossing(u, grid, 1.0 - delta, ScanDirection::FromLeft);
    if (!lower || !upper) return std::nullopt;
    return *upper - *lower;
}

}  // namespace stowave
