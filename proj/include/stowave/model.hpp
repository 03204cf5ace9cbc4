#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "stowave/grid.hpp"

namespace stowave {

enum class NoiseInterpretation { Ito, Stratonovich };

/// Nagumo reaction term f(u) = u(1-u)(u-alpha) with noise amplitude
/// g(u) = nu + mu*u(1-u). Additive noise: mu = 0; multiplicative: mu != 0.
/// Any type with the same drift/diffusion interface can drive the steppers.
struct NagumoModel {
    double alpha = -0.25;
    double nu = 0.0;
    double mu = 0.0;
    NoiseInterpretation interpretation = NoiseInterpretation::Stratonovich;

    double drift(double u) const { return u * (1.0 - u) * (u - alpha); }
    double diffusion(double u) const { return nu + mu * u * (1.0 - u); }
    double diffusion_deriv(double u) const { return mu * (1.0 - 2.0 * u); }
};

/// Drift of the SPDE rewritten in the requested interpretation. Converting a
/// Stratonovich equation to Ito form adds (1/2) C(0) g'(u) g(u); the reverse
/// conversion subtracts it. When the model already carries the requested
/// interpretation the drift is returned untouched.
template <class Model>
double corrected_drift(double u, const Model& model, double c0, NoiseInterpretation target) {
    if (model.interpretation == target) return model.drift(u);
    const double correction = 0.5 * c0 * model.diffusion_deriv(u) * model.diffusion(u);
    if (target == NoiseInterpretation::Ito) return model.drift(u) + correction;
    return model.drift(u) - correction;
}

/// Logistic front u_k(x - x0) = (1 + exp(-k (x - x0)))^-1, rising from 0 at
/// -inf to 1 at +inf with u = 1/2 at the shift x0. Used for initial data and
/// for the fitting templates.
struct ProfileSpec {
    double steepness = 0.70710678118654752;  // 1/sqrt(2), the stable Nagumo front
    double shift = 0.0;
};

inline double profile(const ProfileSpec& spec, double x) {
    return 1.0 / (1.0 + std::exp(-spec.steepness * (x - spec.shift)));
}

inline std::vector<double> sample_profile(const ProfileSpec& spec, const Grid& grid) {
    std::vector<double> u(static_cast<size_t>(grid.n_points));
    for (int i = 0; i < grid.n_points; ++i)
        u[static_cast<size_t>(i)] = profile(spec, grid.point(i));
    return u;
}

/// Asymptotic wave speed of the deterministic Nagumo front started from
/// u_{k0} data, reported as a positive magnitude. `exact` distinguishes the
/// closed-form regimes from the lower-bound regime.
struct SpeedPrediction {
    double value = 0.0;
    bool exact = true;
};

inline SpeedPrediction theoretical_speed(double alpha, double k0) {
    if (!(alpha > -1.0) || !(alpha <= 0.5))
        throw std::domain_error("theoretical_speed: alpha outside (-1, 1/2]");
    const double sqrt2 = std::sqrt(2.0);
    if (alpha > 0.0) return {sqrt2 * (0.5 - alpha), true};
    if (alpha > -0.5) {
        const double k_star = -alpha * sqrt2;
        if (k0 >= k_star) return {sqrt2 * (0.5 - alpha), true};
        return {(k0 * k0 - alpha) / k0, false};
    }
    const double k_dagger = std::sqrt(-alpha);
    if (k0 >= k_dagger) return {2.0 * k_dagger, true};
    return {2.0 * k_dagger, false};
}

}  // namespace stowave
