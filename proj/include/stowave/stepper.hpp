#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "stowave/grid.hpp"
#include "stowave/linsolve.hpp"
#include "stowave/model.hpp"
#include "stowave/operators.hpp"

namespace stowave {

enum class SolverStatus { Running, Done, BlownUp, Extinct };

/// State of one realization. lambda and gamma use the internal sign
/// convention of the comoving transform (the reporting layer converts to
/// propagation-positive speeds). gamma accumulates lambda * dt with the same
/// per-step value the linear solve applied.
struct SolverState {
    std::vector<double> u;  // unknowns
    double lambda = 0.0;
    double gamma = 0.0;
    double t = 0.0;
    long step = 0;
    SolverStatus status = SolverStatus::Running;
    long fail_step = -1;

    void fail(SolverStatus s) {
        status = s;
        fail_step = step;
    }
};

enum class AdvectionKind { Central, UpwindBlend };
enum class SpdeScheme { EulerHeun, EulerMaruyama };
enum class RunKind { Pde, Pdae, Spde, Spdae, FixedSpeedSpde };

inline bool is_frozen(RunKind k) { return k == RunKind::Pdae || k == RunKind::Spdae; }
inline bool is_stochastic(RunKind k) {
    return k == RunKind::Spde || k == RunKind::Spdae || k == RunKind::FixedSpeedSpde;
}

/// Semi-implicit time stepping for the free PDE/SPDE and the frozen
/// (S)PDAE. Only the Laplacian is implicit; the nonlinearity, the advection
/// term and the noise are explicit. Immutable after construction: the
/// factorization of (I - dt*A) is shared read-only, each realization brings
/// its own Workspace.
template <class Model>
class WaveStepper {
  public:
    struct Workspace {
        std::vector<double> rhs, z, d, col, adv_tmp;
        BorderedWorkspace bordered;
    };

    WaveStepper(const Grid& grid, const Model& model, double dt,
                std::span<const double> template_full, AdvectionKind advection, double beta,
                double c0, double blowup_threshold = 25.0)
        : grid_(grid),
          model_(model),
          dt_(dt),
          beta_(beta),
          c0_(c0),
          blowup_(blowup_threshold),
          advection_(advection),
          lap_(build_laplacian(grid)),
          dl_(build_first_derivative(grid, DerivativeKind::Left)),
          dr_(build_first_derivative(grid, DerivativeKind::Right)),
          dc_(build_first_derivative(grid, DerivativeKind::Central)),
          kfac_(factor_identity_minus(lap_, dt)) {
        grid.validate();
        if (!(dt >= 0.0)) throw std::invalid_argument("stepper: dt must be non-negative");
        const int n = grid.unknowns();
        const int off = grid.first_unknown();
        template_u_.resize(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i)
            template_u_[static_cast<size_t>(i)] = template_full[static_cast<size_t>(i + off)];
        // template derivative via D_C; accurate and free of up-winding issues
        template_du_ = dc_.apply(template_u_);
        for (size_t i = 0; i < template_du_.size(); ++i)
            template_du_[i] += dc_.boundary[i];
        phase_row_.resize(template_du_.size());
        phase_rhs_ = 0.0;
        const double dx = grid.dx();
        for (size_t i = 0; i < template_du_.size(); ++i) {
            phase_row_[i] = dx * template_du_[i];
            phase_rhs_ += phase_row_[i] * template_u_[i];
        }
    }

    const Grid& grid() const { return grid_; }
    const Model& model() const { return model_; }
    double dt() const { return dt_; }
    const TriDiagOperator& laplacian() const { return lap_; }

    /// <D_C u_hat, u - u_hat> with the dx-weighted inner product.
    double phase_residual(std::span<const double> u) const {
        double s = 0.0;
        for (size_t i = 0; i < phase_row_.size(); ++i) s += phase_row_[i] * u[i];
        return s - phase_rhs_;
    }

    void step_pde(SolverState& state, Workspace& ws) const {
        require_running(state);
        drift_rhs(state.u, model_interpretation(), ws.rhs);
        finish_linear(state, ws);
    }

    void step_spde(SolverState& state, std::span<const double> dW_full, SpdeScheme scheme,
                   Workspace& ws) const {
        require_running(state);
        const NoiseInterpretation form = scheme == SpdeScheme::EulerHeun
                                             ? NoiseInterpretation::Stratonovich
                                             : NoiseInterpretation::Ito;
        drift_rhs(state.u, form, ws.rhs);
        add_noise(state.u, dW_full, scheme, ws);
        finish_linear(state, ws);
    }

    void step_pdae(SolverState& state, Workspace& ws) const {
        require_running(state);
        drift_rhs(state.u, model_interpretation(), ws.rhs);
        finish_bordered(state, ws);
    }

    void step_spdae(SolverState& state, std::span<const double> dW_full, Workspace& ws) const {
        require_running(state);
        // the frozen stochastic system integrates the Stratonovich form
        drift_rhs(state.u, NoiseInterpretation::Stratonovich, ws.rhs);
        add_noise(state.u, dW_full, SpdeScheme::EulerHeun, ws);
        finish_bordered(state, ws);
    }

    void step_fixed_speed(SolverState& state, double frame_speed,
                          std::span<const double> dW_full, SpdeScheme scheme,
                          Workspace& ws) const {
        require_running(state);
        const NoiseInterpretation form = scheme == SpdeScheme::EulerHeun
                                             ? NoiseInterpretation::Stratonovich
                                             : NoiseInterpretation::Ito;
        drift_rhs(state.u, form, ws.rhs);
        advection(state.u, frame_speed, ws.d, ws.adv_tmp);
        for (size_t i = 0; i < ws.rhs.size(); ++i) ws.rhs[i] += dt_ * frame_speed * ws.d[i];
        add_noise(state.u, dW_full, scheme, ws);
        state.lambda = frame_speed;
        finish_linear(state, ws);
    }

  private:
    NoiseInterpretation model_interpretation() const { return model_.interpretation; }

    void require_running(const SolverState& state) const {
        if (state.status != SolverStatus::Running)
            throw std::logic_error("stepper: state is not running");
    }

    /// rhs = u + dt (f(u) + boundary terms of the Laplacian)
    void drift_rhs(const std::vector<double>& u, NoiseInterpretation form,
                   std::vector<double>& rhs) const {
        rhs.resize(u.size());
        for (size_t i = 0; i < u.size(); ++i)
            rhs[i] = u[i] + dt_ * (corrected_drift(u[i], model_, c0_, form) + lap_.boundary[i]);
    }

    void add_noise(const std::vector<double>& u, std::span<const double> dW_full,
                   SpdeScheme scheme, Workspace& ws) const {
        const int off = grid_.first_unknown();
        if (scheme == SpdeScheme::EulerHeun) {
            ws.z.resize(u.size());
            for (size_t i = 0; i < u.size(); ++i) {
                const double dw = dW_full[i + static_cast<size_t>(off)];
                ws.z[i] = u[i] + model_.diffusion(u[i]) * dw;
                ws.rhs[i] += 0.5 * (model_.diffusion(ws.z[i]) + model_.diffusion(u[i])) * dw;
            }
        } else {
            for (size_t i = 0; i < u.size(); ++i)
                ws.rhs[i] += model_.diffusion(u[i]) * dW_full[i + static_cast<size_t>(off)];
        }
    }

    /// advection derivative d = D u + boundary, with D per the configured kind
    /// and the up-winding weight taken at the supplied speed.
    void advection(const std::vector<double>& u, double speed, std::vector<double>& d,
                   std::vector<double>& tmp) const {
        d.resize(u.size());
        if (advection_ == AdvectionKind::Central) {
            dc_.apply(u, d);
            for (size_t i = 0; i < d.size(); ++i) d[i] += dc_.boundary[i];
        } else {
            const double w = upwind_weight(beta_, speed);
            dl_.apply(u, d);
            tmp.resize(u.size());
            dr_.apply(u, tmp);
            for (size_t i = 0; i < d.size(); ++i)
                d[i] = w * (d[i] + dl_.boundary[i]) + (1.0 - w) * (tmp[i] + dr_.boundary[i]);
        }
    }

    void finish_linear(SolverState& state, Workspace& ws) const {
        kfac_.solve(ws.rhs, state.u);
        advance_clock(state);
        check_bounds(state);
    }

    void finish_bordered(SolverState& state, Workspace& ws) const {
        advection(state.u, state.lambda, ws.d, ws.adv_tmp);
        ws.col.resize(ws.d.size());
        for (size_t i = 0; i < ws.d.size(); ++i) ws.col[i] = -dt_ * ws.d[i];
        const BorderedSolution sol =
            solve_bordered(kfac_, ws.col, phase_row_, ws.rhs, phase_rhs_, ws.bordered);
        if (!sol.ok) {
            state.step += 1;  // failure belongs to the attempted step
            state.fail(SolverStatus::BlownUp);
            return;
        }
        state.u = sol.x;
        state.lambda = sol.scalar;
        advance_clock(state);
        check_bounds(state);
    }

    void advance_clock(SolverState& state) const {
        state.step += 1;
        state.t = static_cast<double>(state.step) * dt_;
        state.gamma += state.lambda * dt_;
    }

    void check_bounds(SolverState& state) const {
        if (!std::isfinite(state.lambda)) {
            state.fail(SolverStatus::BlownUp);
            return;
        }
        for (double v : state.u) {
            if (!std::isfinite(v) || std::abs(v) > blowup_) {
                state.fail(SolverStatus::BlownUp);
                return;
            }
        }
    }

    Grid grid_;
    Model model_;
    double dt_, beta_, c0_, blowup_;
    AdvectionKind advection_;
    TriDiagOperator lap_, dl_, dr_, dc_;
    TridiagFactorization kfac_;
    std::vector<double> template_u_, template_du_, phase_row_;
    double phase_rhs_ = 0.0;
};

}  // namespace stowave
