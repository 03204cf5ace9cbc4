#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "stowave/grid.hpp"

namespace stowave {

/// Banded (tridiagonal) finite-difference stencil acting on the unknown
/// vector, plus the boundary-data contribution that completes the derivative
/// under Dirichlet conditions. The boundary vector is identically zero for
/// Neumann grids. Operators are immutable after assembly.
struct TriDiagOperator {
    std::vector<double> lower;     // lower[i] multiplies u[i-1]; lower[0] unused
    std::vector<double> diag;      // diag[i]  multiplies u[i]
    std::vector<double> upper;     // upper[i] multiplies u[i+1]; upper[n-1] unused
    std::vector<double> boundary;  // add after the stencil to include Dirichlet data

    int size() const { return static_cast<int>(diag.size()); }

    void apply(std::span<const double> in, std::span<double> out) const {
        const int n = size();
        if (n == 1) {
            out[0] = diag[0] * in[0];
            return;
        }
        out[0] = diag[0] * in[0] + upper[0] * in[1];
        for (int i = 1; i < n - 1; ++i) {
            const size_t k = static_cast<size_t>(i);
            out[k] = lower[k] * in[k - 1] + diag[k] * in[k] + upper[k] * in[k + 1];
        }
        const size_t m = static_cast<size_t>(n - 1);
        out[m] = lower[m] * in[m - 1] + diag[m] * in[m];
    }

    std::vector<double> apply(std::span<const double> in) const {
        std::vector<double> out(in.size());
        apply(in, out);
        return out;
    }
};

namespace detail {
inline TriDiagOperator zero_operator(int n) {
    TriDiagOperator op;
    op.lower.assign(static_cast<size_t>(n), 0.0);
    op.diag.assign(static_cast<size_t>(n), 0.0);
    op.upper.assign(static_cast<size_t>(n), 0.0);
    op.boundary.assign(static_cast<size_t>(n), 0.0);
    return op;
}
}  // namespace detail

/// Discrete Laplacian. Dirichlet: (1,-2,1)/dx^2 on the interior unknowns with
/// the boundary data gamma_L/dx^2, gamma_R/dx^2 carried in `boundary`.
/// Neumann: M x M with first row (-2,2)/dx^2 and last row (2,-2)/dx^2.
inline TriDiagOperator build_laplacian(const Grid& grid) {
    grid.validate();
    const double c = 1.0 / (grid.dx() * grid.dx());
    const int n = grid.unknowns();
    TriDiagOperator op = detail::zero_operator(n);
    for (int i = 0; i < n; ++i) {
        const size_t k = static_cast<size_t>(i);
        op.lower[k] = c;
        op.diag[k] = -2.0 * c;
        op.upper[k] = c;
    }
    if (grid.bc == BoundaryKind::Neumann) {
        op.upper[0] = 2.0 * c;
        op.lower[static_cast<size_t>(n - 1)] = 2.0 * c;
    } else {
        op.boundary.front() = grid.left_value * c;
        op.boundary.back() = grid.right_value * c;
    }
    return op;
}

enum class DerivativeKind { Left, Right, Central };

/// First-derivative stencils D_L, D_R, D_C. Dirichlet boundary data enters
/// through `boundary`. Neumann ghost values mirror the interior neighbour,
/// so D_C boundary rows vanish, the first D_L row and the last D_R row are
/// zero, and the remaining end rows use their regular one-sided stencil.
inline TriDiagOperator build_first_derivative(const Grid& grid, DerivativeKind kind) {
    grid.validate();
    const double dx = grid.dx();
    const int n = grid.unknowns();
    TriDiagOperator op = detail::zero_operator(n);
    const size_t last = static_cast<size_t>(n - 1);

    switch (kind) {
        case DerivativeKind::Left:
            for (int i = 1; i < n; ++i) {
                op.lower[static_cast<size_t>(i)] = -1.0 / dx;
                op.diag[static_cast<size_t>(i)] = 1.0 / dx;
            }
            if (grid.bc == BoundaryKind::Dirichlet) {
                op.diag[0] = 1.0 / dx;
                op.boundary.front() = -grid.left_value / dx;
            }
            break;
        case DerivativeKind::Right:
            for (int i = 0; i < n - 1; ++i) {
                op.diag[static_cast<size_t>(i)] = -1.0 / dx;
                op.upper[static_cast<size_t>(i)] = 1.0 / dx;
            }
            if (grid.bc == BoundaryKind::Dirichlet) {
                op.diag[last] = -1.0 / dx;
                op.boundary.back() = grid.right_value / dx;
            }
            break;
        case DerivativeKind::Central:
            for (int i = 1; i < n - 1; ++i) {
                op.lower[static_cast<size_t>(i)] = -0.5 / dx;
                op.upper[static_cast<size_t>(i)] = 0.5 / dx;
            }
            if (grid.bc == BoundaryKind::Dirichlet) {
                op.upper[0] = 0.5 / dx;
                op.boundary.front() = -grid.left_value * 0.5 / dx;
                op.lower[last] = -0.5 / dx;
                op.boundary.back() = grid.right_value * 0.5 / dx;
            }
            break;
    }
    return op;
}

/// Up-winding weight w = exp(-beta * speed) clamped to [0, 1]. The blended
/// derivative w*D_L + (1-w)*D_R selects the one-sided stencil matching the
/// advection direction as |speed| grows; beta = 0 gives pure D_L.
inline double upwind_weight(double beta, double speed) {
    const double w = std::exp(-beta * speed);
    return std::clamp(w, 0.0, 1.0);
}

inline TriDiagOperator build_upwind_blend(const Grid& grid, double speed, double beta) {
    if (beta < 0.0) throw std::invalid_argument("upwind blend: beta must be >= 0");
    const double w = upwind_weight(beta, speed);
    const TriDiagOperator dl = build_first_derivative(grid, DerivativeKind::Left);
    const TriDiagOperator dr = build_first_derivative(grid, DerivativeKind::Right);
    TriDiagOperator op = detail::zero_operator(dl.size());
    for (size_t i = 0; i < op.diag.size(); ++i) {
        op.lower[i] = w * dl.lower[i] + (1.0 - w) * dr.lower[i];
        op.diag[i] = w * dl.diag[i] + (1.0 - w) * dr.diag[i];
        op.upper[i] = w * dl.upper[i] + (1.0 - w) * dr.upper[i];
        op.boundary[i] = w * dl.boundary[i] + (1.0 - w) * dr.boundary[i];
    }
    return op;
}

}  // namespace stowave
