#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace stowave {

enum class BoundaryKind { Neumann, Dirichlet };

/// Uniform 1-D mesh on [0, L], both endpoints included.
///
/// Under Dirichlet conditions the two endpoint values are fixed data and the
/// unknowns are the M-2 interior points; under Neumann all M points are
/// unknowns.
struct Grid {
    double length = 500.0;
    int n_points = 5001;
    BoundaryKind bc = BoundaryKind::Neumann;
    double left_value = 0.0;   // Dirichlet data at x = 0
    double right_value = 1.0;  // Dirichlet data at x = L

    double dx() const { return length / static_cast<double>(n_points - 1); }
    double point(int i) const { return static_cast<double>(i) * dx(); }

    int unknowns() const {
        return bc == BoundaryKind::Dirichlet ? n_points - 2 : n_points;
    }
    /// Full-grid index of the first unknown.
    int first_unknown() const { return bc == BoundaryKind::Dirichlet ? 1 : 0; }

    void validate() const {
        if (n_points < 4)
            throw std::invalid_argument("grid: at least 4 points required");
        if (!(length > 0.0))
            throw std::invalid_argument("grid: length must be positive");
    }
};

inline Grid make_grid(double length, double dx, BoundaryKind bc = BoundaryKind::Neumann,
                      double left = 0.0, double right = 1.0) {
    Grid g;
    g.length = length;
    g.n_points = static_cast<int>(std::llround(length / dx)) + 1;
    g.bc = bc;
    g.left_value = left;
    g.right_value = right;
    g.validate();
    return g;
}

/// Piecewise-linear interpolation of full-grid samples. Queries outside
/// [0, L] are errors.
inline double interpolate(const Grid& grid, std::span<const double> values, double x) {
    if (x < 0.0 || x > grid.length)
        throw std::domain_error("interpolate: query outside [0, L]");
    const double dx = grid.dx();
    const double s = x / dx;
    int i = static_cast<int>(s);
    if (i >= grid.n_points - 1) i = grid.n_points - 2;
    const double w = s - static_cast<double>(i);
    return (1.0 - w) * values[static_cast<size_t>(i)] + w * values[static_cast<size_t>(i) + 1];
}

/// Expand an unknown vector to full-grid values (pads Dirichlet endpoints).
inline void expand_to_full(const Grid& grid, std::span<const double> u,
                           std::vector<double>& full) {
    full.resize(static_cast<size_t>(grid.n_points));
    if (grid.bc == BoundaryKind::Dirichlet) {
        full.front() = grid.left_value;
        full.back() = grid.right_value;
        for (int i = 0; i < grid.n_points - 2; ++i)
            full[static_cast<size_t>(i) + 1] = u[static_cast<size_t>(i)];
    } else {
        for (int i = 0; i < grid.n_points; ++i)
            full[static_cast<size_t>(i)] = u[static_cast<size_t>(i)];
    }
}

}  // namespace stowave
