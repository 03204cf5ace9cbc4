#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "stowave/operators.hpp"

namespace stowave {

/// LU factorization of a fixed tridiagonal matrix (Thomas algorithm, no
/// pivoting; intended for the diagonally dominant matrices I - dt*A).
/// Factor once, then solve many right-hand sides; solves never mutate the
/// factorization, so one instance can be shared read-only across threads.
class TridiagFactorization {
  public:
    TridiagFactorization() = default;

    TridiagFactorization(std::span<const double> lower, std::span<const double> diag,
                         std::span<const double> upper)
        : lower_(lower.begin(), lower.end()),
          upper_(upper.begin(), upper.end()),
          inv_pivot_(diag.size()) {
        const size_t n = diag.size();
        if (n == 0) throw std::invalid_argument("tridiag: empty system");
        double piv = diag[0];
        valid_ = std::isfinite(piv) && piv != 0.0;
        if (valid_) inv_pivot_[0] = 1.0 / piv;
        for (size_t i = 1; i < n && valid_; ++i) {
            piv = diag[i] - lower_[i] * upper_[i - 1] * inv_pivot_[i - 1];
            valid_ = std::isfinite(piv) && piv != 0.0;
            if (valid_) inv_pivot_[i] = 1.0 / piv;
        }
    }

    bool valid() const { return valid_; }
    size_t size() const { return inv_pivot_.size(); }

    void solve(std::span<const double> rhs, std::span<double> x) const {
        const size_t n = inv_pivot_.size();
        x[0] = rhs[0];
        for (size_t i = 1; i < n; ++i)
            x[i] = rhs[i] - lower_[i] * x[i - 1] * inv_pivot_[i - 1];
        x[n - 1] *= inv_pivot_[n - 1];
        for (size_t i = n - 1; i-- > 0;)
            x[i] = (x[i] - upper_[i] * x[i + 1]) * inv_pivot_[i];
    }

    std::vector<double> solve(std::span<const double> rhs) const {
        std::vector<double> x(rhs.size());
        solve(rhs, x);
        return x;
    }

  private:
    std::vector<double> lower_, upper_, inv_pivot_;
    bool valid_ = false;
};

/// Factorization of (I - dt * A) for a tridiagonal operator A.
inline TridiagFactorization factor_identity_minus(const TriDiagOperator& a, double dt) {
    const size_t n = a.diag.size();
    std::vector<double> lower(n), diag(n), upper(n);
    for (size_t i = 0; i < n; ++i) {
        lower[i] = -dt * a.lower[i];
        diag[i] = 1.0 - dt * a.diag[i];
        upper[i] = -dt * a.upper[i];
    }
    return TridiagFactorization(lower, diag, upper);
}

/// Solution of the bordered system
///     [ K    col ] [x]   [rhs]
///     [row^T  0  ] [s] = [ r ]
/// by block elimination: y = K^-1 rhs, w = K^-1 col, s = (row.y - r)/(row.w),
/// x = y - s w. The shared factorization of K is read-only throughout.
struct BorderedSolution {
    std::vector<double> x;
    double scalar = 0.0;
    double denominator = 0.0;  // row.w, reported for conditioning diagnostics
    bool ok = false;
};

struct BorderedWorkspace {
    std::vector<double> y, w;
};

inline BorderedSolution solve_bordered(const TridiagFactorization& K,
                                       std::span<const double> col,
                                       std::span<const double> row,
                                       std::span<const double> rhs, double r,
                                       BorderedWorkspace& ws) {
    BorderedSolution sol;
    if (!K.valid()) return sol;
    const size_t n = K.size();
    ws.y.resize(n);
    ws.w.resize(n);
    K.solve(rhs, ws.y);
    K.solve(col, ws.w);
    double row_y = 0.0, row_w = 0.0;
    for (size_t i = 0; i < n; ++i) {
        row_y += row[i] * ws.y[i];
        row_w += row[i] * ws.w[i];
    }
    sol.denominator = row_w;
    const double s = (row_y - r) / row_w;
    if (!std::isfinite(s)) return sol;
    sol.scalar = s;
    sol.x.resize(n);
    for (size_t i = 0; i < n; ++i) sol.x[i] = ws.y[i] - s * ws.w[i];
    sol.ok = true;
    return sol;
}

}  // namespace stowave
