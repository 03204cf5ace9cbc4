#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <random>

#include "stowave/linsolve.hpp"

using namespace stowave;

namespace {

struct DenseSystem {
    Eigen::MatrixXd K;
    std::vector<double> lower, diag, upper;
};

DenseSystem random_dominant_tridiag(int n, std::mt19937& rng) {
    std::uniform_real_distribution<double> off(-1.0, 1.0);
    DenseSystem sys;
    sys.K = Eigen::MatrixXd::Zero(n, n);
    sys.lower.assign(static_cast<size_t>(n), 0.0);
    sys.diag.assign(static_cast<size_t>(n), 0.0);
    sys.upper.assign(static_cast<size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        const double lo = i > 0 ? off(rng) : 0.0;
        const double up = i < n - 1 ? off(rng) : 0.0;
        const double d = 2.5 + std::abs(lo) + std::abs(up);
        sys.lower[static_cast<size_t>(i)] = lo;
        sys.diag[static_cast<size_t>(i)] = d;
        sys.upper[static_cast<size_t>(i)] = up;
        sys.K(i, i) = d;
        if (i > 0) sys.K(i, i - 1) = lo;
        if (i < n - 1) sys.K(i, i + 1) = up;
    }
    return sys;
}

}  // namespace

TEST_CASE("tridiagonal solve matches a dense factorization", "[linsolve]") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> dist(-3.0, 3.0);
    for (int n : {1, 2, 5, 17, 50}) {
        const auto sys = random_dominant_tridiag(n, rng);
        TridiagFactorization fac(sys.lower, sys.diag, sys.upper);
        REQUIRE(fac.valid());
        Eigen::VectorXd rhs(n);
        for (int i = 0; i < n; ++i) rhs(i) = dist(rng);
        const Eigen::VectorXd want = sys.K.fullPivLu().solve(rhs);
        std::vector<double> b(rhs.data(), rhs.data() + n);
        const auto got = fac.solve(b);
        for (int i = 0; i < n; ++i)
            CHECK(got[static_cast<size_t>(i)] == Catch::Approx(want(i)).epsilon(1e-12));
    }
}

TEST_CASE("bordered solve matches a dense bordered factorization", "[linsolve]") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (int n : {3, 10, 37, 49}) {
        const auto sys = random_dominant_tridiag(n, rng);
        TridiagFactorization fac(sys.lower, sys.diag, sys.upper);
        std::vector<double> col(static_cast<size_t>(n)), row(static_cast<size_t>(n)),
            rhs(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            col[static_cast<size_t>(i)] = dist(rng);
            row[static_cast<size_t>(i)] = dist(rng);
            rhs[static_cast<size_t>(i)] = dist(rng);
        }
        const double r = dist(rng);

        Eigen::MatrixXd big = Eigen::MatrixXd::Zero(n + 1, n + 1);
        big.topLeftCorner(n, n) = sys.K;
        for (int i = 0; i < n; ++i) {
            big(i, n) = col[static_cast<size_t>(i)];
            big(n, i) = row[static_cast<size_t>(i)];
        }
        Eigen::VectorXd full_rhs(n + 1);
        for (int i = 0; i < n; ++i) full_rhs(i) = rhs[static_cast<size_t>(i)];
        full_rhs(n) = r;
        const Eigen::VectorXd want = big.fullPivLu().solve(full_rhs);

        BorderedWorkspace ws;
        const auto sol = solve_bordered(fac, col, row, rhs, r, ws);
        REQUIRE(sol.ok);
        for (int i = 0; i < n; ++i) {
            const double scale = std::max(1.0, std::abs(want(i)));
            CHECK(std::abs(sol.x[static_cast<size_t>(i)] - want(i)) / scale < 1e-10);
        }
        CHECK(sol.scalar == Catch::Approx(want(n)).epsilon(1e-10));
    }
}

TEST_CASE("degenerate border is reported, not solved", "[linsolve]") {
    std::mt19937 rng(5);
    const auto sys = random_dominant_tridiag(8, rng);
    TridiagFactorization fac(sys.lower, sys.diag, sys.upper);
    std::vector<double> zero_col(8, 0.0), row(8, 1.0), rhs(8, 1.0);
    BorderedWorkspace ws;
    const auto sol = solve_bordered(fac, zero_col, row, rhs, 0.0, ws);
    CHECK_FALSE(sol.ok);
    CHECK(sol.denominator == 0.0);
}
