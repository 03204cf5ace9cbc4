#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "stowave/rng.hpp"

using namespace stowave;

TEST_CASE("draws are addressable in any order", "[rng]") {
    GaussianStream s(0xABCDEF12345ULL, 7);
    std::vector<double> forward(64), scrambled(64);
    s.fill_normals(11, forward);
    for (int i = 63; i >= 0; --i) scrambled[static_cast<size_t>(i)] = s.normal(11, i);
    for (size_t i = 0; i < forward.size(); ++i) CHECK(forward[i] == scrambled[i]);

    // different step, realization or seed changes the draw
    CHECK(s.normal(12, 0) != s.normal(11, 0));
    GaussianStream other_real(0xABCDEF12345ULL, 8);
    CHECK(other_real.normal(11, 0) != s.normal(11, 0));
    GaussianStream other_seed(0xABCDEF12346ULL, 7);
    CHECK(other_seed.normal(11, 0) != s.normal(11, 0));
}

TEST_CASE("standard-normal moments", "[rng]") {
    GaussianStream s(2024, 0);
    const int n = 200000;
    std::vector<double> buf(128);
    double sum = 0.0, sumsq = 0.0, sumcube = 0.0;
    long count = 0;
    for (int step = 0; step * 128 < n; ++step) {
        s.fill_normals(static_cast<std::uint64_t>(step), buf);
        for (double v : buf) {
            sum += v;
            sumsq += v * v;
            sumcube += v * v * v;
            ++count;
        }
    }
    const double mean = sum / count;
    const double var = sumsq / count - mean * mean;
    const double skew = (sumcube / count - 3.0 * mean * var - mean * mean * mean) /
                        std::pow(var, 1.5);
    CHECK(std::abs(mean) < 0.01);
    CHECK(var == Catch::Approx(1.0).margin(0.02));
    CHECK(std::abs(skew) < 0.05);
}

TEST_CASE("no correlation between consecutive draws", "[rng]") {
    GaussianStream s(99, 3);
    const int n = 100000;
    std::vector<double> buf(static_cast<size_t>(n));
    s.fill_normals(0, buf);
    double corr = 0.0;
    for (int i = 0; i + 1 < n; ++i) corr += buf[static_cast<size_t>(i)] * buf[static_cast<size_t>(i) + 1];
    corr /= n - 1;
    CHECK(std::abs(corr) < 0.02);
}
