#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "stowave/model.hpp"

using namespace stowave;

TEST_CASE("drift roots and sign pattern", "[model]") {
    NagumoModel m;
    m.alpha = 0.25;
    CHECK(m.drift(0.0) == 0.0);
    CHECK(m.drift(1.0) == 0.0);
    CHECK(m.drift(m.alpha) == 0.0);
    CHECK(m.drift(0.5) == Catch::Approx(0.0625));
    // sign pattern for a bistable nonlinearity: negative on (0, alpha),
    // positive on (alpha, 1)
    CHECK(m.drift(0.1) < 0.0);
    CHECK(m.drift(0.6) > 0.0);
    CHECK(m.drift(1.2) < 0.0);
    CHECK(m.drift(-0.1) > 0.0);
}

TEST_CASE("diffusion amplitude", "[model]") {
    NagumoModel m;
    m.nu = 0.0;
    m.mu = 1.0;
    CHECK(m.diffusion(0.0) == 0.0);
    CHECK(m.diffusion(1.0) == 0.0);
    CHECK(m.diffusion(0.5) == Catch::Approx(0.25));
    m.nu = 0.1;
    m.mu = 0.0;
    CHECK(m.diffusion(0.0) == 0.1);
    CHECK(m.diffusion(0.73) == 0.1);
}

TEST_CASE("drift correction between interpretations", "[model]") {
    NagumoModel m;
    m.alpha = 0.0;
    m.nu = 0.0;
    m.mu = 0.1;
    m.interpretation = NoiseInterpretation::Stratonovich;
    const double c0 = 5.0;

    SECTION("no correction at the symmetric point (g'(1/2) = 0)") {
        CHECK(corrected_drift(0.5, m, c0, NoiseInterpretation::Ito) == m.drift(0.5));
    }
    SECTION("additive noise needs no correction") {
        NagumoModel add = m;
        add.mu = 0.0;
        add.nu = 0.3;
        for (double u : {-0.2, 0.0, 0.4, 1.1})
            CHECK(corrected_drift(u, add, c0, NoiseInterpretation::Ito) == add.drift(u));
    }
    SECTION("hand-evaluated correction at u = 1/4") {
        // g(1/4) = 0.1 * 3/16, g'(1/4) = 0.1 * 1/2, correction = c0/2 * g' * g
        const double expected = m.drift(0.25) + 0.5 * 5.0 * (0.1 * 0.5) * (0.1 * 0.1875);
        CHECK(corrected_drift(0.25, m, c0, NoiseInterpretation::Ito) ==
              Catch::Approx(expected).epsilon(1e-15));
        CHECK(corrected_drift(0.0, m, c0, NoiseInterpretation::Ito) == 0.0);
    }
    SECTION("matching target form returns the drift unchanged") {
        for (double u : {0.1, 0.9})
            CHECK(corrected_drift(u, m, c0, NoiseInterpretation::Stratonovich) == m.drift(u));
    }
    SECTION("conversion is an involution") {
        std::mt19937 rng(3);
        std::uniform_real_distribution<double> dist(-0.5, 1.5);
        NagumoModel ito = m;
        ito.interpretation = NoiseInterpretation::Ito;
        for (int k = 0; k < 500; ++k) {
            const double u = dist(rng);
            const double there = corrected_drift(u, m, c0, NoiseInterpretation::Ito);
            const double back = corrected_drift(u, ito, c0, NoiseInterpretation::Stratonovich);
            // (f + c) and (f - c) recover f when composed on the same state
            CHECK(there + back == Catch::Approx(2.0 * m.drift(u)).margin(1e-15));
        }
    }
}

TEST_CASE("logistic profile", "[model]") {
    ProfileSpec spec;
    spec.steepness = 0.8;
    spec.shift = 12.0;
    CHECK(profile(spec, 12.0) == Catch::Approx(0.5));
    // odd symmetry about the midpoint
    for (double x : {0.0, 3.7, 11.0, 20.0})
        CHECK(profile(spec, x) + profile(spec, 2.0 * spec.shift - x) == Catch::Approx(1.0));
    CHECK(profile(spec, -1e4) == Catch::Approx(0.0).margin(1e-12));
    CHECK(profile(spec, 1e4) == Catch::Approx(1.0).margin(1e-12));
    // strictly increasing
    double prev = profile(spec, -30.0);
    for (double x = -29.5; x < 50.0; x += 0.5) {
        const double v = profile(spec, x);
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("theoretical speeds by regime", "[model]") {
    const double k_wave = 1.0 / std::sqrt(2.0);

    SECTION("unique-wave regime") {
        const auto s = theoretical_speed(-0.25, k_wave);
        CHECK(s.exact);
        CHECK(s.value == Catch::Approx(1.06066).margin(5e-6));
    }
    SECTION("slow leading profile gives the lower bound") {
        const auto s = theoretical_speed(-0.25, 0.1);
        CHECK_FALSE(s.exact);
        CHECK(s.value == Catch::Approx(2.6));
    }
    SECTION("strongly unstable regime") {
        const auto s = theoretical_speed(-0.75, std::sqrt(0.75));
        CHECK(s.exact);
        CHECK(s.value == Catch::Approx(2.0 * std::sqrt(0.75)));
        const auto bound = theoretical_speed(-0.75, 0.05);
        CHECK_FALSE(bound.exact);
        CHECK(bound.value == Catch::Approx(2.0 * std::sqrt(0.75)));
    }
    SECTION("positive alpha") {
        const auto s = theoretical_speed(0.25, 5.0);
        CHECK(s.exact);
        CHECK(s.value == Catch::Approx(std::sqrt(2.0) * 0.25));
    }
    SECTION("domain check") {
        CHECK_THROWS_AS(theoretical_speed(0.75, 1.0), std::domain_error);
        CHECK_THROWS_AS(theoretical_speed(-1.0, 1.0), std::domain_error);
    }
}
