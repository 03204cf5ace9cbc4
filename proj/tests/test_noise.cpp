#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "stowave/noise.hpp"

using namespace stowave;

TEST_CASE("covariance kernel values", "[noise]") {
    CHECK(covariance(0.0, 0.1) == Catch::Approx(5.0));
    CHECK(covariance(0.37, 0.5) == covariance(-0.37, 0.5));
    // half height at x = 2 xi sqrt(ln 2 / pi)
    const double xi = 0.3;
    const double x_half = 2.0 * xi * std::sqrt(std::log(2.0) / 3.14159265358979323846);
    CHECK(covariance(x_half, xi) == Catch::Approx(0.5 * covariance(0.0, xi)).epsilon(1e-12));
    CHECK_THROWS_AS(covariance(1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(covariance(1.0, -0.2), std::invalid_argument);
}

TEST_CASE("spectrum shape and auto truncation", "[noise]") {
    const auto model = build_noise_model(500.0, 0.1);
    CHECK(model.zeta[0] == 1.0);
    for (size_t j = 1; j < model.zeta.size(); ++j) {
        CHECK(model.zeta[j] <= model.zeta[j - 1]);
        CHECK(model.zeta[j] > 0.0);
        CHECK(model.zeta[j] <= 1.0);
    }
    const int J = model.truncation;
    CHECK(model.zeta[static_cast<size_t>(J)] < 1e-12);
    CHECK(noise_coefficient(0.1, 500.0, J - 1) >= 1e-12);

    // spectral sum reproduces the kernel variance C(0) = 1/(2 xi) in the bulk
    const double c0 = spectral_covariance(model, 250.0, 250.0);
    CHECK(c0 == Catch::Approx(covariance(0.0, 0.1)).epsilon(0.01));
    // and decays on the xi scale
    const double c_far = spectral_covariance(model, 250.0, 251.0);
    CHECK(std::abs(c_far) < 0.01 * c0);

    // the limit of long correlation lengths keeps only the lowest modes
    const auto smooth = build_noise_model(500.0, 10.0);
    CHECK(smooth.truncation < model.truncation);
}

TEST_CASE("single-mode model produces spatially constant increments", "[noise]") {
    const double L = 10.0;
    Grid grid;
    grid.length = L;
    grid.n_points = 21;
    const auto model = build_noise_model(L, 0.5, 0);
    IncrementSampler sampler(model, grid);
    GaussianStream stream(17, 0);
    std::vector<double> inc;
    const double dt = 0.05;
    double sumsq = 0.0;
    const int n = 20000;
    for (int step = 0; step < n; ++step) {
        sampler.sample(dt, stream, static_cast<std::uint64_t>(step), inc);
        for (size_t i = 1; i < inc.size(); ++i) CHECK(inc[i] == inc[0]);
        sumsq += inc[0] * inc[0];
    }
    // variance dt * zeta_0 / L at every point
    CHECK(sumsq / n == Catch::Approx(dt / L).epsilon(0.05));
}

TEST_CASE("DCT synthesis equals the mode-by-mode sum", "[noise]") {
    Grid grid;
    grid.length = 1.0;
    grid.n_points = 9;
    const auto model = build_noise_model(1.0, 0.05, grid.n_points - 1);  // no folding
    IncrementSampler sampler(model, grid);
    GaussianStream stream(4242, 3);
    const double dt = 0.1;

    std::vector<double> got;
    sampler.sample(dt, stream, 5, got);

    // independent route: same bucket normals, explicit cosine sum
    std::vector<double> normals(static_cast<size_t>(grid.n_points));
    stream.fill_normals(5, normals);
    const auto& amp = sampler.bucket_std();
    const double pi = 3.14159265358979323846;
    for (int i = 0; i < grid.n_points; ++i) {
        double sum = 0.0;
        for (int j = 0; j < grid.n_points; ++j)
            sum += amp[static_cast<size_t>(j)] * std::sqrt(dt) * normals[static_cast<size_t>(j)] *
                   std::cos(pi * j * i / (grid.n_points - 1));
        CHECK(got[static_cast<size_t>(i)] == Catch::Approx(sum).margin(1e-12));
    }
}

TEST_CASE("aliased modes fold onto the grid exactly", "[noise]") {
    Grid grid;
    grid.length = 4.0;
    grid.n_points = 9;
    const double xi = 0.05;
    const auto model = build_noise_model(4.0, xi);  // truncation far beyond M
    REQUIRE(model.truncation > grid.n_points - 1);
    IncrementSampler sampler(model, grid);

    // on grid points, sum_j w_j zeta_j cos(j th_i) cos(j th_k) must equal the
    // folded-bucket version sum_j' s_{j'}^2 cos(j' th_i) cos(j' th_k)
    const double pi = 3.14159265358979323846;
    const auto& amp = sampler.bucket_std();
    for (int i : {0, 2, 5, 8}) {
        for (int k : {1, 3, 8}) {
            double direct = 0.0;
            for (int j = 0; j <= model.truncation; ++j) {
                const double w = (j == 0) ? 1.0 / grid.length : 2.0 / grid.length;
                direct += w * model.zeta[static_cast<size_t>(j)] *
                          std::cos(pi * j * i / (grid.n_points - 1)) *
                          std::cos(pi * j * k / (grid.n_points - 1));
            }
            double folded = 0.0;
            for (int j = 0; j < grid.n_points; ++j)
                folded += amp[static_cast<size_t>(j)] * amp[static_cast<size_t>(j)] *
                          std::cos(pi * j * i / (grid.n_points - 1)) *
                          std::cos(pi * j * k / (grid.n_points - 1));
            CHECK(direct == Catch::Approx(folded).margin(1e-12));
        }
    }

    // the same identity holds against the off-grid spectral form evaluated at
    // grid points (phi normalization included)
    const double cov = spectral_covariance(model, grid.point(2), grid.point(3));
    double folded = 0.0;
    const auto& a = sampler.bucket_std();
    for (int j = 0; j < grid.n_points; ++j)
        folded += a[static_cast<size_t>(j)] * a[static_cast<size_t>(j)] *
                  std::cos(pi * j * 2.0 / (grid.n_points - 1)) *
                  std::cos(pi * j * 3.0 / (grid.n_points - 1));
    CHECK(cov == Catch::Approx(folded).margin(1e-12));
}

TEST_CASE("sample covariance matches the spectral sum", "[noise]") {
    Grid grid;
    grid.length = 10.0;
    grid.n_points = 101;
    const double xi = 0.5, dt = 0.05;
    const auto model = build_noise_model(grid.length, xi);
    IncrementSampler sampler(model, grid);
    GaussianStream stream(31337, 1);

    const int n = 20000;
    const int pa = 50, pb = 52;
    double sab = 0.0, saa = 0.0;
    std::vector<double> inc;
    double third = 0.0;
    for (int step = 0; step < n; ++step) {
        sampler.sample(dt, stream, static_cast<std::uint64_t>(step), inc);
        const double a = inc[static_cast<size_t>(pa)], b = inc[static_cast<size_t>(pb)];
        sab += a * b;
        saa += a * a;
        third += a * a * a;
    }
    const double want_ab = dt * spectral_covariance(model, grid.point(pa), grid.point(pb));
    const double want_aa = dt * spectral_covariance(model, grid.point(pa), grid.point(pa));
    CHECK(sab / n == Catch::Approx(want_ab).epsilon(0.1));
    CHECK(saa / n == Catch::Approx(want_aa).epsilon(0.1));

    // Gaussianity: standardized third moment within +-0.1
    const double sd = std::sqrt(saa / n);
    CHECK(std::abs(third / n) / (sd * sd * sd) < 0.1);

    // bulk stationarity: variances at two interior points within 5%
    double s1 = 0.0, s2 = 0.0;
    for (int step = 0; step < n; ++step) {
        sampler.sample(dt, stream, static_cast<std::uint64_t>(step), inc);
        s1 += inc[30] * inc[30];
        s2 += inc[70] * inc[70];
    }
    CHECK(s1 / s2 == Catch::Approx(1.0).margin(0.05));
}

TEST_CASE("identical addresses give identical increments", "[noise]") {
    Grid grid;
    grid.length = 5.0;
    grid.n_points = 33;
    const auto model = build_noise_model(grid.length, 0.2);
    IncrementSampler s1(model, grid), s2(model, grid);
    GaussianStream stream(8, 2);
    std::vector<double> a, b;
    s1.sample(0.05, stream, 7, a);
    s2.sample(0.05, stream, 9, b);  // different order of step access
    s2.sample(0.05, stream, 7, b);
    for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("increment dump round-trips and detects truncation", "[noise]") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "stowave_noise_test";
    fs::create_directories(dir);
    const std::string path = (dir / "dump.bin").string();

    Grid grid;
    grid.length = 2.0;
    grid.n_points = 9;
    const auto model = build_noise_model(grid.length, 0.3);
    IncrementSampler sampler(model, grid);
    GaussianStream stream(55, 4);

    NoiseDumpHeader h;
    h.domain_length = grid.length;
    h.correlation_length = 0.3;
    h.truncation = static_cast<std::uint32_t>(model.truncation);
    h.dt = 0.05;
    h.master_seed = 55;
    h.realization = 4;
    h.n_points = static_cast<std::uint32_t>(grid.n_points);

    std::vector<std::vector<double>> written;
    {
        NoiseDumpWriter writer(path, h);
        std::vector<double> inc;
        for (int step = 0; step < 5; ++step) {
            sampler.sample(0.05, stream, static_cast<std::uint64_t>(step), inc);
            writer.append(inc);
            written.push_back(inc);
        }
    }
    const auto dump = read_noise_dump(path);
    CHECK(dump.header.n_steps == 5);
    CHECK(dump.header.correlation_length == 0.3);
    REQUIRE(dump.increments.size() == written.size());
    for (size_t s = 0; s < written.size(); ++s)
        for (size_t i = 0; i < written[s].size(); ++i)
            CHECK(dump.increments[s][i] == written[s][i]);

    // truncate the file and expect a corruption error
    fs::resize_file(path, fs::file_size(path) - 16);
    CHECK_THROWS_AS(read_noise_dump(path), std::runtime_error);
    fs::remove_all(dir);
}
