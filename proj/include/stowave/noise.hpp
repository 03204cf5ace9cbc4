#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <fftw3.h>

#include "stowave/grid.hpp"
#include "stowave/rng.hpp"

namespace stowave {

/// Spatial covariance kernel of the driving noise,
/// C(x) = (1/(2 xi)) exp(-pi x^2 / (4 xi^2)).
inline double covariance(double x, double xi) {
    if (!(xi > 0.0)) throw std::invalid_argument("covariance: xi must be positive");
    const double pi = 3.14159265358979323846;
    return 0.5 / xi * std::exp(-pi * x * x / (4.0 * xi * xi));
}

/// Neumann Laplacian eigenvalue lambda_j = j^2 pi^2 / L^2 on [0, L].
inline double laplacian_eigenvalue(int j, double L) {
    const double pi = 3.14159265358979323846;
    return static_cast<double>(j) * static_cast<double>(j) * pi * pi / (L * L);
}

/// Orthonormal cosine eigenbasis shared with the Neumann Laplacian:
/// phi_0 = 1/sqrt(L), phi_j(x) = sqrt(2/L) cos(j pi x / L).
inline double basis_phi(int j, double x, double L) {
    const double pi = 3.14159265358979323846;
    if (j == 0) return 1.0 / std::sqrt(L);
    return std::sqrt(2.0 / L) * std::cos(static_cast<double>(j) * pi * x / L);
}

/// Q-Wiener covariance spectrum with exponential decay in the correlation
/// length: zeta_j = exp(-xi^2 lambda_j / pi). This is the cosine spectrum of
/// the kernel C above, so sum_j zeta_j phi_j(x)^2 ~ C(0) = 1/(2 xi) away from
/// the boundaries.
struct NoiseModel {
    double correlation_length = 0.1;
    double domain_length = 500.0;
    int truncation = 0;          // modes run j = 0..truncation
    std::vector<double> zeta;    // zeta[j], non-increasing, zeta[0] = 1

    double coefficient(int j) const { return zeta[static_cast<size_t>(j)]; }
};

inline double noise_coefficient(double xi, double L, int j) {
    const double pi = 3.14159265358979323846;
    return std::exp(-xi * xi * laplacian_eigenvalue(j, L) / pi);
}

/// Builds the spectrum; truncation < 0 selects the smallest J with
/// zeta_J < 1e-12 (later modes are negligible at double precision).
inline NoiseModel build_noise_model(double L, double xi, int truncation = -1) {
    if (!(L > 0.0)) throw std::invalid_argument("noise model: L must be positive");
    if (!(xi > 0.0)) throw std::invalid_argument("noise model: xi must be positive");
    NoiseModel model;
    model.correlation_length = xi;
    model.domain_length = L;
    if (truncation < 0) {
        int j = 0;
        while (noise_coefficient(xi, L, j) >= 1e-12) ++j;
        truncation = j;
    }
    model.truncation = truncation;
    model.zeta.resize(static_cast<size_t>(truncation) + 1);
    for (int j = 0; j <= truncation; ++j)
        model.zeta[static_cast<size_t>(j)] = noise_coefficient(xi, L, j);
    return model;
}

/// Exact covariance of the truncated expansion,
/// sum_{j=0..J} zeta_j phi_j(x) phi_j(y).
inline double spectral_covariance(const NoiseModel& model, double x, double y) {
    const double L = model.domain_length;
    double sum = 0.0;
    for (int j = 0; j <= model.truncation; ++j)
        sum += model.zeta[static_cast<size_t>(j)] * basis_phi(j, x, L) * basis_phi(j, y, L);
    return sum;
}

struct NoiseIncrement {
    std::vector<double> values;  // dW at every grid point
    double dt = 0.0;
};

namespace detail {

/// Shared DCT-I plan (FFTW REDFT00). Plan creation/destruction is serialized;
/// new-array execution is thread-safe, and FFTW_UNALIGNED makes it valid for
/// plain std::vector storage.
class DctPlan {
  public:
    explicit DctPlan(int n) : n_(n) {
        std::vector<double> in(static_cast<size_t>(n)), out(static_cast<size_t>(n));
        std::lock_guard<std::mutex> lock(mutex());
        plan_ = fftw_plan_r2r_1d(n, in.data(), out.data(), FFTW_REDFT00,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (plan_ == nullptr) throw std::runtime_error("fftw: REDFT00 plan failed");
    }
    ~DctPlan() {
        std::lock_guard<std::mutex> lock(mutex());
        fftw_destroy_plan(plan_);
    }
    DctPlan(const DctPlan&) = delete;
    DctPlan& operator=(const DctPlan&) = delete;

    void execute(double* in, double* out) const { fftw_execute_r2r(plan_, in, out); }
    int size() const { return n_; }

    static std::mutex& mutex() {
        static std::mutex m;
        return m;
    }

  private:
    fftw_plan plan_;
    int n_;
};

}  // namespace detail

/// Grid-bound synthesis of Q-Wiener increments,
///   dW(x_i) = sum_{j=0..J} zeta_j^{1/2} phi_j(x_i) xi_j,   xi_j ~ N(0, dt).
///
/// On the uniform grid x_i = i L/(M-1) every mode j coincides with the mode
/// j' = fold(j) in [0, M-1] (cosines alias exactly at grid points), so the
/// truncated sum collapses to M independent Gaussian bucket amplitudes and
/// one DCT-I of length M reproduces the law of the full sum in O(M log M).
///
/// Copies share the FFTW plan but own their scratch buffers: use one instance
/// per thread. Draws are addressed by (seed, realization, step), so identical
/// addresses give bit-identical increments in any execution order.
class IncrementSampler {
  public:
    IncrementSampler(const NoiseModel& model, const Grid& grid)
        : m_(grid.n_points),
          bucket_std_(static_cast<size_t>(grid.n_points), 0.0),
          in_(static_cast<size_t>(grid.n_points)),
          out_(static_cast<size_t>(grid.n_points)),
          plan_(std::make_shared<detail::DctPlan>(grid.n_points)) {
        const double L = model.domain_length;
        const int period = 2 * (m_ - 1);
        std::vector<double> bucket_var(static_cast<size_t>(m_), 0.0);
        for (int j = 0; j <= model.truncation; ++j) {
            int r = j % period;
            if (r > m_ - 1) r = period - r;
            const double weight = (j == 0) ? 1.0 / L : 2.0 / L;
            bucket_var[static_cast<size_t>(r)] += weight * model.zeta[static_cast<size_t>(j)];
        }
        for (int k = 0; k < m_; ++k)
            bucket_std_[static_cast<size_t>(k)] = std::sqrt(bucket_var[static_cast<size_t>(k)]);
    }

    int n_points() const { return m_; }

    /// Bucket amplitude standard deviations (unit-variance normals assumed);
    /// exposed so tests can rebuild the sum mode-by-mode.
    const std::vector<double>& bucket_std() const { return bucket_std_; }

    void sample(double dt, const GaussianStream& stream, std::uint64_t step,
                std::vector<double>& out) const {
        if (!(dt > 0.0)) throw std::invalid_argument("sample_increment: dt must be positive");
        const double sdt = std::sqrt(dt);
        stream.fill_normals(step, in_);
        // REDFT00 computes Y_i = X_0 + (-1)^i X_{M-1} + 2 sum X_j cos(pi j i/(M-1));
        // halving the interior coefficients turns it into the plain cosine sum.
        in_[0] *= bucket_std_[0] * sdt;
        const size_t last = static_cast<size_t>(m_ - 1);
        in_[last] *= bucket_std_[last] * sdt;
        for (size_t k = 1; k < last; ++k) in_[k] *= 0.5 * bucket_std_[k] * sdt;
        out.resize(static_cast<size_t>(m_));
        plan_->execute(in_.data(), out.data());
    }

    NoiseIncrement sample(const NoiseModel&, const Grid&, double dt,
                          const GaussianStream& stream, std::uint64_t step) const {
        NoiseIncrement inc;
        inc.dt = dt;
        sample(dt, stream, step, inc.values);
        return inc;
    }

  private:
    int m_;
    std::vector<double> bucket_std_;
    mutable std::vector<double> in_, out_;
    std::shared_ptr<detail::DctPlan> plan_;
};

/// Convenience one-shot form of the sampling operation.
inline NoiseIncrement sample_increment(const NoiseModel& model, const Grid& grid, double dt,
                                       const GaussianStream& stream, std::uint64_t step) {
    IncrementSampler sampler(model, grid);
    return sampler.sample(model, grid, dt, stream, step);
}

// ---------------------------------------------------------------------------
// Optional binary dump of increments for replay and debugging.
// Layout (little-endian):
//   char[8]  magic "STWNOIS1"
//   u32      version (1)
//   f64      L, xi
//   u32      truncation
//   f64      dt
//   u64      master_seed
//   u32      realization
//   u32      n_points
//   u64      n_steps
//   f64[n_steps * n_points] increments, step-major
// ---------------------------------------------------------------------------

struct NoiseDumpHeader {
    double domain_length = 0.0;
    double correlation_length = 0.0;
    std::uint32_t truncation = 0;
    double dt = 0.0;
    std::uint64_t master_seed = 0;
    std::uint32_t realization = 0;
    std::uint32_t n_points = 0;
    std::uint64_t n_steps = 0;
};

namespace detail {
template <class T>
void write_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
void read_pod(std::istream& is, T& v) {
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
}
}  // namespace detail

inline constexpr char kNoiseDumpMagic[8] = {'S', 'T', 'W', 'N', 'O', 'I', 'S', '1'};

class NoiseDumpWriter {
  public:
    NoiseDumpWriter(const std::string& path, NoiseDumpHeader header)
        : os_(path, std::ios::binary), header_(header) {
        if (!os_) throw std::runtime_error("noise dump: cannot open " + path);
        header_.n_steps = 0;
        write_header();
    }

    void append(std::span<const double> increment) {
        if (increment.size() != header_.n_points)
            throw std::invalid_argument("noise dump: increment size mismatch");
        os_.write(reinterpret_cast<const char*>(increment.data()),
                  static_cast<std::streamsize>(increment.size() * sizeof(double)));
        ++header_.n_steps;
    }

    void close() {
        if (!os_.is_open()) return;
        os_.seekp(0);
        write_header();
        os_.close();
    }

    ~NoiseDumpWriter() { close(); }

  private:
    void write_header() {
        os_.write(kNoiseDumpMagic, 8);
        detail::write_pod(os_, std::uint32_t{1});
        detail::write_pod(os_, header_.domain_length);
        detail::write_pod(os_, header_.correlation_length);
        detail::write_pod(os_, header_.truncation);
        detail::write_pod(os_, header_.dt);
        detail::write_pod(os_, header_.master_seed);
        detail::write_pod(os_, header_.realization);
        detail::write_pod(os_, header_.n_points);
        detail::write_pod(os_, header_.n_steps);
    }

    std::ofstream os_;
    NoiseDumpHeader header_;
};

struct NoiseDump {
    NoiseDumpHeader header;
    std::vector<std::vector<double>> increments;
};

inline NoiseDump read_noise_dump(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("noise dump: cannot open " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kNoiseDumpMagic, 8) != 0)
        throw std::runtime_error("noise dump: bad magic");
    std::uint32_t version = 0;
    detail::read_pod(is, version);
    if (version != 1) throw std::runtime_error("noise dump: unsupported version");
    NoiseDump dump;
    detail::read_pod(is, dump.header.domain_length);
    detail::read_pod(is, dump.header.correlation_length);
    detail::read_pod(is, dump.header.truncation);
    detail::read_pod(is, dump.header.dt);
    detail::read_pod(is, dump.header.master_seed);
    detail::read_pod(is, dump.header.realization);
    detail::read_pod(is, dump.header.n_points);
    detail::read_pod(is, dump.header.n_steps);
    if (!is) throw std::runtime_error("noise dump: truncated header");
    dump.increments.resize(dump.header.n_steps);
    for (auto& inc : dump.increments) {
        inc.resize(dump.header.n_points);
        is.read(reinterpret_cast<char*>(inc.data()),
                static_cast<std::streamsize>(inc.size() * sizeof(double)));
        if (!is) throw std::runtime_error("noise dump: truncated payload");
    }
    is.peek();
    if (!is.eof()) throw std::runtime_error("noise dump: trailing bytes");
    return dump;
}

}  // namespace stowave
