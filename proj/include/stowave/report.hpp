#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "stowave/ensemble.hpp"

namespace stowave {

/// One row of the long-format results table. Numeric fields are serialized
/// with 17 significant digits so files are bit-stable and lossless.
struct ResultRow {
    std::string run_id;
    double alpha = 0.0, nu = 0.0, mu = 0.0, xi = 0.0;
    std::string interpretation;
    std::string estimator;
    double value = 0.0;
    double std_error = 0.0;
    double width_mean = 0.0;
    int completed = 0, blown_up = 0, extinct = 0;
    std::uint64_t seed = 0;
};

namespace detail {

inline std::string csv_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += "\"\"";
        else out += ch;
    }
    out += "\"";
    return out;
}

}  // namespace detail

inline const char* interpretation_name(NoiseInterpretation i) {
    return i == NoiseInterpretation::Ito ? "ito" : "stratonovich";
}

/// Rows for every available estimator of one ensemble, plus a row for the
/// pooled instantaneous speed (value = mean, std_error = sample std, the
/// spread the frozen tables quote alongside Lambda_min).
inline std::vector<ResultRow> summary_rows(const std::string& run_id, const RunSetup& run,
                                           const EnsembleSummary& sum) {
    std::vector<ResultRow> rows;
    auto base_row = [&]() {
        ResultRow row;
        row.run_id = run_id;
        row.alpha = run.model.alpha;
        row.nu = run.model.nu;
        row.mu = run.model.mu;
        row.xi = run.xi;
        row.interpretation = interpretation_name(run.model.interpretation);
        row.width_mean = sum.width.n > 0 ? sum.width.mean : std::nan("");
        row.completed = sum.completed;
        row.blown_up = sum.blown_up;
        row.extinct = sum.extinct;
        row.seed = run.master_seed;
        return row;
    };
    for (Estimator e : kAllEstimators) {
        const auto it = sum.stats.find(e);
        if (it == sum.stats.end() || it->second.n == 0) continue;
        ResultRow row = base_row();
        row.estimator = estimator_name(e);
        row.value = it->second.mean;
        row.std_error = it->second.std_error;
        rows.push_back(std::move(row));
    }
    if (sum.lambda_samples > 0) {
        ResultRow row = base_row();
        row.estimator = "lambda_inst";
        row.value = sum.lambda_mean;
        row.std_error = sum.lambda_std;
        rows.push_back(std::move(row));
    }
    return rows;
}

inline void write_results_csv(const std::string& path, const std::vector<ResultRow>& rows) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("report: cannot open " + path);
    os << "run_id,alpha,nu,mu,xi,interpretation,estimator,value,std_error,width_mean,"
          "completed,blown_up,extinct,seed\n";
    for (const ResultRow& r : rows) {
        os << detail::csv_quote(r.run_id) << ',' << detail::csv_real(r.alpha) << ','
           << detail::csv_real(r.nu) << ',' << detail::csv_real(r.mu) << ','
           << detail::csv_real(r.xi) << ',' << r.interpretation << ','
           << detail::csv_quote(r.estimator) << ',' << detail::csv_real(r.value) << ','
           << detail::csv_real(r.std_error) << ',' << detail::csv_real(r.width_mean) << ','
           << r.completed << ',' << r.blown_up << ',' << r.extinct << ',' << r.seed << "\n";
    }
    if (!os) throw std::runtime_error("report: write failed for " + path);
}

/// Histogram of the pooled instantaneous wave speed (bin edges + counts).
inline void write_lambda_histogram(const std::string& path, const EnsembleSummary& sum,
                                   int bins = 60) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("report: cannot open " + path);
    os << "bin_lo,bin_hi,count\n";
    if (sum.lambda_pool.empty()) return;
    const auto [mn_it, mx_it] = std::minmax_element(sum.lambda_pool.begin(),
                                                    sum.lambda_pool.end());
    double lo = *mn_it, hi = *mx_it;
    if (lo == hi) hi = lo + 1.0;
    std::vector<long> counts(static_cast<size_t>(bins), 0);
    const double w = (hi - lo) / bins;
    for (double v : sum.lambda_pool) {
        int b = static_cast<int>((v - lo) / w);
        b = std::clamp(b, 0, bins - 1);
        ++counts[static_cast<size_t>(b)];
    }
    for (int b = 0; b < bins; ++b)
        os << detail::csv_real(lo + b * w) << ',' << detail::csv_real(lo + (b + 1) * w) << ','
           << counts[static_cast<size_t>(b)] << "\n";
}

/// Final-time mean profiles (aligned and raw) on the grid.
inline void write_mean_profile(const std::string& path, const EnsembleSummary& sum) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("report: cannot open " + path);
    os << "x,u_mean_aligned,u_mean_raw\n";
    for (int i = 0; i < sum.grid.n_points; ++i)
        os << detail::csv_real(sum.grid.point(i)) << ','
           << detail::csv_real(sum.mean_profile[static_cast<size_t>(i)]) << ','
           << detail::csv_real(sum.mean_profile_raw[static_cast<size_t>(i)]) << "\n";
}

/// Long-format sweep table; failed cells carry the failure note and no rows.
inline void write_sweep_csv(const std::string& path, const RunSetup& base,
                            const std::vector<SweepCell>& cells) {
    std::vector<ResultRow> rows;
    for (const SweepCell& cell : cells) {
        if (!cell.summary) continue;
        RunSetup run = base;
        run.model.alpha = cell.alpha;
        run.model.mu = std::sqrt(cell.mu2);
        run.model.interpretation = cell.interpretation;
        run.xi = cell.xi;
        char id[96];
        std::snprintf(id, sizeof(id), "sweep_a%g_mu2%g_xi%g_%s", cell.alpha, cell.mu2, cell.xi,
                      interpretation_name(cell.interpretation));
        const auto cell_rows = summary_rows(id, run, *cell.summary);
        rows.insert(rows.end(), cell_rows.begin(), cell_rows.end());
    }
    write_results_csv(path, rows);
}

}  // namespace stowave
