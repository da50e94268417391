// Independent brute-force reference implementations used to pin expected
// values. Plain loops over std::vector<double> only; nothing here may call
// into the library paths under test.
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <utility>
#include <vector>

namespace oracle {

using Grid = std::vector<std::vector<double>>;  // rows x cols

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline std::vector<double> flatten(const Grid& g) {
    std::vector<double> out;
    for (const auto& row : g)
        for (double x : row) out.push_back(x);
    return out;
}

// --- linear model ---------------------------------------------------------

// trend via centered moving average with replicate padding, seasonal = rest
inline std::pair<std::vector<double>, std::vector<double>> decompose(
    const std::vector<double>& window, long kernel) {
    const long n = static_cast<long>(window.size());
    const long pad = (kernel - 1) / 2;
    std::vector<double> trend(window.size()), seasonal(window.size());
    for (long i = 0; i < n; ++i) {
        double s = 0.0;
        for (long k = -pad; k <= pad; ++k) {
            long idx = i + k;
            if (idx < 0) idx = 0;
            if (idx >= n) idx = n - 1;
            s += window[static_cast<std::size_t>(idx)];
        }
        trend[static_cast<std::size_t>(i)] = s / static_cast<double>(kernel);
        seasonal[static_cast<std::size_t>(i)] =
            window[static_cast<std::size_t>(i)] - trend[static_cast<std::size_t>(i)];
    }
    return {trend, seasonal};
}

// weight is horizon x input, row-major grid
inline std::vector<double> affine(const Grid& weight, const std::vector<double>& bias,
                                  const std::vector<double>& x) {
    std::vector<double> y(bias);
    for (std::size_t r = 0; r < weight.size(); ++r)
        for (std::size_t c = 0; c < weight[r].size(); ++c) y[r] += weight[r][c] * x[c];
    return y;
}

inline double mse(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s / static_cast<double>(a.size());
}

// --- segments --------------------------------------------------------------

inline std::vector<std::pair<long, long>> enumerate_segments(long horizon, long width,
                                                             const std::set<long>& strides) {
    std::set<std::pair<long, long>> set;
    for (long stride : strides)
        for (long s = 0; s + width <= horizon; s += stride) set.insert({s, s + width});
    return {set.begin(), set.end()};
}

// --- ensemble statistics ----------------------------------------------------

inline Grid topk_average(const std::vector<Grid>& members, long k) {
    Grid out = members[0];
    for (long m = 1; m < k; ++m)
        for (std::size_t i = 0; i < out.size(); ++i)
            for (std::size_t j = 0; j < out[i].size(); ++j)
                out[i][j] += members[static_cast<std::size_t>(m)][i][j];
    for (auto& row : out)
        for (double& x : row) x /= static_cast<double>(k);
    return out;
}

inline double variance_stat(const std::vector<Grid>& members, long k) {
    if (k == 1) return 0.0;
    double total = 0.0;
    long cells = 0;
    for (std::size_t i = 0; i < members[0].size(); ++i)
        for (std::size_t j = 0; j < members[0][i].size(); ++j) {
            double m = 0.0;
            for (long t = 0; t < k; ++t) m += members[static_cast<std::size_t>(t)][i][j];
            m /= static_cast<double>(k);
            double v = 0.0;
            for (long t = 0; t < k; ++t) {
                const double d = members[static_cast<std::size_t>(t)][i][j] - m;
                v += d * d;
            }
            total += v / static_cast<double>(k);
            ++cells;
        }
    return total / static_cast<double>(cells);
}

inline std::optional<double> pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double ma = mean(a), mb = mean(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return std::nullopt;
    return sab / std::sqrt(saa * sbb);
}

inline double meancorr_stat(const std::vector<Grid>& members, long k) {
    if (k == 1) return 1.0;
    double sum = 0.0;
    long pairs = 0;
    for (long i = 0; i < k; ++i)
        for (long j = i + 1; j < k; ++j) {
            const auto r = pearson(flatten(members[static_cast<std::size_t>(i)]),
                                   flatten(members[static_cast<std::size_t>(j)]));
            sum += r.value_or(0.0);
            ++pairs;
        }
    return sum / static_cast<double>(pairs);
}

struct Selection {
    long k_star = 0;
    std::vector<double> v, r, s;
};

inline Selection select_k(const std::vector<Grid>& members, const std::vector<long>& grid,
                          double epsilon) {
    Selection out;
    for (long k : grid) {
        out.v.push_back(variance_stat(members, k));
        out.r.push_back(meancorr_stat(members, k));
    }
    double vmin = out.v[0], vmax = out.v[0], rmin = out.r[0], rmax = out.r[0];
    for (std::size_t i = 1; i < out.v.size(); ++i) {
        vmin = std::min(vmin, out.v[i]);
        vmax = std::max(vmax, out.v[i]);
        rmin = std::min(rmin, out.r[i]);
        rmax = std::max(rmax, out.r[i]);
    }
    for (std::size_t i = 0; i < out.v.size(); ++i)
        out.s.push_back((out.v[i] - vmin) / (vmax - vmin + epsilon) +
                        (out.r[i] - rmin) / (rmax - rmin + epsilon));
    std::size_t best = 0;
    for (std::size_t i = 1; i < out.s.size(); ++i)
        if (out.s[i] < out.s[best]) best = i;
    out.k_star = grid[best];
    return out;
}

} // namespace oracle
