#include "bttf/ensemble.hpp"

#include <algorithm>
#include <limits>

#include "bttf/stats.hpp"

namespace bttf {

std::vector<Index> k_grid(Index step, Index n) {
    if (step < 1 || n < 1) throw std::invalid_argument("k_grid: step and n must be >= 1");
    std::vector<Index> grid;
    for (Index k = step; k <= n; k += step) grid.push_back(k);
    if (grid.empty() || grid.back() != n) grid.push_back(n);
    return grid;
}

namespace {

void check_k(const std::vector<Matd>& preds, Index k, const char* op) {
    if (preds.empty()) throw std::invalid_argument(std::string(op) + ": empty prediction tensor");
    if (k < 1 || k > static_cast<Index>(preds.size()))
        throw std::invalid_argument(std::string(op) + ": K = " + std::to_string(k) +
                                    " out of range [1, " + std::to_string(preds.size()) + "]");
    for (const Matd& m : preds)
        if (m.rows() != preds.front().rows() || m.cols() != preds.front().cols())
            throw std::invalid_argument(std::string(op) + ": member shape mismatch");
}

} // namespace

Matd topk_average(const std::vector<Matd>& ranked_preds, Index k) {
    check_k(ranked_preds, k, "topk_average");
    Matd mean = ranked_preds.front();
    for (Index i = 1; i < k; ++i) mean += ranked_preds[static_cast<std::size_t>(i)];
    return mean / static_cast<double>(k);
}

double variance_stat(const std::vector<Matd>& ranked_preds, Index k) {
    check_k(ranked_preds, k, "variance_stat");
    if (k == 1) return 0.0;
    Matd mean = topk_average(ranked_preds, k);
    Matd sq_dev = Matd::Zero(mean.rows(), mean.cols());
    for (Index i = 0; i < k; ++i)
        sq_dev.array() += (ranked_preds[static_cast<std::size_t>(i)] - mean).array().square();
    return (sq_dev / static_cast<double>(k)).mean();
}

double meancorr_stat(const std::vector<Matd>& ranked_preds, Index k) {
    check_k(ranked_preds, k, "meancorr_stat");
    if (k == 1) return 1.0;
    double sum = 0.0;
    Index pairs = 0;
    for (Index i = 0; i < k; ++i)
        for (Index j = i + 1; j < k; ++j) {
            const auto r = pearson(ranked_preds[static_cast<std::size_t>(i)],
                                   ranked_preds[static_cast<std::size_t>(j)]);
            sum += r.value_or(0.0);
            ++pairs;
        }
    return sum / static_cast<double>(pairs);
}

void apply_scores(std::vector<EnsembleStats>& grid_stats, double epsilon) {
    if (grid_stats.empty()) throw std::invalid_argument("apply_scores: empty grid");
    if (!(epsilon > 0.0)) throw std::invalid_argument("apply_scores: epsilon must be > 0");
    double v_min = std::numeric_limits<double>::infinity(), v_max = -v_min;
    double r_min = v_min, r_max = -v_min;
    for (const EnsembleStats& s : grid_stats) {
        v_min = std::min(v_min, s.variance);
        v_max = std::max(v_max, s.variance);
        r_min = std::min(r_min, s.mean_corr);
        r_max = std::max(r_max, s.mean_corr);
    }
    for (EnsembleStats& s : grid_stats)
        s.score = (s.variance - v_min) / (v_max - v_min + epsilon) +
                  (s.mean_corr - r_min) / (r_max - r_min + epsilon);
}

SelectionResult select_k(const std::vector<Matd>& ranked_preds, const std::vector<Index>& grid,
                         double epsilon) {
    if (grid.empty()) throw std::invalid_argument("select_k: empty candidate grid");
    SelectionResult result;
    result.stats.reserve(grid.size());
    for (Index k : grid)
        result.stats.push_back(
            {k, variance_stat(ranked_preds, k), meancorr_stat(ranked_preds, k), 0.0});
    apply_scores(result.stats, epsilon);

    // argmin S, smallest K on ties; grid is ascending so strict < suffices
    const EnsembleStats* best = &result.stats.front();
    for (const EnsembleStats& s : result.stats)
        if (s.score < best->score) best = &s;
    result.k_star = best->k;
    result.final = topk_average(ranked_preds, result.k_star);
    return result;
}

ErrorDecomposition decompose_error(const std::vector<Matd>& member_preds, const Matd& truth,
                                   Index k) {
    check_k(member_preds, k, "decompose_error");
    if (truth.rows() != member_preds.front().rows() || truth.cols() != member_preds.front().cols())
        throw std::invalid_argument("decompose_error: truth shape mismatch");

    const double cells = static_cast<double>(truth.size());
    const double kd = static_cast<double>(k);

    std::vector<Matd> errors;
    errors.reserve(static_cast<std::size_t>(k));
    double bias = 0.0;
    for (Index i = 0; i < k; ++i) {
        errors.push_back(member_preds[static_cast<std::size_t>(i)] - truth);
        bias += errors.back().sum() / cells;
    }
    bias /= kd;

    ErrorDecomposition d;
    d.bias_sq = bias * bias;

    double var_sum = 0.0;
    for (const Matd& e : errors) var_sum += (e.array() - bias).square().mean();
    d.mean_variance = var_sum / kd;
    d.variance_term = d.mean_variance / kd;

    if (k >= 2) {
        double cov_sum = 0.0;
        for (Index i = 0; i < k; ++i)
            for (Index j = i + 1; j < k; ++j)
                cov_sum += ((errors[static_cast<std::size_t>(i)].array() - bias) *
                            (errors[static_cast<std::size_t>(j)].array() - bias))
                               .mean();
        const double pairs = kd * (kd - 1.0) / 2.0;
        d.mean_covariance = cov_sum / pairs;
        d.covariance_term = 2.0 / (kd * kd) * cov_sum;
    } else {
        d.mean_covariance = 0.0;
        d.covariance_term = 0.0;
        d.covariance_defined = false;
    }

    Matd ens = Matd::Zero(truth.rows(), truth.cols());
    for (const Matd& e : errors) ens += e;
    ens /= kd;
    d.ensemble_mse = ens.array().square().mean();
    d.residual = d.ensemble_mse - (d.bias_sq + d.variance_term + d.covariance_term);
    return d;
}

} // namespace bttf
