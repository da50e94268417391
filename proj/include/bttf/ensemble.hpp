#pragma once

#include <vector>

#include "bttf/dense.hpp"

namespace bttf {

/// Observable statistics for one candidate ensemble size.
struct EnsembleStats {
    Index k = 0;
    double variance = 0.0;   // V(K): mean per-cell population variance across members
    double mean_corr = 0.0;  // R(K): mean pairwise Pearson correlation
    double score = 0.0;      // S(K): min-max normalized V + R over the grid
};

/// Candidate sizes {M, 2M, ...} clipped to [1, N], with N appended when
/// not already present, so the full ensemble is always considered.
std::vector<Index> k_grid(Index step, Index n);

/// Element-wise mean of the first k rank slices.
Matd topk_average(const std::vector<Matd>& ranked_preds, Index k);

/// Population variance across the top-k members per (window, step) cell,
/// averaged over all cells. Defined as 0 for k = 1.
double variance_stat(const std::vector<Matd>& ranked_preds, Index k);

/// Mean Pearson correlation over all C(k,2) pairs of flattened member
/// predictions; a pair involving a constant vector contributes 0.
/// Defined as 1 for k = 1.
double meancorr_stat(const std::vector<Matd>& ranked_preds, Index k);

/// Fills score = normalized V + normalized R, min/max taken over the
/// grid; epsilon keeps the degenerate single-candidate case at 0.
void apply_scores(std::vector<EnsembleStats>& grid_stats, double epsilon);

struct SelectionResult {
    Index k_star = 0;
    std::vector<EnsembleStats> stats;
    Matd final;  // topk_average at k_star
};

/// Computes V, R, S per grid candidate and picks K* = argmin S with a
/// smallest-K tie-break.
SelectionResult select_k(const std::vector<Matd>& ranked_preds, const std::vector<Index>& grid,
                         double epsilon);

/// Empirical ensemble error decomposition (labeled-data diagnostic).
/// Errors are centered by the shared bias; variance_term + covariance_term
/// + bias_sq then reproduce the measured ensemble MSE exactly, with any
/// floating-point remainder reported as residual. mean_variance and
/// mean_covariance are the per-member and per-pair averages themselves.
struct ErrorDecomposition {
    double bias_sq = 0.0;
    double mean_variance = 0.0;    // Var: mean over members of E[(eps_i - bias)^2]
    double mean_covariance = 0.0;  // Cov: mean over pairs of E[(eps_i - bias)(eps_j - bias)]
    double variance_term = 0.0;    // Var / K
    double covariance_term = 0.0;  // (2 / K^2) * sum_{i<j} Cov_ij
    double residual = 0.0;         // measured - (bias_sq + variance_term + covariance_term)
    double ensemble_mse = 0.0;     // measured MSE of the K-member mean
    bool covariance_defined = true;  // false for K < 2 (term reported as 0)
};

ErrorDecomposition decompose_error(const std::vector<Matd>& member_preds, const Matd& truth,
                                   Index k);

} // namespace bttf
