#pragma once

#include <vector>

#include "bttf/augmentation.hpp"
#include "bttf/linear_model.hpp"

namespace bttf {

/// Augmented train/val data for one segment, as consumed by train_pool.
struct SegmentDataset {
    SegmentSpec segment;
    WindowDataset train;
    WindowDataset val;
};

/// Builds the per-segment augmented datasets from one split pair.
std::vector<SegmentDataset> build_segment_datasets(const std::vector<SegmentSpec>& segments,
                                                   const WindowDataset& train_windows,
                                                   const Matd& train_forecasts,
                                                   const WindowDataset& val_windows,
                                                   const Matd& val_forecasts);

struct PoolEntry {
    SegmentSpec segment;
    LinearForecaster model;  // input_len = L + W
    double val_mse = 0.0;
    int rank = 0;  // 1..N, 1 = best validation MSE
};

/// N trained second-stage models. Entries are stored in segment order;
/// ranks are a permutation of 1..N with rank 1 at minimal val_mse, ties
/// broken by ascending segment start, then segment index.
struct RefinementPool {
    std::vector<PoolEntry> entries;
    std::int64_t base_seed = 0;

    int size() const { return static_cast<int>(entries.size()); }
    /// Entry with the given rank (1-based).
    const PoolEntry& by_rank(int rank) const;
};

/// Assigns ranks 1..N by ascending val_mse; ties break by ascending
/// segment start, then segment index.
void assign_pool_ranks(std::vector<PoolEntry>& entries);

/// Trains one second-stage model per segment with seed = base_seed +
/// segment index, identical hyperparameters across members; kind and
/// kernel select the member architecture. Members are independent; with
/// workers > 1 they train concurrently and the result is identical to a
/// sequential run. Any member failure aborts the pool with a
/// PoolTrainError naming the lowest failing segment index.
RefinementPool train_pool(const std::vector<SegmentDataset>& datasets, ModelKind kind,
                          Index kernel, const TrainConfig& config, std::int64_t base_seed,
                          int workers = 1);

/// Prediction slices ordered by rank: slice k holds the rank-(k+1)
/// model's forecasts on its own segment's augmented inputs.
std::vector<Matd> pool_predict(const RefinementPool& pool, const WindowDataset& windows,
                               const Matd& forecasts);

/// Element-wise second-stage minus first-stage prediction (the implicit
/// segment-specific adjustment); diagnostic output.
Matd refinement_delta(const Matd& stage2, const Matd& stage1);

} // namespace bttf
