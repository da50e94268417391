#include "bttf/refinement.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <mutex>
#include <thread>

#include "bttf/errors.hpp"

namespace bttf {

std::vector<SegmentDataset> build_segment_datasets(const std::vector<SegmentSpec>& segments,
                                                   const WindowDataset& train_windows,
                                                   const Matd& train_forecasts,
                                                   const WindowDataset& val_windows,
                                                   const Matd& val_forecasts) {
    std::vector<SegmentDataset> out;
    out.reserve(segments.size());
    for (const SegmentSpec& seg : segments)
        out.push_back({seg, build_augmented(train_windows, train_forecasts, seg),
                       build_augmented(val_windows, val_forecasts, seg)});
    return out;
}

const PoolEntry& RefinementPool::by_rank(int rank) const {
    for (const PoolEntry& e : entries)
        if (e.rank == rank) return e;
    throw std::invalid_argument("RefinementPool: no entry with rank " + std::to_string(rank));
}

void assign_pool_ranks(std::vector<PoolEntry>& entries) {
    std::vector<int> order(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const PoolEntry& ea = entries[static_cast<std::size_t>(a)];
        const PoolEntry& eb = entries[static_cast<std::size_t>(b)];
        if (ea.val_mse != eb.val_mse) return ea.val_mse < eb.val_mse;
        if (ea.segment.start != eb.segment.start) return ea.segment.start < eb.segment.start;
        return ea.segment.index < eb.segment.index;
    });
    for (std::size_t r = 0; r < order.size(); ++r)
        entries[static_cast<std::size_t>(order[r])].rank = static_cast<int>(r) + 1;
}

RefinementPool train_pool(const std::vector<SegmentDataset>& datasets, ModelKind kind,
                          Index kernel, const TrainConfig& config, std::int64_t base_seed,
                          int workers) {
    if (datasets.empty()) throw std::invalid_argument("train_pool: need at least one segment dataset");
    if (workers < 1) throw std::invalid_argument("train_pool: workers must be >= 1");

    const std::size_t n = datasets.size();
    std::vector<PoolEntry> entries(n);
    // (segment index, message) of failed members; lowest segment index wins
    std::mutex fail_mutex;
    std::map<int, std::string> failures;

    auto run_member = [&](std::size_t i) {
        const SegmentDataset& ds = datasets[i];
        try {
            TrainConfig member_cfg = config;
            member_cfg.seed = base_seed + ds.segment.index;
            LinearForecaster init = init_model(kind, ds.train.input_len(), ds.train.horizon(),
                                               kernel, member_cfg.seed);
            auto trained = train(init, ds.train, &ds.val, member_cfg);
            const double val_mse =
                loss_mse(forward_batch(trained.first, ds.val.inputs), ds.val.targets);
            entries[i] = {ds.segment, std::move(trained.first), val_mse, 0};
        } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(fail_mutex);
            failures.emplace(ds.segment.index, e.what());
        }
    };

    if (workers == 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) run_member(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        const int count = std::min<int>(workers, static_cast<int>(n));
        pool.reserve(static_cast<std::size_t>(count));
        for (int w = 0; w < count; ++w)
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= n) break;
                    run_member(i);
                }
            });
        for (auto& t : pool) t.join();
    }

    if (!failures.empty()) {
        const auto& [seg_index, message] = *failures.begin();
        throw PoolTrainError(seg_index, "pool training failed at segment " +
                                            std::to_string(seg_index) + ": " + message);
    }

    assign_pool_ranks(entries);
    return {std::move(entries), base_seed};
}

std::vector<Matd> pool_predict(const RefinementPool& pool, const WindowDataset& windows,
                               const Matd& forecasts) {
    if (forecasts.rows() != windows.size())
        throw std::invalid_argument("pool_predict: forecast rows != window count");
    std::vector<const PoolEntry*> by_rank(static_cast<std::size_t>(pool.size()), nullptr);
    for (const PoolEntry& e : pool.entries) {
        if (e.rank < 1 || e.rank > pool.size())
            throw std::invalid_argument("pool_predict: corrupt rank " + std::to_string(e.rank));
        by_rank[static_cast<std::size_t>(e.rank - 1)] = &e;
    }
    std::vector<Matd> preds;
    preds.reserve(static_cast<std::size_t>(pool.size()));
    for (const PoolEntry* e : by_rank) {
        const WindowDataset aug = build_augmented(windows, forecasts, e->segment);
        preds.push_back(forward_batch(e->model, aug.inputs));
    }
    return preds;
}

Matd refinement_delta(const Matd& stage2, const Matd& stage1) {
    if (stage2.rows() != stage1.rows() || stage2.cols() != stage1.cols())
        throw std::invalid_argument("refinement_delta: shape mismatch");
    return stage2 - stage1;
}

} // namespace bttf
