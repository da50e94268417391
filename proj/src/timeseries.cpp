#include "bttf/timeseries.hpp"

#include <cmath>

namespace bttf {

TimeSeries make_series(std::string name, Vecd values) {
    if (values.size() < 1)
        throw std::invalid_argument("series '" + name + "': length must be >= 1");
    if (!values.allFinite())
        throw std::invalid_argument("series '" + name + "': contains non-finite values");
    return {std::move(name), std::move(values)};
}

void SplitSpec::validate() const {
    if (fixed_train_end || fixed_val_end) {
        if (!(fixed_train_end && fixed_val_end))
            throw std::invalid_argument("SplitSpec: fixed borders require both train and val ends");
        if (*fixed_train_end <= 0 || *fixed_val_end <= *fixed_train_end)
            throw std::invalid_argument("SplitSpec: fixed borders must satisfy 0 < train_end < val_end");
        return;
    }
    for (double r : {train_ratio, val_ratio, test_ratio})
        if (!(r > 0.0 && r < 1.0))
            throw std::invalid_argument("SplitSpec: each ratio must lie in (0,1)");
    if (std::abs(train_ratio + val_ratio + test_ratio - 1.0) > 1e-9)
        throw std::invalid_argument("SplitSpec: ratios must sum to 1");
}

namespace {

TimeSeries slice(const TimeSeries& s, Index begin, Index end, const char* label) {
    if (begin < 0)
        throw InsufficientDataError("insufficient data for " + std::string(label) + " split of '" +
                                    s.name + "': overlap prefix would start before the series");
    if (end > s.length() || begin >= end)
        throw InsufficientDataError("insufficient data for " + std::string(label) + " split of '" +
                                    s.name + "'");
    return {s.name + "/" + label, s.values.segment(begin, end - begin)};
}

} // namespace

SeriesSplits split_series(const TimeSeries& series, const SplitSpec& spec, Index lookback) {
    spec.validate();
    if (lookback < 0) throw std::invalid_argument("split_series: lookback must be >= 0");

    const Index t = series.length();
    Index train_end = 0;
    Index val_end = 0;
    if (spec.fixed_train_end) {
        train_end = *spec.fixed_train_end;
        val_end = *spec.fixed_val_end;
        if (val_end > t)
            throw InsufficientDataError("insufficient data for val split of '" + series.name +
                                        "': fixed border past end of series");
    } else {
        const Index n_train = static_cast<Index>(spec.train_ratio * static_cast<double>(t));
        const Index n_test = static_cast<Index>(spec.test_ratio * static_cast<double>(t));
        train_end = n_train;
        val_end = t - n_test;
    }

    const Index prefix = spec.overlap ? lookback : 0;
    SeriesSplits out;
    out.train = slice(series, 0, train_end, "train");
    out.val = slice(series, train_end - prefix, val_end, "val");
    out.test = slice(series, val_end - prefix, t, "test");
    return out;
}

Scaler fit_scaler(const TimeSeries& train) {
    if (train.length() < 2)
        throw std::invalid_argument("fit_scaler: need at least 2 observations, got " +
                                    std::to_string(train.length()));
    const double m = train.values.mean();
    const double var = (train.values.array() - m).square().mean();
    if (var <= 0.0)
        throw std::invalid_argument("fit_scaler: zero variance in train split '" + train.name + "'");
    return {m, std::sqrt(var)};
}

WindowDataset make_windows(const TimeSeries& series, Index lookback, Index horizon) {
    if (lookback < 1 || horizon < 1)
        throw std::invalid_argument("make_windows: lookback and horizon must be >= 1");
    const Index t = series.length();
    if (t < lookback + horizon)
        throw InsufficientDataError("insufficient data in '" + series.name + "': need " +
                                    std::to_string(lookback + horizon) + " observations for L=" +
                                    std::to_string(lookback) + ", H=" + std::to_string(horizon) +
                                    ", have " + std::to_string(t));

    const Index count = t - lookback - horizon + 1;
    WindowDataset ds;
    ds.inputs.resize(count, lookback);
    ds.targets.resize(count, horizon);
    ds.anchors.resize(static_cast<std::size_t>(count));
    for (Index j = 0; j < count; ++j) {
        ds.inputs.row(j) = series.values.segment(j, lookback).transpose();
        ds.targets.row(j) = series.values.segment(j + lookback, horizon).transpose();
        ds.anchors[static_cast<std::size_t>(j)] = j + lookback - 1;
    }
    return ds;
}

} // namespace bttf
