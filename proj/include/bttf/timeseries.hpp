#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bttf/dense.hpp"
#include "bttf/errors.hpp"

namespace bttf {

/// A named univariate sequence of observations. Values are finite and
/// non-empty once constructed through make_series or the loaders.
struct TimeSeries {
    std::string name;
    Vecd values;

    Index length() const { return values.size(); }
};

/// Validates the series invariants (length >= 1, all values finite).
TimeSeries make_series(std::string name, Vecd values);

/// Chronological train/val/test partition. Ratios must lie in (0,1) and
/// sum to 1. With overlap on, val and test are prefixed with the L
/// observations preceding their nominal boundary so that the first
/// window of each split is constructible without peeking past it.
/// Fixed borders (end-of-train, end-of-val indices) bypass the ratios
/// when set; used for datasets with calendar-defined splits.
struct SplitSpec {
    double train_ratio = 0.7;
    double val_ratio = 0.1;
    double test_ratio = 0.2;
    bool overlap = true;
    std::optional<Index> fixed_train_end;
    std::optional<Index> fixed_val_end;

    void validate() const;
};

struct SeriesSplits {
    TimeSeries train;
    TimeSeries val;
    TimeSeries test;
};

SeriesSplits split_series(const TimeSeries& series, const SplitSpec& spec, Index lookback);

/// Standardization parameters fitted on the train split only.
/// Population (divide-by-n) standard deviation.
struct Scaler {
    double mean = 0.0;
    double std = 1.0;

    double apply(double x) const { return (x - mean) / std; }
    double invert(double z) const { return z * std + mean; }
    Vecd apply(const Vecd& x) const { return (x.array() - mean) / std; }
    Vecd invert(const Vecd& z) const { return z.array() * std + mean; }
    TimeSeries apply(const TimeSeries& s) const { return {s.name, apply(s.values)}; }
};

Scaler fit_scaler(const TimeSeries& train);

/// One supervised example. anchor is the 0-based index of the last input
/// observation in the source series, so input = x[anchor-L+1 .. anchor]
/// and target = x[anchor+1 .. anchor+H] (paper notation is 1-based).
struct WindowPair {
    Vecd input;
    Vecd target;
    Index anchor = 0;
};

/// Sliding-window supervised dataset. Row j of inputs/targets is window j,
/// in source order; anchors[j] is the 0-based last-input index.
struct WindowDataset {
    Matd inputs;   // size() x input_len()
    Matd targets;  // size() x horizon()
    std::vector<Index> anchors;

    Index size() const { return inputs.rows(); }
    Index input_len() const { return inputs.cols(); }
    Index horizon() const { return targets.cols(); }

    WindowPair window(Index j) const {
        return {inputs.row(j).transpose(), targets.row(j).transpose(),
                anchors[static_cast<std::size_t>(j)]};
    }
};

/// Exactly T - L - H + 1 windows in order; throws InsufficientDataError
/// when T < L + H.
WindowDataset make_windows(const TimeSeries& series, Index lookback, Index horizon);

} // namespace bttf
