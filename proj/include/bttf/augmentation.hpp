#pragma once

#include <set>
#include <vector>

#include "bttf/dense.hpp"
#include "bttf/linear_model.hpp"
#include "bttf/timeseries.hpp"

namespace bttf {

/// Half-open range [start, end) into the forecast horizon. All segments
/// produced by one enumeration share the same width.
struct SegmentSpec {
    int index = 0;  // 1-based position within the enumeration
    Index start = 0;
    Index end = 0;

    Index width() const { return end - start; }
};

/// Segment width default: one-third of the horizon, floored, minimum 1.
Index default_segment_width(Index horizon);

/// For each stride, segments start at 0, stride, 2*stride, ... while
/// start + width <= horizon. Strides are pooled, duplicates removed,
/// result sorted by (start, end) and indexed 1..N.
std::vector<SegmentSpec> enumerate_segments(Index horizon, Index width,
                                            const std::set<Index>& strides);

/// Row j holds the model's H-step forecast for window j.
Matd first_stage_forecasts(const LinearForecaster& model, const WindowDataset& windows);

/// Appends the segment slice of each window's first-stage forecast to its
/// input; targets and anchors are untouched.
WindowDataset build_augmented(const WindowDataset& windows, const Matd& forecasts,
                              const SegmentSpec& segment);

} // namespace bttf
