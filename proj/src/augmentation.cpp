#include "bttf/augmentation.hpp"

#include <algorithm>

namespace bttf {

Index default_segment_width(Index horizon) { return std::max<Index>(1, horizon / 3); }

std::vector<SegmentSpec> enumerate_segments(Index horizon, Index width,
                                            const std::set<Index>& strides) {
    if (width < 1 || width > horizon)
        throw std::invalid_argument("enumerate_segments: width must lie in [1, horizon], got " +
                                    std::to_string(width) + " with horizon " +
                                    std::to_string(horizon));
    if (strides.empty()) throw std::invalid_argument("enumerate_segments: need at least one stride");
    for (Index s : strides)
        if (s < 1) throw std::invalid_argument("enumerate_segments: every stride must be >= 1");

    std::set<Index> starts;
    for (Index stride : strides)
        for (Index start = 0; start + width <= horizon; start += stride) starts.insert(start);

    std::vector<SegmentSpec> segments;
    segments.reserve(starts.size());
    int index = 1;
    for (Index start : starts) segments.push_back({index++, start, start + width});
    return segments;
}

Matd first_stage_forecasts(const LinearForecaster& model, const WindowDataset& windows) {
    return forward_batch(model, windows.inputs);
}

WindowDataset build_augmented(const WindowDataset& windows, const Matd& forecasts,
                              const SegmentSpec& segment) {
    if (forecasts.rows() != windows.size())
        throw std::invalid_argument("build_augmented: forecast rows (" +
                                    std::to_string(forecasts.rows()) + ") != window count (" +
                                    std::to_string(windows.size()) + ")");
    if (segment.start < 0 || segment.end <= segment.start || segment.end > forecasts.cols())
        throw std::invalid_argument("build_augmented: segment [" + std::to_string(segment.start) +
                                    ", " + std::to_string(segment.end) +
                                    ") out of horizon bounds [0, " +
                                    std::to_string(forecasts.cols()) + ")");

    WindowDataset out;
    out.inputs.resize(windows.size(), windows.input_len() + segment.width());
    out.inputs.leftCols(windows.input_len()) = windows.inputs;
    out.inputs.rightCols(segment.width()) = forecasts.middleCols(segment.start, segment.width());
    out.targets = windows.targets;
    out.anchors = windows.anchors;
    return out;
}

} // namespace bttf
