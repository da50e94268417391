#pragma once

#include <stdexcept>
#include <string>

namespace bttf {

/// Thrown when a series or split is too short to construct the requested
/// windows or split segments. The message names the offending split.
struct InsufficientDataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown when training encounters a non-finite loss. Carries the 1-based
/// epoch index at which the divergence was detected.
struct DivergenceError : std::runtime_error {
    explicit DivergenceError(long epoch_idx, const std::string& what_arg)
        : std::runtime_error(what_arg), epoch(epoch_idx) {}
    long epoch;
};

/// Thrown when any member of a refinement pool fails to train. The pool
/// fails as a whole; the message names the failing segment index.
struct PoolTrainError : std::runtime_error {
    explicit PoolTrainError(int segment_idx, const std::string& what_arg)
        : std::runtime_error(what_arg), segment_index(segment_idx) {}
    int segment_index;
};

} // namespace bttf
