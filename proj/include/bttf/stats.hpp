#pragma once

#include <cmath>
#include <optional>

#include "bttf/dense.hpp"

namespace bttf {

template <class Derived>
typename Derived::Scalar mean(const Eigen::DenseBase<Derived>& x) {
    return x.derived().mean();
}

/// Population variance (divide by n).
template <class Derived>
typename Derived::Scalar population_variance(const Eigen::DenseBase<Derived>& x) {
    using Scalar = typename Derived::Scalar;
    const Scalar m = x.derived().mean();
    return (x.derived().array() - m).square().mean();
}

/// Pearson correlation of two equally sized expressions, flattened.
/// Empty result when either side has zero variance.
template <class DerivedA, class DerivedB>
std::optional<typename DerivedA::Scalar> pearson(const Eigen::DenseBase<DerivedA>& a,
                                                 const Eigen::DenseBase<DerivedB>& b) {
    using Scalar = typename DerivedA::Scalar;
    const auto av = a.derived().reshaped().eval();
    const auto bv = b.derived().reshaped().eval();
    const Scalar ma = av.mean();
    const Scalar mb = bv.mean();
    const auto da = (av.array() - ma).eval();
    const auto db = (bv.array() - mb).eval();
    const Scalar ssa = da.square().sum();
    const Scalar ssb = db.square().sum();
    if (ssa == Scalar(0) || ssb == Scalar(0)) return std::nullopt;
    return (da * db).sum() / std::sqrt(ssa * ssb);
}

/// Centered moving average with replicate edge padding of (kernel-1)/2 on
/// each side. kernel must be odd and >= 1; kernel 1 is the identity.
template <class Derived>
Vec<typename Derived::Scalar> moving_average_trend(const Eigen::DenseBase<Derived>& window,
                                                   Index kernel) {
    using Scalar = typename Derived::Scalar;
    const auto& w = window.derived();
    const Index n = w.size();
    if (kernel < 1 || kernel % 2 == 0)
        throw std::invalid_argument("moving_average_trend: kernel must be odd and >= 1, got " +
                                    std::to_string(kernel));
    if (n < 1) throw std::invalid_argument("moving_average_trend: empty window");
    if (kernel == 1) return w.reshaped().eval();

    const Index pad = (kernel - 1) / 2;
    // prefix sums over the replicate-padded sequence
    Vec<Scalar> prefix(n + kernel);
    prefix[0] = Scalar(0);
    for (Index i = 0; i < n + kernel - 1; ++i) {
        const Index src = std::min(std::max(i - pad, Index{0}), n - 1);
        prefix[i + 1] = prefix[i] + w(src);
    }
    Vec<Scalar> trend(n);
    for (Index i = 0; i < n; ++i)
        trend[i] = (prefix[i + kernel] - prefix[i]) / Scalar(kernel);
    return trend;
}

} // namespace bttf
