#include "bttf/metrics.hpp"

#include <stdexcept>

namespace bttf {

EvalResult evaluate(const Matd& preds, const Matd& targets, std::string model_label) {
    if (preds.rows() != targets.rows() || preds.cols() != targets.cols())
        throw std::invalid_argument("evaluate: shape mismatch " + std::to_string(preds.rows()) +
                                    "x" + std::to_string(preds.cols()) + " vs " +
                                    std::to_string(targets.rows()) + "x" +
                                    std::to_string(targets.cols()));
    if (preds.size() == 0) throw std::invalid_argument("evaluate: empty prediction matrix");
    EvalResult r;
    const auto err = (preds - targets).array();
    r.mse = err.square().mean();
    r.mae = err.abs().mean();
    r.horizon = preds.cols();
    r.model_label = std::move(model_label);
    return r;
}

double gain_percent(double base, double improved) {
    if (!(base > 0.0))
        throw std::invalid_argument("gain_percent: base must be > 0, got " + std::to_string(base));
    return 100.0 * (base - improved) / base;
}

EvalResult with_gains(EvalResult improved, const EvalResult& base) {
    improved.gain_mse_pct = gain_percent(base.mse, improved.mse);
    improved.gain_mae_pct = gain_percent(base.mae, improved.mae);
    return improved;
}

} // namespace bttf
