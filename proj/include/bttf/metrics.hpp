#pragma once

#include <optional>
#include <string>

#include "bttf/dense.hpp"

namespace bttf {

struct EvalResult {
    double mse = 0.0;
    double mae = 0.0;
    Index horizon = 0;
    std::string model_label;
    std::optional<double> gain_mse_pct;  // present only with a base attached
    std::optional<double> gain_mae_pct;
};

/// MSE and MAE over all windows and steps.
EvalResult evaluate(const Matd& preds, const Matd& targets, std::string model_label = {});

/// 100 * (base - improved) / base; positive means improvement.
double gain_percent(double base, double improved);

/// Copy of `improved` with gain percentages relative to `base` attached.
EvalResult with_gains(EvalResult improved, const EvalResult& base);

} // namespace bttf
