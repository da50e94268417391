#include "bttf/linear_model.hpp"

#include <cmath>
#include <limits>

#include "bttf/rng.hpp"
#include "bttf/stats.hpp"

namespace bttf {

std::string to_string(ModelKind kind) {
    return kind == ModelKind::plain ? "linear" : "dlinear";
}

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "linear" || s == "plain") return ModelKind::plain;
    if (s == "dlinear") return ModelKind::dlinear;
    throw std::invalid_argument("unknown model kind '" + s + "' (expected linear|dlinear)");
}

std::string to_string(Strategy s) { return s == Strategy::ES ? "ES" : "1E"; }

Strategy strategy_from_string(const std::string& s) {
    if (s == "ES") return Strategy::ES;
    if (s == "1E") return Strategy::OneEpoch;
    throw std::invalid_argument("unknown strategy '" + s + "' (expected ES|1E)");
}

std::string to_string(Optimizer o) { return o == Optimizer::sgd ? "sgd" : "adam"; }

Optimizer optimizer_from_string(const std::string& s) {
    if (s == "sgd") return Optimizer::sgd;
    if (s == "adam") return Optimizer::adam;
    throw std::invalid_argument("unknown optimizer '" + s + "' (expected sgd|adam)");
}

Index LinearForecaster::param_count() const {
    const Index per_map = horizon * input_len + horizon;
    return kind == ModelKind::plain ? per_map : 2 * per_map;
}

LinearForecaster init_model(ModelKind kind, Index input_len, Index horizon, Index kernel,
                            std::int64_t seed) {
    if (input_len < 1 || horizon < 1)
        throw std::invalid_argument("init_model: input_len and horizon must be >= 1");
    if (kind == ModelKind::dlinear && (kernel < 1 || kernel % 2 == 0))
        throw std::invalid_argument("init_model: dlinear kernel must be odd and >= 1, got " +
                                    std::to_string(kernel));

    LinearForecaster m;
    m.kind = kind;
    m.input_len = input_len;
    m.horizon = horizon;
    m.kernel = kind == ModelKind::dlinear ? kernel : 1;
    m.seed = seed;

    Rng rng(static_cast<std::uint64_t>(seed));
    const double bound = 1.0 / static_cast<double>(input_len);
    auto init_map = [&](LinearMap& map) {
        map.weight.resize(horizon, input_len);
        for (Index r = 0; r < horizon; ++r)
            for (Index c = 0; c < input_len; ++c) map.weight(r, c) = rng.uniform(-bound, bound);
        map.bias = Vecd::Zero(horizon);
    };
    if (kind == ModelKind::plain) {
        init_map(m.direct);
    } else {
        init_map(m.trend);
        init_map(m.seasonal);
    }
    return m;
}

std::pair<Vecd, Vecd> decompose(const Vecd& window, Index kernel) {
    Vecd trend = moving_average_trend(window, kernel);
    Vecd seasonal = window - trend;
    return {std::move(trend), std::move(seasonal)};
}

namespace {

void check_input_len(const LinearForecaster& model, Index got) {
    if (got != model.input_len)
        throw std::invalid_argument("forward: expected input length " +
                                    std::to_string(model.input_len) + ", got " +
                                    std::to_string(got));
}

/// Per-row moving-average trend of a window matrix.
Matd row_trend(const Matd& inputs, Index kernel) {
    Matd t(inputs.rows(), inputs.cols());
    for (Index j = 0; j < inputs.rows(); ++j)
        t.row(j) = moving_average_trend(inputs.row(j).transpose(), kernel).transpose();
    return t;
}

} // namespace

Vecd forward(const LinearForecaster& model, const Vecd& input) {
    check_input_len(model, input.size());
    if (model.kind == ModelKind::plain) return model.direct.weight * input + model.direct.bias;
    auto [trend, seasonal] = decompose(input, model.kernel);
    return model.trend.weight * trend + model.trend.bias + model.seasonal.weight * seasonal +
           model.seasonal.bias;
}

Matd forward_batch(const LinearForecaster& model, const Matd& inputs) {
    check_input_len(model, inputs.cols());
    if (model.kind == ModelKind::plain) {
        Matd out = inputs * model.direct.weight.transpose();
        out.rowwise() += model.direct.bias.transpose();
        return out;
    }
    const Matd xt = row_trend(inputs, model.kernel);
    const Matd xs = inputs - xt;
    Matd out = xt * model.trend.weight.transpose() + xs * model.seasonal.weight.transpose();
    out.rowwise() += (model.trend.bias + model.seasonal.bias).transpose();
    return out;
}

double loss_mse(const Matd& pred, const Matd& target) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols())
        throw std::invalid_argument("loss_mse: shape mismatch " + std::to_string(pred.rows()) +
                                    "x" + std::to_string(pred.cols()) + " vs " +
                                    std::to_string(target.rows()) + "x" +
                                    std::to_string(target.cols()));
    if (pred.size() == 0) throw std::invalid_argument("loss_mse: empty batch");
    return (pred - target).array().square().mean();
}

Vecd flatten_params(const LinearForecaster& model) {
    Vecd flat(model.param_count());
    Index off = 0;
    auto put = [&](const LinearMap& map) {
        flat.segment(off, map.weight.size()) = map.weight.reshaped();
        off += map.weight.size();
        flat.segment(off, map.bias.size()) = map.bias;
        off += map.bias.size();
    };
    if (model.kind == ModelKind::plain) {
        put(model.direct);
    } else {
        put(model.trend);
        put(model.seasonal);
    }
    return flat;
}

void unflatten_params(LinearForecaster& model, const Vecd& flat) {
    if (flat.size() != model.param_count())
        throw std::invalid_argument("unflatten_params: expected " +
                                    std::to_string(model.param_count()) + " values, got " +
                                    std::to_string(flat.size()));
    Index off = 0;
    auto take = [&](LinearMap& map) {
        map.weight.reshaped() = flat.segment(off, map.weight.size());
        off += map.weight.size();
        map.bias = flat.segment(off, map.bias.size());
        off += map.bias.size();
    };
    if (model.kind == ModelKind::plain) {
        take(model.direct);
    } else {
        take(model.trend);
        take(model.seasonal);
    }
}

namespace {

/// Shared gradient core. For dlinear the caller supplies the cached
/// per-row decomposition so train() does not redo it every batch.
std::pair<double, Vecd> grad_core(const LinearForecaster& model, const Matd& inputs,
                                  const Matd* trend_inputs, const Matd& targets) {
    if (inputs.rows() != targets.rows())
        throw std::invalid_argument("grad_mse: batch row mismatch");
    if (inputs.rows() == 0) throw std::invalid_argument("grad_mse: empty batch");
    check_input_len(model, inputs.cols());
    if (targets.cols() != model.horizon)
        throw std::invalid_argument("grad_mse: target horizon mismatch");

    Vecd grad(model.param_count());
    double loss = 0.0;
    const double scale = 2.0 / static_cast<double>(targets.size());

    if (model.kind == ModelKind::plain) {
        Matd pred = inputs * model.direct.weight.transpose();
        pred.rowwise() += model.direct.bias.transpose();
        const Matd err = pred - targets;
        loss = err.array().square().mean();
        const Matd g = scale * err;  // dL/dpred
        Index off = 0;
        grad.segment(off, model.direct.weight.size()) = (g.transpose() * inputs).reshaped();
        off += model.direct.weight.size();
        grad.segment(off, model.horizon) = g.colwise().sum().transpose();
    } else {
        const Matd xt = trend_inputs ? *trend_inputs : row_trend(inputs, model.kernel);
        const Matd xs = inputs - xt;
        Matd pred = xt * model.trend.weight.transpose() + xs * model.seasonal.weight.transpose();
        pred.rowwise() += (model.trend.bias + model.seasonal.bias).transpose();
        const Matd err = pred - targets;
        loss = err.array().square().mean();
        const Matd g = scale * err;
        const Vecd gb = g.colwise().sum().transpose();  // both biases see the same gradient
        Index off = 0;
        grad.segment(off, model.trend.weight.size()) = (g.transpose() * xt).reshaped();
        off += model.trend.weight.size();
        grad.segment(off, model.horizon) = gb;
        off += model.horizon;
        grad.segment(off, model.seasonal.weight.size()) = (g.transpose() * xs).reshaped();
        off += model.seasonal.weight.size();
        grad.segment(off, model.horizon) = gb;
    }
    return {loss, std::move(grad)};
}

} // namespace

std::pair<double, Vecd> grad_mse(const LinearForecaster& model, const Matd& inputs,
                                 const Matd& targets) {
    return grad_core(model, inputs, nullptr, targets);
}

TrainConfig TrainConfig::normalized() const {
    TrainConfig c = *this;
    if (c.strategy == Strategy::OneEpoch) c.max_epochs = 1;
    return c;
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
    if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
    if (max_epochs < 1) throw std::invalid_argument("TrainConfig: max_epochs must be >= 1");
    if (strategy == Strategy::ES && patience < 1)
        throw std::invalid_argument("TrainConfig: patience must be >= 1 under ES");
    if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0))
        throw std::invalid_argument("TrainConfig: adam betas must lie in [0,1)");
    if (!(adam.eps > 0.0)) throw std::invalid_argument("TrainConfig: adam eps must be > 0");
}

std::pair<LinearForecaster, TrainReport> train(const LinearForecaster& model,
                                               const WindowDataset& train_windows,
                                               const WindowDataset* val_windows,
                                               const TrainConfig& config) {
    const TrainConfig cfg = config.normalized();
    cfg.validate();
    if (train_windows.size() < 1) throw std::invalid_argument("train: need at least 1 train window");
    if (train_windows.input_len() != model.input_len || train_windows.horizon() != model.horizon)
        throw std::invalid_argument("train: dataset shape does not match model");
    const bool has_val = val_windows != nullptr && val_windows->size() > 0;
    if (cfg.strategy == Strategy::ES && !has_val)
        throw std::invalid_argument("train: ES requires at least 1 validation window");

    LinearForecaster current = model;
    TrainReport report;
    Rng rng(static_cast<std::uint64_t>(cfg.seed));

    // dlinear: decompose each split once, not per batch
    const bool is_dlinear = model.kind == ModelKind::dlinear;
    Matd train_trend, val_trend_cache;
    if (is_dlinear) train_trend = [&] {
        Matd t(train_windows.size(), model.input_len);
        for (Index j = 0; j < train_windows.size(); ++j)
            t.row(j) = moving_average_trend(train_windows.inputs.row(j).transpose(), model.kernel)
                           .transpose();
        return t;
    }();

    auto val_loss = [&]() -> double {
        return loss_mse(forward_batch(current, val_windows->inputs), val_windows->targets);
    };

    Vecd params = flatten_params(current);
    Vecd adam_m = Vecd::Zero(params.size());
    Vecd adam_v = Vecd::Zero(params.size());
    long adam_t = 0;

    Vecd best_params = params;
    double best_val = std::numeric_limits<double>::infinity();
    Index fails = 0;

    const Index n = train_windows.size();
    for (Index epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        report.stopped_epoch = epoch;
        const auto perm = rng.permutation(n);
        double epoch_loss_sum = 0.0;
        Index batches = 0;
        for (Index start = 0; start < n; start += cfg.batch_size) {
            const Index bsz = std::min(cfg.batch_size, n - start);
            Matd bx(bsz, model.input_len), by(bsz, model.horizon);
            Matd bt;
            if (is_dlinear) bt.resize(bsz, model.input_len);
            for (Index k = 0; k < bsz; ++k) {
                const Index row = perm[static_cast<std::size_t>(start + k)];
                bx.row(k) = train_windows.inputs.row(row);
                by.row(k) = train_windows.targets.row(row);
                if (is_dlinear) bt.row(k) = train_trend.row(row);
            }
            auto [loss, grad] = grad_core(current, bx, is_dlinear ? &bt : nullptr, by);
            if (!std::isfinite(loss))
                throw DivergenceError(epoch, "training diverged (non-finite batch loss) at epoch " +
                                                 std::to_string(epoch));
            report.batch_losses.push_back(loss);
            epoch_loss_sum += loss;
            ++batches;

            if (cfg.optimizer == Optimizer::sgd) {
                params -= cfg.learning_rate * grad;
            } else {
                ++adam_t;
                adam_m = cfg.adam.beta1 * adam_m + (1.0 - cfg.adam.beta1) * grad;
                adam_v = cfg.adam.beta2 * adam_v.array() +
                         (1.0 - cfg.adam.beta2) * grad.array().square();
                const double m_corr = 1.0 - std::pow(cfg.adam.beta1, adam_t);
                const double v_corr = 1.0 - std::pow(cfg.adam.beta2, adam_t);
                params.array() -= cfg.learning_rate * (adam_m.array() / m_corr) /
                                  ((adam_v.array() / v_corr).sqrt() + cfg.adam.eps);
            }
            unflatten_params(current, params);
        }
        report.epoch_train_loss.push_back(epoch_loss_sum / static_cast<double>(batches));

        if (has_val) {
            const double vloss = val_loss();
            if (!std::isfinite(vloss))
                throw DivergenceError(epoch, "training diverged (non-finite validation loss) at epoch " +
                                                 std::to_string(epoch));
            report.epoch_val_loss.push_back(vloss);
            if (cfg.strategy == Strategy::ES) {
                if (vloss < best_val) {
                    best_val = vloss;
                    best_params = params;
                    fails = 0;
                } else if (++fails >= cfg.patience) {
                    break;
                }
            }
        }
    }

    if (cfg.strategy == Strategy::ES) {
        unflatten_params(current, best_params);
        report.best_val_loss = best_val;
    } else if (has_val) {
        report.best_val_loss = report.epoch_val_loss.back();
    }
    return {std::move(current), std::move(report)};
}

} // namespace bttf
