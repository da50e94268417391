#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "bttf/dense.hpp"
#include "bttf/errors.hpp"
#include "bttf/timeseries.hpp"

namespace bttf {

enum class ModelKind { plain, dlinear };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

/// One affine map y = weight * x + bias.
struct LinearMap {
    Matd weight;  // horizon x input_len
    Vecd bias;    // horizon
};

/// Direct multi-step linear forecaster. plain applies a single affine map
/// to the input window; dlinear splits the window into a moving-average
/// trend and a seasonal remainder and applies one map per branch.
struct LinearForecaster {
    ModelKind kind = ModelKind::plain;
    Index input_len = 0;
    Index horizon = 0;
    Index kernel = 1;  // moving-average width, dlinear only (1 for plain)
    std::int64_t seed = 0;

    LinearMap direct;    // plain
    LinearMap trend;     // dlinear
    LinearMap seasonal;  // dlinear

    Index param_count() const;
};

/// Seeded init: weights uniform on [-1/input_len, +1/input_len], biases
/// zero. Deterministic per seed. kernel must be odd for dlinear and is
/// normalized to 1 for plain.
LinearForecaster init_model(ModelKind kind, Index input_len, Index horizon, Index kernel,
                            std::int64_t seed);

/// Moving-average trend (replicate edge padding) and seasonal remainder;
/// trend + seasonal reconstructs the window exactly.
std::pair<Vecd, Vecd> decompose(const Vecd& window, Index kernel);

Vecd forward(const LinearForecaster& model, const Vecd& input);

/// Row-wise forward over a window matrix (rows are inputs).
Matd forward_batch(const LinearForecaster& model, const Matd& inputs);

/// Mean squared error over all entries of equally shaped matrices.
double loss_mse(const Matd& pred, const Matd& target);

/// Parameters flattened in a fixed order (per-map weight coefficients in
/// storage order, then bias; plain uses the direct map, dlinear trend
/// then seasonal). Serialization and the optimizer share this layout.
Vecd flatten_params(const LinearForecaster& model);
void unflatten_params(LinearForecaster& model, const Vecd& flat);

/// Loss and exact analytic gradient of the batch MSE with respect to
/// every parameter, in flatten_params order.
std::pair<double, Vecd> grad_mse(const LinearForecaster& model, const Matd& inputs,
                                 const Matd& targets);

/// ES = early stopping on validation loss, OneEpoch = exactly one pass
/// (reported as "1E").
enum class Strategy { ES, OneEpoch };

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);

enum class Optimizer { sgd, adam };

std::string to_string(Optimizer o);
Optimizer optimizer_from_string(const std::string& s);

struct AdamParams {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct TrainConfig {
    double learning_rate = 5e-3;
    Index batch_size = 32;
    Index max_epochs = 20;
    Strategy strategy = Strategy::ES;
    Index patience = 3;  // ES only
    std::int64_t seed = 0;
    Optimizer optimizer = Optimizer::adam;
    AdamParams adam;

    /// OneEpoch forces max_epochs = 1.
    TrainConfig normalized() const;
    void validate() const;
};

struct TrainReport {
    std::vector<double> epoch_train_loss;  // mean batch loss per epoch
    std::vector<double> epoch_val_loss;
    std::vector<double> batch_losses;  // pre-update loss of every batch, in order
    Index stopped_epoch = 0;           // 1-based epoch at which training stopped
    double best_val_loss = std::numeric_limits<double>::quiet_NaN();
};

/// Mini-batch gradient descent with a seeded per-epoch shuffle. ES keeps
/// the best-validation snapshot and stops after `patience` consecutive
/// epochs without improvement. Throws DivergenceError on non-finite loss.
std::pair<LinearForecaster, TrainReport> train(const LinearForecaster& model,
                                               const WindowDataset& train_windows,
                                               const WindowDataset* val_windows,
                                               const TrainConfig& config);

} // namespace bttf
