#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sensi/dataset.hpp"
#include "sensi/model.hpp"

namespace sensi {

/// Named bag of dense parameter tensors with a stable order and a flat scalar
/// index, so optimizer state, serialization, and finite-difference probes all
/// address the same layout.
class ParamSet {
public:
    Eigen::MatrixXd& add(const std::string& name, long rows, long cols);
    Eigen::MatrixXd& at(const std::string& name);
    const Eigen::MatrixXd& at(const std::string& name) const;
    bool has(const std::string& name) const;

    std::size_t tensor_count() const { return entries_.size(); }
    const std::string& name_of(std::size_t tensor) const { return entries_[tensor].name; }
    Eigen::MatrixXd& tensor(std::size_t i) { return entries_[i].value; }
    const Eigen::MatrixXd& tensor(std::size_t i) const { return entries_[i].value; }

    std::size_t total_size() const;
    double scalar(std::size_t flat) const;
    void set_scalar(std::size_t flat, double value);
    /// Human-readable address of one scalar, e.g. "enc.Wz[3,7]".
    std::string describe(std::size_t flat) const;

    ParamSet zeros_like() const;
    void set_zero();
    bool same_layout(const ParamSet& other) const;

private:
    struct Entry {
        std::string name;
        Eigen::MatrixXd value;
    };
    std::vector<Entry> entries_;
    std::size_t locate(std::size_t flat, std::size_t* offset) const;
};

struct RecurrentConfig {
    WindowConfig window;
    int static_dim = 0;
    int past_dim = 0;
    int known_dim = 0;
    int hidden = 64;
    void validate() const;
};

/// Sequence-to-sequence forecaster. A static context vector conditions the
/// input projections and initial hidden states of a GRU encoder over the past
/// window and a GRU decoder over the known-future inputs; a gated output head
/// plus a skip connection from the last observed value produces each horizon
/// step. All math runs in standardized space; predict() converts back to case
/// units through the attached scaler.
class RecurrentForecaster final : public ForecastModel {
public:
    RecurrentForecaster(RecurrentConfig cfg, std::uint64_t seed);
    RecurrentForecaster(RecurrentConfig cfg, ParamSet params);

    Eigen::VectorXd predict(const WindowSample& sample) const override;
    WindowConfig window_config() const override { return cfg_.window; }

    const RecurrentConfig& config() const { return cfg_; }
    ParamSet& params() { return params_; }
    const ParamSet& params() const { return params_; }

    void set_scaler(Scaler scaler);
    const Scaler& scaler() const;
    bool has_scaler() const { return scaler_.has_value(); }

    /// Forecast in standardized units for an already-standardized sample.
    Eigen::VectorXd forward_std(const WindowSample& std_sample) const;
    /// Mean squared error over the horizon, standardized units.
    double loss_std(const WindowSample& std_sample) const;
    /// Adds this sample's parameter gradient into grad and returns its loss.
    double loss_and_gradient(const WindowSample& std_sample, ParamSet& grad) const;

private:
    RecurrentConfig cfg_;
    ParamSet params_;
    std::optional<Scaler> scaler_;
    static ParamSet make_layout(const RecurrentConfig& cfg);
};

struct TrainConfig {
    int epochs = 20;
    int batch_size = 256;
    double learning_rate = 1e-3;
    int patience = 5;  // epochs without val improvement before stopping; <= 0 disables
    std::uint64_t seed = 42;
    void validate() const;
};

struct EpochStats {
    int epoch = 0;
    double train_loss = 0.0;     // mean MSE over training windows, standardized units
    double val_rmse = 0.0;       // standardized units
    double best_val_rmse = 0.0;  // running minimum, non-increasing down the history
};

struct TrainResult {
    std::vector<EpochStats> history;
    int best_epoch = -1;
    double best_val_rmse = std::numeric_limits<double>::quiet_NaN();
};

/// Minibatch Adam on standardized windows (the model's scaler must be set;
/// raw samples are standardized here). Shuffling, init, and accumulation are
/// all deterministic for a given seed. The model is left holding the
/// parameters of its best validation epoch. Throws Error if the loss goes
/// non-finite.
TrainResult train_model(RecurrentForecaster& model, const std::vector<WindowSample>& train_samples,
                        const std::vector<WindowSample>& val_samples, const TrainConfig& cfg);

struct GradCheckEntry {
    std::string param;
    double analytic = 0.0;
    double numeric = 0.0;
    double rel_error = 0.0;
};

struct GradCheckReport {
    bool passed = false;
    double max_rel_error = 0.0;
    std::vector<GradCheckEntry> entries;
};

/// Backprop gradient of loss_std for one standardized sample.
ParamSet analytic_gradient(const RecurrentForecaster& model, const WindowSample& std_sample);

/// Central finite difference of loss_std at the sampled flat indices; other
/// entries stay zero. Restores the model's parameters before returning.
ParamSet fd_gradient(RecurrentForecaster& model, const WindowSample& std_sample,
                     const std::vector<std::size_t>& indices, double step);

GradCheckReport compare_gradients(const ParamSet& analytic, const ParamSet& numeric,
                                  const std::vector<std::size_t>& indices, double tolerance);

/// End-to-end check on up to num_params randomly chosen scalars
/// (num_params <= 0 checks every parameter).
GradCheckReport gradient_check(RecurrentForecaster& model, const WindowSample& std_sample,
                               int num_params, double tolerance, double step, std::uint64_t seed);

}  // namespace sensi
