#pragma once

#include <Eigen/Dense>

#include "sensi/dataset.hpp"

namespace sensi {

/// Multi-horizon forecaster: maps one window sample to a length-tau forecast
/// in case units. Implementations are pure at inference; repeated calls on the
/// same sample agree bit-exactly.
class ForecastModel {
public:
    virtual ~ForecastModel() = default;

    /// Length-tau forecast in case units. Raw values may be negative; clamping
    /// is left to report writers. Throws ValidationError on shape mismatch.
    virtual Eigen::VectorXd predict(const WindowSample& sample) const = 0;

    virtual WindowConfig window_config() const = 0;
};

/// Checks a sample against expected block shapes, throwing ValidationError
/// with a description of the first mismatch.
void require_sample_shape(const WindowSample& sample, const WindowConfig& window, int static_dim,
                          int past_dim, int known_dim);

/// Flat forecaster, exactly linear in every input: the same scalar
///   bias + w_static . s + w_dynamic . mean(past_dynamic) + w_lag . past_target
/// is emitted for every horizon step. Its Morris sensitivity to static feature
/// i has the closed form w_static[i] * sigma(x_i), which makes it the oracle
/// for the sensitivity engine.
class LinearBaseline final : public ForecastModel {
public:
    LinearBaseline(WindowConfig window, int static_dim, int past_dim);

    Eigen::VectorXd predict(const WindowSample& sample) const override;
    WindowConfig window_config() const override { return window_; }

    Eigen::VectorXd w_static;   // K
    Eigen::VectorXd w_dynamic;  // D_past, applied to the window mean per channel
    Eigen::VectorXd w_lag;      // k
    double bias = 0.0;

private:
    WindowConfig window_;
};

}  // namespace sensi
