#include "sensi/model.hpp"

#include <string>

#include "sensi/errors.hpp"

namespace sensi {

void require_sample_shape(const WindowSample& sample, const WindowConfig& window, int static_dim,
                          int past_dim, int known_dim) {
    const int k = window.lag_days;
    const int tau = window.horizon_days;
    auto fail = [&](const std::string& what, long got, long want) {
        throw ValidationError("window sample shape mismatch: " + what + " has " +
                              std::to_string(got) + " entries, expected " + std::to_string(want));
    };
    if (sample.past_target.size() != k) fail("past_target", sample.past_target.size(), k);
    if (sample.past_dynamic.rows() != k || sample.past_dynamic.cols() != past_dim)
        fail("past_dynamic", sample.past_dynamic.size(), static_cast<long>(k) * past_dim);
    if (sample.known_future.rows() != k + tau || sample.known_future.cols() != known_dim)
        fail("known_future", sample.known_future.size(), static_cast<long>(k + tau) * known_dim);
    if (sample.static_features.size() != static_dim)
        fail("static_features", sample.static_features.size(), static_dim);
    if (sample.future_target.size() != tau) fail("future_target", sample.future_target.size(), tau);
}

LinearBaseline::LinearBaseline(WindowConfig window, int static_dim, int past_dim)
    : w_static(Eigen::VectorXd::Zero(static_dim)),
      w_dynamic(Eigen::VectorXd::Zero(past_dim)),
      w_lag(Eigen::VectorXd::Zero(window.lag_days)),
      window_(window) {
    window_.validate();
    if (static_dim < 0 || past_dim < 0) throw ValidationError("negative feature dimension");
}

Eigen::VectorXd LinearBaseline::predict(const WindowSample& sample) const {
    require_sample_shape(sample, window_, static_cast<int>(w_static.size()),
                         static_cast<int>(w_dynamic.size()), static_cast<int>(sample.known_future.cols()));
    double value = bias + w_static.dot(sample.static_features) + w_lag.dot(sample.past_target);
    if (w_dynamic.size() > 0) {
        Eigen::VectorXd means = sample.past_dynamic.colwise().mean();
        value += w_dynamic.dot(means);
    }
    return Eigen::VectorXd::Constant(window_.horizon_days, value);
}

}  // namespace sensi
