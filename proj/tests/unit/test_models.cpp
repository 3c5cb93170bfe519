#include <doctest.h>

#include <cmath>

#include "../support/synthetic.hpp"
#include "sensi/errors.hpp"
#include "sensi/metrics.hpp"
#include "sensi/model.hpp"

using namespace sensi;

namespace {

WindowSample sample_of(const PanelDataset& panel, const WindowConfig& w, int which = 0) {
    auto windows = make_windows(panel, w);
    return windows[static_cast<size_t>(which)];
}

}  // namespace

TEST_CASE("LinearBaseline emits its bias for zero weights") {
    WindowConfig w;
    auto panel = testsupport::random_panel(2, 40, 1, 3);
    LinearBaseline model(w, 1, 1);
    model.bias = 5.0;
    auto yhat = model.predict(sample_of(panel, w));
    REQUIRE(yhat.size() == 15);
    for (int j = 0; j < 15; ++j) CHECK(yhat[j] == 5.0);
}

TEST_CASE("LinearBaseline static term") {
    WindowConfig w;
    auto panel = testsupport::random_panel(1, 28, 1, 3);
    panel.static_features(0, 0) = 0.3;
    LinearBaseline model(w, 1, 1);
    model.w_static[0] = 2.0;
    auto yhat = model.predict(sample_of(panel, w));
    for (int j = 0; j < 15; ++j) CHECK(yhat[j] == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("LinearBaseline combines all terms") {
    WindowConfig w;
    w.lag_days = 2;
    w.horizon_days = 3;
    auto panel = testsupport::random_panel(1, 10, 1, 3);
    auto s = sample_of(panel, w);
    LinearBaseline model(w, 1, 1);
    model.bias = 1.0;
    model.w_static[0] = 2.0;
    model.w_dynamic[0] = 3.0;
    model.w_lag << 0.5, 0.25;
    double expected = 1.0 + 2.0 * s.static_features[0] + 3.0 * s.past_dynamic.col(0).mean() +
                      0.5 * s.past_target[0] + 0.25 * s.past_target[1];
    auto yhat = model.predict(s);
    for (int j = 0; j < 3; ++j) CHECK(yhat[j] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("require_sample_shape flags mismatches") {
    WindowConfig w;
    auto panel = testsupport::random_panel(1, 28, 2, 3);
    auto s = sample_of(panel, w);
    CHECK_NOTHROW(require_sample_shape(s, w, 2, 1, 1));
    CHECK_THROWS_AS(require_sample_shape(s, w, 1, 1, 1), ValidationError);
    CHECK_THROWS_AS(require_sample_shape(s, w, 2, 2, 1), ValidationError);
    auto bad = s;
    bad.past_target.resize(5);
    CHECK_THROWS_AS(require_sample_shape(bad, w, 2, 1, 1), ValidationError);
}

TEST_CASE("rmse on known values") {
    Eigen::VectorXd a(2), b(2);
    a << 1, 2;
    b << 3, 2;
    CHECK(rmse({a}, {b}) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

    Eigen::VectorXd c(3), d(3);
    c << 1, 1, 1;
    d << 1, 1, 1;
    CHECK(rmse({c}, {d}) == 0.0);

    // Pooled over vectors, not averaged per vector.
    Eigen::VectorXd e(1), f(1), g(1), h(1);
    e << 0;
    f << 2;
    g << 0;
    h << 0;
    CHECK(rmse({e, g}, {f, h}) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

    CHECK_THROWS_AS(rmse({a}, {c}), ValidationError);
    CHECK_THROWS_AS(rmse({}, {}), ValidationError);
}

TEST_CASE("persistence baseline repeats the anchor value") {
    WindowConfig w;
    auto panel = testsupport::random_panel(2, 40, 1, 13);
    auto windows = make_windows(panel, w);
    double manual;
    {
        double se = 0.0;
        long n = 0;
        for (auto& s : windows) {
            double anchor = s.past_target[s.past_target.size() - 1];
            for (int j = 0; j < w.horizon_days; ++j) {
                double diff = anchor - s.future_target[j];
                se += diff * diff;
                ++n;
            }
        }
        manual = std::sqrt(se / static_cast<double>(n));
    }
    CHECK(persistence_rmse(windows) == doctest::Approx(manual).epsilon(1e-12));
}
