#include "sensi/dataset.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "sensi/errors.hpp"
#include "sensi/kahan.hpp"

namespace sensi {

SplitConfig SplitConfig::defaults() {
    SplitConfig cfg;
    cfg.train_start = parse_date("2020-03-01");
    cfg.train_end = parse_date("2021-11-27");
    cfg.val_start = parse_date("2021-11-28");
    cfg.val_end = parse_date("2021-12-12");
    cfg.test_start = parse_date("2021-12-13");
    cfg.test_end = parse_date("2021-12-27");
    return cfg;
}

void SplitConfig::validate() const {
    auto check_range = [](Date a, Date b, const char* name) {
        if (b < a) throw ValidationError(std::string(name) + " split ends before it starts");
    };
    check_range(train_start, train_end, "train");
    check_range(val_start, val_end, "val");
    check_range(test_start, test_end, "test");
    if (val_start != train_end + std::chrono::days{1})
        throw ValidationError("val split must start the day after the train split ends");
    if (test_start != val_end + std::chrono::days{1})
        throw ValidationError("test split must start the day after the val split ends");
}

void WindowConfig::validate() const {
    if (lag_days < 1) throw ValidationError("lag window must be at least 1 day");
    if (horizon_days < 1) throw ValidationError("forecast horizon must be at least 1 day");
}

PanelSplits split_panel(const PanelDataset& panel, const SplitConfig& cfg) {
    cfg.validate();
    auto index_of_date = [&](Date d, const char* what) {
        const Eigen::Index i = panel.date_index(d);
        if (i < 0)
            throw ValidationError(std::string(what) + " date " + format_date(d) +
                                  " lies outside the panel");
        return i;
    };
    PanelSplits out;
    out.train = panel.slice_days(index_of_date(cfg.train_start, "train start"),
                                 index_of_date(cfg.train_end, "train end"));
    out.val = panel.slice_days(index_of_date(cfg.val_start, "val start"),
                               index_of_date(cfg.val_end, "val end"));
    out.test = panel.slice_days(index_of_date(cfg.test_start, "test start"),
                                index_of_date(cfg.test_end, "test end"));
    return out;
}

double sin_weekly(Date d) {
    const int dow = day_of_week_monday0(d);
    return std::sin(2.0 * std::numbers::pi * static_cast<double>(dow) / 7.0);
}

namespace {

Eigen::Index count_channels(const PanelDataset& panel, ChannelRole role) {
    Eigen::Index n = 0;
    for (const auto& ch : panel.dynamic)
        if (ch.role == role) ++n;
    return n;
}

WindowSample extract_window(const PanelDataset& panel, const WindowConfig& cfg,
                            Eigen::Index county, Eigen::Index anchor) {
    const Eigen::Index k = cfg.lag_days;
    const Eigen::Index tau = cfg.horizon_days;
    WindowSample s;
    s.county = panel.counties[static_cast<std::size_t>(county)];
    s.county_index = county;
    s.anchor = anchor;
    s.anchor_date = panel.dates[static_cast<std::size_t>(anchor)];
    s.past_target = panel.target.row(county).segment(anchor - k + 1, k).transpose();
    s.future_target = panel.target.row(county).segment(anchor + 1, tau).transpose();

    s.past_dynamic.resize(k, count_channels(panel, ChannelRole::past_observed));
    s.known_future.resize(k + tau, count_channels(panel, ChannelRole::known_future));
    Eigen::Index past_col = 0;
    Eigen::Index known_col = 0;
    for (const auto& ch : panel.dynamic) {
        if (ch.role == ChannelRole::past_observed) {
            s.past_dynamic.col(past_col++) =
                ch.values.row(county).segment(anchor - k + 1, k).transpose();
        } else {
            s.known_future.col(known_col++) =
                ch.values.row(county).segment(anchor - k + 1, k + tau).transpose();
        }
    }
    s.static_features = panel.static_features.row(county).transpose();
    return s;
}

}  // namespace

std::vector<WindowSample> make_windows(const PanelDataset& panel, const WindowConfig& cfg) {
    cfg.validate();
    const Eigen::Index k = cfg.lag_days;
    const Eigen::Index tau = cfg.horizon_days;
    const Eigen::Index t_len = panel.num_days();
    if (t_len < k + tau) {
        std::ostringstream msg;
        msg << "panel has " << t_len << " days but a window needs k+tau = " << (k + tau);
        throw ValidationError(msg.str());
    }
    std::vector<WindowSample> out;
    out.reserve(static_cast<std::size_t>(panel.num_counties() * (t_len - k - tau + 1)));
    for (Eigen::Index c = 0; c < panel.num_counties(); ++c)
        for (Eigen::Index t = k - 1; t <= t_len - tau - 1; ++t)
            out.push_back(extract_window(panel, cfg, c, t));
    return out;
}

std::vector<Eigen::Index> tile_anchors(Eigen::Index num_days, const WindowConfig& cfg,
                                       Eigen::Index first_forecast, Eigen::Index last_forecast) {
    cfg.validate();
    const Eigen::Index k = cfg.lag_days;
    const Eigen::Index tau = cfg.horizon_days;
    if (first_forecast < k)
        throw ValidationError("tiling needs k days of history before the first forecast day");
    if (last_forecast >= num_days) throw ValidationError("tiling extends past the panel");
    std::vector<Eigen::Index> anchors;
    for (Eigen::Index t = first_forecast - 1; t + tau <= last_forecast; t += tau)
        anchors.push_back(t);
    if (anchors.empty())
        throw ValidationError("tiling range shorter than one forecast horizon");
    return anchors;
}

std::vector<WindowSample> windows_at_anchors(const PanelDataset& panel, const WindowConfig& cfg,
                                             const std::vector<Eigen::Index>& anchors) {
    std::vector<WindowSample> out;
    out.reserve(static_cast<std::size_t>(panel.num_counties()) * anchors.size());
    for (Eigen::Index c = 0; c < panel.num_counties(); ++c)
        for (Eigen::Index t : anchors) out.push_back(extract_window(panel, cfg, c, t));
    return out;
}

namespace {

Scaler::ChannelStats fit_stats(const std::string& name, ChannelRole role,
                               const Eigen::MatrixXd& values, std::vector<std::string>& warnings) {
    KahanSum sum;
    for (Eigen::Index c = 0; c < values.rows(); ++c)
        for (Eigen::Index t = 0; t < values.cols(); ++t) sum += values(c, t);
    const double n = static_cast<double>(values.size());
    const double mean = sum.value() / n;
    KahanSum sq;
    for (Eigen::Index c = 0; c < values.rows(); ++c)
        for (Eigen::Index t = 0; t < values.cols(); ++t) {
            const double d = values(c, t) - mean;
            sq += d * d;
        }
    double stdev = std::sqrt(sq.value() / n);
    if (stdev < 1e-8) {
        warnings.push_back("channel '" + name + "' has near-zero variance; scale floored at 1e-8");
        stdev = 1e-8;
    }
    return {name, role, mean, stdev};
}

}  // namespace

Scaler Scaler::fit(const PanelDataset& train) {
    Scaler s;
    s.target_ = fit_stats("target", ChannelRole::past_observed, train.target, s.warnings_);
    for (const auto& ch : train.dynamic)
        s.dynamic_.push_back(fit_stats(ch.name, ch.role, ch.values, s.warnings_));
    return s;
}

Scaler Scaler::from_stats(ChannelStats target, std::vector<ChannelStats> dynamic) {
    Scaler s;
    s.target_ = std::move(target);
    s.dynamic_ = std::move(dynamic);
    if (s.target_.stdev <= 0.0) throw ValidationError("scaler target scale must be positive");
    for (const auto& ch : s.dynamic_)
        if (ch.stdev <= 0.0)
            throw ValidationError("scaler scale must be positive for channel '" + ch.name + "'");
    return s;
}

PanelDataset Scaler::transform(const PanelDataset& panel) const {
    if (panel.dynamic.size() != dynamic_.size())
        throw ValidationError("scaler channel count does not match panel");
    PanelDataset out = panel;
    out.target = (panel.target.array() - target_.mean) / target_.stdev;
    for (std::size_t i = 0; i < dynamic_.size(); ++i) {
        if (panel.dynamic[i].name != dynamic_[i].name)
            throw ValidationError("scaler channel order does not match panel: expected '" +
                                  dynamic_[i].name + "', found '" + panel.dynamic[i].name + "'");
        out.dynamic[i].values =
            (panel.dynamic[i].values.array() - dynamic_[i].mean) / dynamic_[i].stdev;
    }
    return out;
}

WindowSample Scaler::transform(const WindowSample& sample) const {
    WindowSample out = sample;
    out.past_target = (sample.past_target.array() - target_.mean) / target_.stdev;
    out.future_target = (sample.future_target.array() - target_.mean) / target_.stdev;
    Eigen::Index past_col = 0;
    Eigen::Index known_col = 0;
    for (const auto& ch : dynamic_) {
        if (ch.role == ChannelRole::past_observed) {
            if (past_col >= sample.past_dynamic.cols())
                throw ValidationError("sample has fewer past channels than the scaler");
            out.past_dynamic.col(past_col) =
                (sample.past_dynamic.col(past_col).array() - ch.mean) / ch.stdev;
            ++past_col;
        } else {
            if (known_col >= sample.known_future.cols())
                throw ValidationError("sample has fewer known channels than the scaler");
            out.known_future.col(known_col) =
                (sample.known_future.col(known_col).array() - ch.mean) / ch.stdev;
            ++known_col;
        }
    }
    if (past_col != sample.past_dynamic.cols() || known_col != sample.known_future.cols())
        throw ValidationError("sample has more dynamic channels than the scaler");
    return out;
}

Eigen::VectorXd Scaler::inverse_target(const Eigen::VectorXd& y_std) const {
    return y_std.array() * target_.stdev + target_.mean;
}

}  // namespace sensi
