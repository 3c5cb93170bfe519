#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "sensi/date.hpp"
#include "sensi/panel.hpp"

namespace sensi {

/// Contiguous, non-overlapping train/val/test date ranges.
struct SplitConfig {
    Date train_start, train_end;
    Date val_start, val_end;
    Date test_start, test_end;

    /// March 1, 2020 .. Nov 27, 2021 / Nov 28 .. Dec 12, 2021 / Dec 13 .. Dec 27, 2021.
    static SplitConfig defaults();

    /// Throws ValidationError unless the three ranges are ascending, contiguous
    /// (each split starts the day after the previous ends), and non-empty.
    void validate() const;
};

struct WindowConfig {
    int lag_days = 13;      // k
    int horizon_days = 15;  // tau

    void validate() const;
};

/// One forecasting unit. The anchor t is the last observed day: the past block
/// covers days t-k+1..t, the future block t+1..t+tau, and the known-future
/// block spans both.
struct WindowSample {
    CountyId county;
    Eigen::Index county_index = 0;
    Eigen::Index anchor = 0;  // day index within the source panel
    Date anchor_date{};
    Eigen::VectorXd past_target;      // k
    Eigen::MatrixXd past_dynamic;     // k x D_past
    Eigen::MatrixXd known_future;     // (k+tau) x D_known
    Eigen::VectorXd static_features;  // K
    Eigen::VectorXd future_target;    // tau
};

/// Splits a panel on the configured dates. All six dates must lie inside the
/// panel. Day counts follow directly from the date arithmetic.
struct PanelSplits {
    PanelDataset train, val, test;
};
PanelSplits split_panel(const PanelDataset& panel, const SplitConfig& cfg);

/// sin(2*pi*dow/7) with Monday = 0. Period exactly 7 days.
double sin_weekly(Date d);

/// Every in-panel window, ordered (county ascending, anchor ascending).
/// Anchors run k-1 .. T-tau-1; count per county is T-k-tau+1.
/// Throws ValidationError when T < k+tau.
std::vector<WindowSample> make_windows(const PanelDataset& panel, const WindowConfig& cfg);

/// Anchors for non-overlapping horizon tiles whose forecast days lie inside
/// [first_forecast, last_forecast]. The first tile forecasts exactly
/// first_forecast..first_forecast+tau-1; tiles stop when a full horizon no
/// longer fits. Anchors need k-1 days of history inside the panel.
std::vector<Eigen::Index> tile_anchors(Eigen::Index num_days, const WindowConfig& cfg,
                                       Eigen::Index first_forecast, Eigen::Index last_forecast);

/// Windows at the given anchors (see tile_anchors).
std::vector<WindowSample> windows_at_anchors(const PanelDataset& panel, const WindowConfig& cfg,
                                             const std::vector<Eigen::Index>& anchors);

/// Per-channel standardization statistics fitted on a training panel.
/// Static features pass through untouched.
class Scaler {
public:
    struct ChannelStats {
        std::string name;
        ChannelRole role = ChannelRole::past_observed;
        double mean = 0.0;
        double stdev = 1.0;  // floored at 1e-8
    };

    static Scaler fit(const PanelDataset& train);

    /// For assembling a scaler from stored statistics (snapshots).
    static Scaler from_stats(ChannelStats target, std::vector<ChannelStats> dynamic);

    /// Standardizes target and every dynamic channel; leaves statics alone.
    PanelDataset transform(const PanelDataset& panel) const;

    /// Standardized copy of a sample: target blocks and dynamic blocks are
    /// scaled by their channel stats, statics pass through.
    WindowSample transform(const WindowSample& sample) const;

    double transform_target(double y) const { return (y - target_.mean) / target_.stdev; }
    double inverse_target(double y_std) const { return y_std * target_.stdev + target_.mean; }
    Eigen::VectorXd inverse_target(const Eigen::VectorXd& y_std) const;

    const ChannelStats& target_stats() const { return target_; }
    const std::vector<ChannelStats>& dynamic_stats() const { return dynamic_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

private:
    ChannelStats target_;
    std::vector<ChannelStats> dynamic_;  // panel channel order
    std::vector<std::string> warnings_;
};

}  // namespace sensi
