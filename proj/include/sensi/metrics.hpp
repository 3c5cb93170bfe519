#pragma once

#include <string>
#include <vector>

#include "sensi/dataset.hpp"
#include "sensi/model.hpp"

namespace sensi {

/// Root mean squared error over every (window, step) cell of a batch.
/// Throws ValidationError on shape mismatch or an empty batch.
double rmse(const std::vector<Eigen::VectorXd>& predicted,
            const std::vector<Eigen::VectorXd>& actual);

struct PredictionRow {
    std::string split;
    CountyId county;
    Date date;
    double actual = 0.0;
    double predicted = 0.0;
};

struct EvalReport {
    double rmse_train = 0.0;
    double rmse_val = 0.0;
    double rmse_test = 0.0;
    std::vector<PredictionRow> predictions;  // val and test cells, ordered
};

/// Scores a model on non-overlapping horizon blocks. Train blocks tile the
/// training range (history and forecast both inside it); the val and test
/// splits are scored with one window each per county, anchored on the last day
/// before the split so the forecast block is exactly the split. History for
/// those windows may reach back across the split boundary.
EvalReport evaluate(const ForecastModel& model, const PanelDataset& panel,
                    const SplitConfig& splits, const WindowConfig& window);

/// Forecast that repeats the last observed value for every horizon step.
/// Reference point for "does the trained model beat carrying forward".
double persistence_rmse(const std::vector<WindowSample>& samples);

}  // namespace sensi
