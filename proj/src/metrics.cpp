#include "sensi/metrics.hpp"

#include <cmath>
#include <string>

#include "sensi/errors.hpp"
#include "sensi/kahan.hpp"

namespace sensi {

double rmse(const std::vector<Eigen::VectorXd>& predicted,
            const std::vector<Eigen::VectorXd>& actual) {
    if (predicted.size() != actual.size())
        throw ValidationError("rmse: prediction and actual batch sizes differ");
    KahanSum sq;
    long cells = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i].size() != actual[i].size())
            throw ValidationError("rmse: vector length mismatch at batch entry " + std::to_string(i));
        for (long j = 0; j < predicted[i].size(); ++j) {
            double d = predicted[i][j] - actual[i][j];
            sq.add(d * d);
        }
        cells += predicted[i].size();
    }
    if (cells == 0) throw ValidationError("rmse: empty batch");
    return std::sqrt(sq.value() / static_cast<double>(cells));
}

namespace {

struct SplitScore {
    double rmse = 0.0;
    std::vector<PredictionRow> rows;
};

SplitScore score_windows(const ForecastModel& model, const PanelDataset& panel,
                         const std::vector<WindowSample>& samples, const std::string& split_name,
                         bool keep_rows) {
    std::vector<Eigen::VectorXd> preds;
    std::vector<Eigen::VectorXd> actuals;
    preds.reserve(samples.size());
    actuals.reserve(samples.size());
    SplitScore out;
    for (const WindowSample& s : samples) {
        Eigen::VectorXd p = model.predict(s);
        if (keep_rows) {
            for (long j = 0; j < p.size(); ++j) {
                PredictionRow row;
                row.split = split_name;
                row.county = s.county;
                row.date = panel.dates[static_cast<std::size_t>(s.anchor) + 1 + static_cast<std::size_t>(j)];
                row.actual = s.future_target[j];
                row.predicted = p[j];
                out.rows.push_back(row);
            }
        }
        preds.push_back(std::move(p));
        actuals.push_back(s.future_target);
    }
    out.rmse = rmse(preds, actuals);
    return out;
}

}  // namespace

EvalReport evaluate(const ForecastModel& model, const PanelDataset& panel,
                    const SplitConfig& splits, const WindowConfig& window) {
    splits.validate();
    window.validate();
    const Eigen::Index k = window.lag_days;
    const Eigen::Index tau = window.horizon_days;
    auto day = [&](Date d, const char* what) {
        Eigen::Index i = panel.date_index(d);
        if (i < 0)
            throw ValidationError(std::string(what) + " date " + format_date(d) +
                                  " is outside the panel");
        return i;
    };
    const Eigen::Index train_start = day(splits.train_start, "train start");
    const Eigen::Index train_end = day(splits.train_end, "train end");
    const Eigen::Index val_start = day(splits.val_start, "val start");
    const Eigen::Index val_end = day(splits.val_end, "val end");
    const Eigen::Index test_start = day(splits.test_start, "test start");
    const Eigen::Index test_end = day(splits.test_end, "test end");

    EvalReport report;
    const Eigen::Index num_days = panel.num_days();
    {
        std::vector<Eigen::Index> anchors = tile_anchors(num_days, window, train_start + k, train_end);
        auto samples = windows_at_anchors(panel, window, anchors);
        report.rmse_train = score_windows(model, panel, samples, "train", false).rmse;
    }
    auto eval_split = [&](const std::string& name, Eigen::Index split_start, Eigen::Index split_end) {
        if (split_end - split_start + 1 < tau)
            throw ValidationError(name + " split is shorter than the forecast horizon");
        Eigen::Index anchor = split_start - 1;
        if (anchor < k - 1)
            throw ValidationError(name + " split starts too early for " + std::to_string(k) +
                                  " days of history");
        auto samples = windows_at_anchors(panel, window, {anchor});
        return score_windows(model, panel, samples, name, true);
    };
    SplitScore val = eval_split("val", val_start, val_end);
    SplitScore test = eval_split("test", test_start, test_end);
    report.rmse_val = val.rmse;
    report.rmse_test = test.rmse;
    report.predictions = std::move(val.rows);
    report.predictions.insert(report.predictions.end(), test.rows.begin(), test.rows.end());
    return report;
}

double persistence_rmse(const std::vector<WindowSample>& samples) {
    std::vector<Eigen::VectorXd> preds;
    std::vector<Eigen::VectorXd> actuals;
    preds.reserve(samples.size());
    actuals.reserve(samples.size());
    for (const WindowSample& s : samples) {
        if (s.past_target.size() == 0) throw ValidationError("persistence needs at least one past value");
        preds.push_back(Eigen::VectorXd::Constant(s.future_target.size(),
                                                  s.past_target[s.past_target.size() - 1]));
        actuals.push_back(s.future_target);
    }
    return rmse(preds, actuals);
}

}  // namespace sensi
