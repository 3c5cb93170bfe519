#include "sensi/morris.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sensi/errors.hpp"
#include "sensi/kahan.hpp"

namespace sensi {

std::vector<double> default_deltas() {
    std::vector<double> out;
    out.reserve(20);
    for (int s = -10; s <= 10; ++s) {
        if (s == 0) continue;
        out.push_back(static_cast<double>(s) / 1000.0);
    }
    return out;
}

PanelDataset perturb_static(const PanelDataset& panel, Eigen::Index feature, double delta,
                            long* out_of_range) {
    if (feature < 0 || feature >= panel.num_static())
        throw ValidationError("static feature index " + std::to_string(feature) +
                              " out of range (panel has " + std::to_string(panel.num_static()) +
                              ")");
    PanelDataset out = panel;
    out.static_features.col(feature).array() += delta;
    if (out_of_range) {
        long count = 0;
        for (Eigen::Index c = 0; c < out.num_counties(); ++c) {
            double v = out.static_features(c, feature);
            if (v < 0.0 || v > 1.0) ++count;
        }
        *out_of_range = count;
    }
    return out;
}

double static_sigma(const PanelDataset& panel, Eigen::Index feature) {
    if (feature < 0 || feature >= panel.num_static())
        throw ValidationError("static feature index out of range");
    const Eigen::Index n = panel.num_counties();
    if (n == 0) throw ValidationError("panel has no counties");
    KahanSum total;
    for (Eigen::Index c = 0; c < n; ++c) total.add(panel.static_features(c, feature));
    double mean = total.value() / static_cast<double>(n);
    KahanSum sq;
    for (Eigen::Index c = 0; c < n; ++c) {
        double d = panel.static_features(c, feature) - mean;
        sq.add(d * d);
    }
    return std::sqrt(sq.value() / static_cast<double>(n));
}

namespace {

std::vector<Eigen::VectorXd> forecast_tiles(const ForecastModel& model, const PanelDataset& panel,
                                            const std::vector<WindowSample>& samples) {
    std::vector<Eigen::VectorXd> out;
    out.reserve(samples.size());
    for (const WindowSample& s : samples) {
        Eigen::VectorXd y = model.predict(s);
        if (!y.allFinite())
            throw Error("model produced a non-finite forecast for county " + s.county.fips() +
                        " at " + format_date(s.anchor_date));
        out.push_back(std::move(y));
    }
    (void)panel;
    return out;
}

}  // namespace

MorrisSweep morris_sweep(const ForecastModel& model, const PanelDataset& panel,
                         const MorrisOptions& opt, Eigen::Index feature,
                         const std::vector<double>& deltas) {
    opt.window.validate();
    if (feature < 0 || feature >= panel.num_static())
        throw ValidationError("static feature index out of range");
    if (deltas.empty()) throw ValidationError("empty delta grid");
    std::vector<double> grid = deltas;
    std::sort(grid.begin(), grid.end());
    for (double d : grid)
        if (d == 0.0 || !std::isfinite(d)) throw ValidationError("deltas must be finite and nonzero");

    const Eigen::Index k = opt.window.lag_days;
    std::vector<Eigen::Index> anchors =
        tile_anchors(panel.num_days(), opt.window, k, panel.num_days() - 1);
    std::vector<WindowSample> base_samples = windows_at_anchors(panel, opt.window, anchors);
    std::vector<Eigen::VectorXd> base = forecast_tiles(model, panel, base_samples);

    MorrisSweep sweep;
    sweep.feature = panel.static_names.at(static_cast<std::size_t>(feature));
    sweep.feature_sigma = static_sigma(panel, feature);
    sweep.covered_days = static_cast<long>(anchors.size()) * opt.window.horizon_days;
    const double cells =
        static_cast<double>(panel.num_counties()) * static_cast<double>(sweep.covered_days);

    KahanSum scaled_total;
    for (double delta : grid) {
        long out_of_range = 0;
        PanelDataset shifted = perturb_static(panel, feature, delta, &out_of_range);
        std::vector<WindowSample> samples = windows_at_anchors(shifted, opt.window, anchors);
        std::vector<Eigen::VectorXd> perturbed = forecast_tiles(model, shifted, samples);

        KahanSum g;
        for (std::size_t i = 0; i < base.size(); ++i) {
            for (Eigen::Index j = 0; j < base[i].size(); ++j) {
                double diff = perturbed[i][j] - base[i][j];
                g.add(opt.absolute ? std::abs(diff) : diff);
            }
        }
        MorrisResult r;
        r.delta = delta;
        r.total_change = g.value();
        double denom = cells * (opt.absolute ? std::abs(delta) : delta);
        r.mu_star_hat = g.value() / denom;
        r.sigma = sweep.feature_sigma;
        r.scaled_index = r.mu_star_hat * sweep.feature_sigma;
        r.counties = static_cast<long>(panel.num_counties());
        r.covered_days = sweep.covered_days;
        r.out_of_range = out_of_range;
        scaled_total.add(r.scaled_index);
        sweep.results.push_back(r);
    }
    sweep.mean_scaled = scaled_total.value() / static_cast<double>(grid.size());
    return sweep;
}

MorrisResult morris_index(const ForecastModel& model, const PanelDataset& panel,
                          const MorrisOptions& opt, Eigen::Index feature, double delta) {
    return morris_sweep(model, panel, opt, feature, {delta}).results.front();
}

MorrisMatrix run_all_age_groups(const std::map<AgeGroup, const ForecastModel*>& models,
                                const std::map<AgeGroup, const PanelDataset*>& panels,
                                const MorrisOptions& opt, const std::vector<double>& deltas) {
    MorrisMatrix out;
    for (AgeGroup g : all_age_groups()) {
        auto mi = models.find(g);
        auto pi = panels.find(g);
        if (mi == models.end() || !mi->second)
            throw ValidationError("no model supplied for age group " + std::string(age_group_label(g)));
        if (pi == panels.end() || !pi->second)
            throw ValidationError("no panel supplied for age group " + std::string(age_group_label(g)));
        const PanelDataset& panel = *pi->second;
        if (panel.num_static() != 1)
            throw ValidationError("age group panel must carry exactly one static feature, got " +
                                  std::to_string(panel.num_static()));
        out.emplace(g, morris_sweep(*mi->second, panel, opt, 0, deltas));
    }
    return out;
}

}  // namespace sensi
