#pragma once

#include <map>
#include <vector>

#include "sensi/age_group.hpp"
#include "sensi/dataset.hpp"
#include "sensi/model.hpp"

namespace sensi {

struct MorrisOptions {
    WindowConfig window;
    bool absolute = false;  // classical mean-absolute variant instead of signed sums
};

/// The default perturbation grid: -0.010, -0.009, ... 0.010 without zero.
std::vector<double> default_deltas();

/// Copy of the panel with one static feature shifted by delta for every
/// county. Values leaving [0, 1] are counted, not clamped; the model sees the
/// raw perturbed value.
PanelDataset perturb_static(const PanelDataset& panel, Eigen::Index feature, double delta,
                            long* out_of_range = nullptr);

/// Population standard deviation of one static feature across counties.
double static_sigma(const PanelDataset& panel, Eigen::Index feature);

struct MorrisResult {
    double delta = 0.0;
    double total_change = 0.0;  // G: sum over every (county, day) cell of the forecast change
    double mu_star_hat = 0.0;   // G / (counties * covered_days * delta)
    double sigma = 0.0;         // population std of the unperturbed feature across counties
    double scaled_index = 0.0;  // mu_star_hat * sigma
    long counties = 0;
    long covered_days = 0;  // horizon-tiled forecast days scored per county
    long out_of_range = 0;  // perturbed feature values outside [0, 1]
};

struct MorrisSweep {
    std::string feature;
    double feature_sigma = 0.0;
    long covered_days = 0;
    std::vector<MorrisResult> results;  // ascending delta
    double mean_scaled = 0.0;           // average of scaled_index over the grid
};

/// Sensitivity at a single delta; see morris_sweep.
MorrisResult morris_index(const ForecastModel& model, const PanelDataset& panel,
                          const MorrisOptions& opt, Eigen::Index feature, double delta);

/// Scores the model on non-overlapping horizon tiles of the panel, once
/// unperturbed and once per delta, and accumulates the forecast changes with
/// compensated summation. Deltas are processed in ascending order and must be
/// nonzero. The base forecast is computed once and shared across the grid, so
/// results do not depend on the caller's delta ordering.
MorrisSweep morris_sweep(const ForecastModel& model, const PanelDataset& panel,
                         const MorrisOptions& opt, Eigen::Index feature,
                         const std::vector<double>& deltas);

using MorrisMatrix = std::map<AgeGroup, MorrisSweep>;

/// One sweep per age group over that group's own panel and model. Each panel
/// must carry exactly one static feature (the group's population share).
MorrisMatrix run_all_age_groups(const std::map<AgeGroup, const ForecastModel*>& models,
                                const std::map<AgeGroup, const PanelDataset*>& panels,
                                const MorrisOptions& opt, const std::vector<double>& deltas);

}  // namespace sensi
