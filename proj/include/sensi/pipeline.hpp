#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "sensi/age_group.hpp"
#include "sensi/dataset.hpp"
#include "sensi/morris.hpp"
#include "sensi/recurrent.hpp"

namespace sensi {

/// Everything a pipeline run needs, read from a flat key=value config file.
/// Relative paths are resolved against the config file's directory.
struct PipelineConfig {
    std::filesystem::path cases_csv;
    std::filesystem::path population_csv;
    std::filesystem::path vaccination_csv;
    std::filesystem::path ground_truth_csv;  // needed by rank
    std::filesystem::path age_cases_csv;     // optional weekly plot input
    std::filesystem::path output_dir;

    SplitConfig splits;
    WindowConfig window;
    TrainConfig training;
    int hidden = 64;
    std::vector<double> deltas;  // defaults to the 20-value grid
    bool absolute = false;       // set by the --absolute flag, not the file

    /// Parses and validates the file. Unknown keys, missing required keys,
    /// malformed values, inconsistent dates, and zero deltas are all
    /// UsageError.
    static PipelineConfig load(const std::filesystem::path& path);

    std::filesystem::path panel_dir(AgeGroup g) const;
    std::filesystem::path model_path(AgeGroup g) const;
    std::filesystem::path history_path(AgeGroup g) const;
};

/// Builds and exports one panel per age group, plus an ingest diagnostics log.
void cmd_ingest(const PipelineConfig& cfg);

/// Trains the recurrent forecaster for one group (or all eight), writing a
/// model snapshot, a loss history CSV, and upserting rmse.csv.
void cmd_train(const PipelineConfig& cfg, std::optional<AgeGroup> group,
               std::optional<std::uint64_t> seed_override);

/// Scores a trained snapshot and writes per-county predictions for the val
/// and test splits.
void cmd_predict(const PipelineConfig& cfg, std::optional<AgeGroup> group);

/// Delta sweep over trained snapshots; writes morris_results.csv and the
/// per-group plot file morris_vs_delta.csv.
void cmd_morris(const PipelineConfig& cfg, std::optional<AgeGroup> group);

/// Ranks groups by ground-truth infection rate and by average Morris rank;
/// writes ranks.csv, rank_summary.txt, and (when configured) the weekly
/// case plot data.
void cmd_rank(const PipelineConfig& cfg);

}  // namespace sensi
