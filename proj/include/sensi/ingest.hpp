#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <vector>

#include "sensi/age_group.hpp"
#include "sensi/date.hpp"
#include "sensi/panel.hpp"

namespace sensi {

/// Cumulative case counts per county, gap-filled to a contiguous daily series
/// between each county's first and last report.
class CaseTable {
public:
    struct Series {
        Date first;
        std::vector<double> cumulative;  // one value per day from `first`
    };

    void insert(const CountyId& county, Date first, std::vector<double> cumulative);

    std::vector<CountyId> counties() const;
    std::size_t county_count() const { return series_.size(); }
    const Series& series(const CountyId& county) const;

    /// Cumulative values over an arbitrary date span: 0 before the first
    /// report, the series inside it, last value carried forward after it.
    std::vector<double> cumulative_over(const CountyId& county, const std::vector<Date>& dates) const;

private:
    std::map<CountyId, Series> series_;
};

/// Per-county share of population in each of the eight age groups.
class StaticTable {
public:
    void insert(const CountyId& county, const std::array<double, kNumAgeGroups>& shares);

    std::vector<CountyId> counties() const;
    bool contains(const CountyId& county) const;
    const std::array<double, kNumAgeGroups>& shares(const CountyId& county) const;

private:
    std::map<CountyId, std::array<double, kNumAgeGroups>> shares_;
};

/// Sparse fully-vaccinated coverage reports per county.
class DynamicTable {
public:
    void insert(const CountyId& county, Date date, double coverage);

    /// Dense daily series: 0 before the first report, forward-filled between
    /// and after reports. A county with no rows yields all zeros.
    std::vector<double> dense_series(const CountyId& county, const std::vector<Date>& dates) const;

private:
    std::map<CountyId, std::map<Date, double>> reports_;
};

/// Aggregate ground truth: case and population totals per age group.
struct GroundTruthAgeTable {
    AgeGroupVector cases;
    AgeGroupVector population;
};

struct IngestDiagnostics {
    long negative_diff_clamps = 0;  // reporting corrections zeroed by to_daily
    long case_gap_fills = 0;        // missing interior days forward-filled at load
    std::vector<CountyId> dropped_counties;  // present in one source only
};

// -- loaders ---------------------------------------------------------------

/// cases.csv: fips,date,cumulative_cases. Rejects duplicate (county,date) rows,
/// malformed FIPS/dates, negative counts; forward-fills interior date gaps.
CaseTable load_cases(const std::filesystem::path& path, IngestDiagnostics* diag = nullptr);

/// population.csv: fips,age_group,population. Counts are converted to shares of
/// the county total; every county needs all eight groups exactly once.
StaticTable load_static_population(const std::filesystem::path& path);

/// vaccination.csv: fips,date,fully_vaccinated_fraction with values in [0,1].
DynamicTable load_vaccination(const std::filesystem::path& path);

/// ground_truth_age.csv: age_group,cases,population for all eight groups.
GroundTruthAgeTable load_ground_truth_age(const std::filesystem::path& path);

// -- transforms ------------------------------------------------------------

/// Differences one cumulative series into daily new cases. daily[0] = cum[0];
/// negative diffs are clamped to 0 and counted.
std::vector<double> to_daily(const std::vector<double>& cumulative, long* clamp_count = nullptr);

/// Daily new-case matrix over the given dates for the given county order.
Eigen::MatrixXd to_daily(const CaseTable& cases, const std::vector<CountyId>& counties,
                         const std::vector<Date>& dates, IngestDiagnostics* diag = nullptr);

/// Joins the sources into one rectangular panel for a single age group:
/// counties = cases ∩ population (sorted by FIPS), vaccination densified with
/// zeros for absent counties, SinWeekly added as a known-future channel, and
/// the selected group's share as the only static feature.
PanelDataset assemble_panel(const CaseTable& cases, const StaticTable& statics,
                            const DynamicTable& vaccination, Date start, Date end,
                            AgeGroup selected_group, IngestDiagnostics* diag = nullptr);

}  // namespace sensi
