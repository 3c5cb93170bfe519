#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

#include "sensi/date.hpp"

namespace sensi {

/// 5-digit county FIPS code, zero-padded.
class CountyId {
public:
    CountyId() = default;

    /// Validates: exactly 5 digit characters, not all zero.
    static CountyId parse(const std::string& text);

    const std::string& fips() const { return fips_; }

    auto operator<=>(const CountyId&) const = default;

private:
    explicit CountyId(std::string fips) : fips_(std::move(fips)) {}
    std::string fips_;
};

/// Whether a dynamic channel is observed history only, or known over the
/// forecast horizon too.
enum class ChannelRole { past_observed, known_future };

struct DynamicChannel {
    std::string name;
    ChannelRole role = ChannelRole::past_observed;
    Eigen::MatrixXd values;  // C x T
};

/// Rectangular county-by-day panel: daily target, dynamic channels, and one
/// static feature vector per county. Immutable by convention once assembled.
struct PanelDataset {
    std::vector<CountyId> counties;  // sorted by FIPS, length C
    std::vector<Date> dates;         // contiguous ascending, length T
    Eigen::MatrixXd target;          // C x T, daily new cases
    std::vector<DynamicChannel> dynamic;
    Eigen::MatrixXd static_features;  // C x K
    std::vector<std::string> static_names;

    Eigen::Index num_counties() const { return static_cast<Eigen::Index>(counties.size()); }
    Eigen::Index num_days() const { return static_cast<Eigen::Index>(dates.size()); }
    Eigen::Index num_static() const { return static_features.cols(); }

    /// Index of a date within the panel, or -1.
    Eigen::Index date_index(Date d) const;

    /// Columns [first, last] of every matrix, as a new panel.
    PanelDataset slice_days(Eigen::Index first, Eigen::Index last) const;

    /// Throws ValidationError if shapes, ordering, or contiguity are broken.
    void validate() const;
};

/// Writes the panel as a directory of CSVs (target.csv, dynamic_<name>.csv,
/// static.csv, dates.csv, counties.csv). Doubles are written with shortest
/// round-trip precision so import reproduces the panel exactly.
void export_panel(const PanelDataset& panel, const std::filesystem::path& dir);

/// Reads back what export_panel wrote.
PanelDataset import_panel(const std::filesystem::path& dir);

}  // namespace sensi
