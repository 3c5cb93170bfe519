#pragma once

#include <array>
#include <string>

namespace sensi {

/// The eight age bands, ordered by lower bound.
enum class AgeGroup : int {
    y0_4 = 0,
    y5_17,
    y18_29,
    y30_39,
    y40_49,
    y50_64,
    y65_74,
    y75_plus,
};

inline constexpr int kNumAgeGroups = 8;

/// All groups in canonical order.
const std::array<AgeGroup, kNumAgeGroups>& all_age_groups();

/// Canonical label, e.g. "18-29", "75+".
const std::string& age_group_label(AgeGroup g);

/// Filesystem-safe name, e.g. "age_18_29", "age_75_plus".
const std::string& age_group_slug(AgeGroup g);

/// Parses a canonical label; throws ValidationError on anything else.
AgeGroup parse_age_group(const std::string& label);

inline int index_of(AgeGroup g) { return static_cast<int>(g); }

/// One value per age group, indexed in canonical order.
using AgeGroupVector = std::array<double, kNumAgeGroups>;

}  // namespace sensi
