#include "sensi/age_group.hpp"

#include "sensi/errors.hpp"

namespace sensi {

namespace {

const std::array<std::string, kNumAgeGroups> kLabels = {
    "0-4", "5-17", "18-29", "30-39", "40-49", "50-64", "65-74", "75+",
};

const std::array<std::string, kNumAgeGroups> kSlugs = {
    "age_0_4",   "age_5_17",  "age_18_29", "age_30_39",
    "age_40_49", "age_50_64", "age_65_74", "age_75_plus",
};

}  // namespace

const std::array<AgeGroup, kNumAgeGroups>& all_age_groups() {
    static const std::array<AgeGroup, kNumAgeGroups> groups = {
        AgeGroup::y0_4,   AgeGroup::y5_17,  AgeGroup::y18_29, AgeGroup::y30_39,
        AgeGroup::y40_49, AgeGroup::y50_64, AgeGroup::y65_74, AgeGroup::y75_plus,
    };
    return groups;
}

const std::string& age_group_label(AgeGroup g) { return kLabels[static_cast<std::size_t>(g)]; }

const std::string& age_group_slug(AgeGroup g) { return kSlugs[static_cast<std::size_t>(g)]; }

AgeGroup parse_age_group(const std::string& label) {
    for (int i = 0; i < kNumAgeGroups; ++i)
        if (kLabels[static_cast<std::size_t>(i)] == label) return static_cast<AgeGroup>(i);
    throw ValidationError("unknown age group label: '" + label + "'");
}

}  // namespace sensi
