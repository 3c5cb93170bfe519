#include "sensi/ingest.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "sensi/csv.hpp"
#include "sensi/dataset.hpp"
#include "sensi/errors.hpp"

namespace sensi {

void CaseTable::insert(const CountyId& county, Date first, std::vector<double> cumulative) {
    if (cumulative.empty()) throw ValidationError("empty case series for county " + county.fips());
    series_[county] = Series{first, std::move(cumulative)};
}

std::vector<CountyId> CaseTable::counties() const {
    std::vector<CountyId> out;
    out.reserve(series_.size());
    for (const auto& [county, _] : series_) out.push_back(county);
    return out;
}

const CaseTable::Series& CaseTable::series(const CountyId& county) const {
    auto it = series_.find(county);
    if (it == series_.end()) throw ValidationError("no case series for county " + county.fips());
    return it->second;
}

std::vector<double> CaseTable::cumulative_over(const CountyId& county,
                                               const std::vector<Date>& dates) const {
    const Series& s = series(county);
    std::vector<double> out;
    out.reserve(dates.size());
    const Date last = s.first + std::chrono::days{static_cast<long>(s.cumulative.size()) - 1};
    for (Date d : dates) {
        if (d < s.first) {
            out.push_back(0.0);
        } else if (d > last) {
            out.push_back(s.cumulative.back());
        } else {
            out.push_back(s.cumulative[static_cast<std::size_t>((d - s.first).count())]);
        }
    }
    return out;
}

void StaticTable::insert(const CountyId& county, const std::array<double, kNumAgeGroups>& shares) {
    double total = 0.0;
    for (double v : shares) {
        if (v < 0.0 || v > 1.0)
            throw ValidationError("share outside [0,1] for county " + county.fips());
        total += v;
    }
    if (std::abs(total - 1.0) > 1e-6)
        throw ValidationError("shares do not sum to 1 for county " + county.fips());
    shares_[county] = shares;
}

std::vector<CountyId> StaticTable::counties() const {
    std::vector<CountyId> out;
    out.reserve(shares_.size());
    for (const auto& [county, _] : shares_) out.push_back(county);
    return out;
}

bool StaticTable::contains(const CountyId& county) const { return shares_.count(county) > 0; }

const std::array<double, kNumAgeGroups>& StaticTable::shares(const CountyId& county) const {
    auto it = shares_.find(county);
    if (it == shares_.end()) throw ValidationError("no shares for county " + county.fips());
    return it->second;
}

void DynamicTable::insert(const CountyId& county, Date date, double coverage) {
    reports_[county][date] = coverage;
}

std::vector<double> DynamicTable::dense_series(const CountyId& county,
                                               const std::vector<Date>& dates) const {
    std::vector<double> out(dates.size(), 0.0);
    auto it = reports_.find(county);
    if (it == reports_.end()) return out;  // absent county: all zeros
    const auto& sparse = it->second;
    double current = 0.0;
    auto next = sparse.begin();
    for (std::size_t i = 0; i < dates.size(); ++i) {
        while (next != sparse.end() && next->first <= dates[i]) {
            current = next->second;
            ++next;
        }
        out[i] = current;
    }
    return out;
}

CaseTable load_cases(const std::filesystem::path& path, IngestDiagnostics* diag) {
    const CsvFile csv = read_csv(path);
    require_header(csv, path, {"fips", "date", "cumulative_cases"});

    struct Raw {
        std::map<Date, double> by_date;
    };
    std::map<CountyId, Raw> raw;

    for (std::size_t i = 0; i < csv.rows.size(); ++i) {
        const auto& row = csv.rows[i];
        const long line = csv.line[i];
        CountyId county;
        Date date;
        try {
            county = CountyId::parse(row[0]);
            date = parse_date(row[1]);
        } catch (const ValidationError& e) {
            std::ostringstream msg;
            msg << path.string() << ":" << line << ": " << e.what();
            throw ValidationError(msg.str());
        }
        const long long count = parse_count_field(row[2], path, line);
        auto [it, inserted] = raw[county].by_date.emplace(date, static_cast<double>(count));
        if (!inserted) {
            std::ostringstream msg;
            msg << path.string() << ":" << line << ": duplicate row for county " << county.fips()
                << " date " << format_date(date);
            throw ValidationError(msg.str());
        }
    }

    CaseTable table;
    for (auto& [county, r] : raw) {
        const Date first = r.by_date.begin()->first;
        const Date last = r.by_date.rbegin()->first;
        std::vector<double> cumulative;
        cumulative.reserve(static_cast<std::size_t>(day_count(first, last)));
        double current = r.by_date.begin()->second;
        for (Date d = first; d <= last; d += std::chrono::days{1}) {
            auto it = r.by_date.find(d);
            if (it != r.by_date.end()) {
                current = it->second;
            } else if (diag) {
                ++diag->case_gap_fills;
            }
            cumulative.push_back(current);
        }
        table.insert(county, first, std::move(cumulative));
    }
    return table;
}

StaticTable load_static_population(const std::filesystem::path& path) {
    const CsvFile csv = read_csv(path);
    require_header(csv, path, {"fips", "age_group", "population"});

    std::map<CountyId, std::array<long long, kNumAgeGroups>> counts;
    std::map<CountyId, std::array<bool, kNumAgeGroups>> seen;

    for (std::size_t i = 0; i < csv.rows.size(); ++i) {
        const auto& row = csv.rows[i];
        const long line = csv.line[i];
        CountyId county;
        AgeGroup group;
        try {
            county = CountyId::parse(row[0]);
            group = parse_age_group(row[1]);
        } catch (const ValidationError& e) {
            std::ostringstream msg;
            msg << path.string() << ":" << line << ": " << e.what();
            throw ValidationError(msg.str());
        }
        const long long population = parse_count_field(row[2], path, line);
        auto& flags = seen.try_emplace(county).first->second;
        if (flags[static_cast<std::size_t>(index_of(group))]) {
            std::ostringstream msg;
            msg << path.string() << ":" << line << ": duplicate age group " << row[1]
                << " for county " << county.fips();
            throw ValidationError(msg.str());
        }
        flags[static_cast<std::size_t>(index_of(group))] = true;
        counts.try_emplace(county).first->second[static_cast<std::size_t>(index_of(group))] =
            population;
    }

    StaticTable table;
    for (const auto& [county, flags] : seen) {
        for (int g = 0; g < kNumAgeGroups; ++g) {
            if (!flags[static_cast<std::size_t>(g)])
                throw ValidationError(path.string() + ": county " + county.fips() +
                                      " is missing age group " +
                                      age_group_label(static_cast<AgeGroup>(g)));
        }
        const auto& c = counts.at(county);
        long long total = 0;
        for (long long v : c) total += v;
        if (total <= 0)
            throw ValidationError(path.string() + ": county " + county.fips() +
                                  " has zero total population");
        std::array<double, kNumAgeGroups> shares;
        for (int g = 0; g < kNumAgeGroups; ++g)
            shares[static_cast<std::size_t>(g)] =
                static_cast<double>(c[static_cast<std::size_t>(g)]) / static_cast<double>(total);
        table.insert(county, shares);
    }
    return table;
}

DynamicTable load_vaccination(const std::filesystem::path& path) {
    const CsvFile csv = read_csv(path);
    require_header(csv, path, {"fips", "date", "fully_vaccinated_fraction"});

    DynamicTable table;
    for (std::size_t i = 0; i < csv.rows.size(); ++i) {
        const auto& row = csv.rows[i];
        const long line = csv.line[i];
        CountyId county;
        Date date;
        try {
            county = CountyId::parse(row[0]);
            date = parse_date(row[1]);
        } catch (const ValidationError& e) {
            std::ostringstream msg;
            msg << path.string() << ":" << line << ": " << e.what();
            throw ValidationError(msg.str());
        }
        const double coverage = parse_double_field(row[2], path, line);
        if (coverage < 0.0 || coverage > 1.0) {
            std::ostringstream msg;
            msg << path.string() << ":" << line << ": coverage outside [0,1]: " << coverage;
            throw ValidationError(msg.str());
        }
        table.insert(county, date, coverage);
    }
    return table;
}

GroundTruthAgeTable load_ground_truth_age(const std::filesystem::path& path) {
    const CsvFile csv = read_csv(path);
    require_header(csv, path, {"age_group", "cases", "population"});

    GroundTruthAgeTable table{};
    std::array<bool, kNumAgeGroups> seen{};
    for (std::size_t i = 0; i < csv.rows.size(); ++i) {
        const auto& row = csv.rows[i];
        const long line = csv.line[i];
        AgeGroup group;
        try {
            group = parse_age_group(row[0]);
        } catch (const ValidationError& e) {
            std::ostringstream msg;
            msg << path.string() << ":" << line << ": " << e.what();
            throw ValidationError(msg.str());
        }
        const auto g = static_cast<std::size_t>(index_of(group));
        if (seen[g])
            throw ValidationError(path.string() + ": duplicate age group " + row[0]);
        seen[g] = true;
        table.cases[g] = static_cast<double>(parse_count_field(row[1], path, line));
        table.population[g] = static_cast<double>(parse_count_field(row[2], path, line));
        if (table.population[g] <= 0.0)
            throw ValidationError(path.string() + ": zero population for group " + row[0]);
        if (table.cases[g] > table.population[g])
            throw ValidationError(path.string() + ": cases exceed population for group " + row[0]);
    }
    for (int g = 0; g < kNumAgeGroups; ++g)
        if (!seen[static_cast<std::size_t>(g)])
            throw ValidationError(path.string() + ": missing age group " +
                                  age_group_label(static_cast<AgeGroup>(g)));
    return table;
}

std::vector<double> to_daily(const std::vector<double>& cumulative, long* clamp_count) {
    std::vector<double> daily(cumulative.size());
    for (std::size_t t = 0; t < cumulative.size(); ++t) {
        const double diff = t == 0 ? cumulative[0] : cumulative[t] - cumulative[t - 1];
        if (diff < 0.0) {
            daily[t] = 0.0;
            if (clamp_count) ++*clamp_count;
        } else {
            daily[t] = diff;
        }
    }
    return daily;
}

Eigen::MatrixXd to_daily(const CaseTable& cases, const std::vector<CountyId>& counties,
                         const std::vector<Date>& dates, IngestDiagnostics* diag) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(counties.size()),
                        static_cast<Eigen::Index>(dates.size()));
    long clamps = 0;
    for (std::size_t c = 0; c < counties.size(); ++c) {
        const auto daily = to_daily(cases.cumulative_over(counties[c], dates), &clamps);
        for (std::size_t t = 0; t < daily.size(); ++t)
            out(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(t)) = daily[t];
    }
    if (diag) diag->negative_diff_clamps += clamps;
    return out;
}

PanelDataset assemble_panel(const CaseTable& cases, const StaticTable& statics,
                            const DynamicTable& vaccination, Date start, Date end,
                            AgeGroup selected_group, IngestDiagnostics* diag) {
    PanelDataset panel;
    panel.dates = date_range(start, end);

    // county set: cases ∩ population, sorted by FIPS
    for (const auto& county : cases.counties()) {
        if (statics.contains(county)) {
            panel.counties.push_back(county);
        } else if (diag) {
            diag->dropped_counties.push_back(county);
        }
    }
    if (diag) {
        std::set<CountyId> with_cases(panel.counties.begin(), panel.counties.end());
        for (const auto& county : statics.counties())
            if (!with_cases.count(county)) diag->dropped_counties.push_back(county);
        std::sort(diag->dropped_counties.begin(), diag->dropped_counties.end());
    }
    if (panel.counties.empty())
        throw ValidationError("no county appears in both the case and population tables");

    panel.target = to_daily(cases, panel.counties, panel.dates, diag);

    const auto c_count = static_cast<Eigen::Index>(panel.counties.size());
    const auto t_count = static_cast<Eigen::Index>(panel.dates.size());

    DynamicChannel vacc{"vaccination", ChannelRole::past_observed,
                        Eigen::MatrixXd(c_count, t_count)};
    for (Eigen::Index c = 0; c < c_count; ++c) {
        const auto series =
            vaccination.dense_series(panel.counties[static_cast<std::size_t>(c)], panel.dates);
        for (Eigen::Index t = 0; t < t_count; ++t)
            vacc.values(c, t) = series[static_cast<std::size_t>(t)];
    }
    panel.dynamic.push_back(std::move(vacc));

    DynamicChannel weekly{"sin_weekly", ChannelRole::known_future,
                          Eigen::MatrixXd(c_count, t_count)};
    for (Eigen::Index t = 0; t < t_count; ++t) {
        const double v = sin_weekly(panel.dates[static_cast<std::size_t>(t)]);
        weekly.values.col(t).setConstant(v);
    }
    panel.dynamic.push_back(std::move(weekly));

    panel.static_features.resize(c_count, 1);
    for (Eigen::Index c = 0; c < c_count; ++c)
        panel.static_features(c, 0) =
            statics.shares(panel.counties[static_cast<std::size_t>(c)])
                [static_cast<std::size_t>(index_of(selected_group))];
    panel.static_names = {"share_" + age_group_slug(selected_group)};

    panel.validate();
    return panel;
}

}  // namespace sensi
