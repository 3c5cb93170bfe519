#include "sensi/panel.hpp"

#include <cctype>
#include <sstream>

#include "sensi/csv.hpp"
#include "sensi/errors.hpp"

namespace sensi {

CountyId CountyId::parse(const std::string& text) {
    if (text.size() != 5) throw ValidationError("FIPS must have 5 digits: '" + text + "'");
    bool all_zero = true;
    for (char c : text) {
        if (!std::isdigit(static_cast<unsigned char>(c)))
            throw ValidationError("FIPS must be numeric: '" + text + "'");
        if (c != '0') all_zero = false;
    }
    if (all_zero) throw ValidationError("FIPS 00000 is not a county");
    return CountyId(text);
}

Eigen::Index PanelDataset::date_index(Date d) const {
    if (dates.empty() || d < dates.front() || d > dates.back()) return -1;
    return (d - dates.front()).count();
}

PanelDataset PanelDataset::slice_days(Eigen::Index first, Eigen::Index last) const {
    if (first < 0 || last >= num_days() || first > last)
        throw ValidationError("day slice out of range");
    PanelDataset out;
    out.counties = counties;
    out.dates.assign(dates.begin() + first, dates.begin() + last + 1);
    const Eigen::Index n = last - first + 1;
    out.target = target.middleCols(first, n);
    out.dynamic.reserve(dynamic.size());
    for (const auto& ch : dynamic)
        out.dynamic.push_back({ch.name, ch.role, ch.values.middleCols(first, n)});
    out.static_features = static_features;
    out.static_names = static_names;
    return out;
}

void PanelDataset::validate() const {
    const Eigen::Index c = num_counties();
    const Eigen::Index t = num_days();
    if (c == 0 || t == 0) throw ValidationError("panel is empty");
    if (target.rows() != c || target.cols() != t) throw ValidationError("target shape mismatch");
    for (const auto& ch : dynamic)
        if (ch.values.rows() != c || ch.values.cols() != t)
            throw ValidationError("dynamic channel '" + ch.name + "' shape mismatch");
    if (static_features.rows() != c) throw ValidationError("static matrix row mismatch");
    if (static_cast<std::size_t>(static_features.cols()) != static_names.size())
        throw ValidationError("static name count mismatch");
    for (std::size_t i = 1; i < counties.size(); ++i)
        if (!(counties[i - 1] < counties[i]))
            throw ValidationError("counties not strictly ascending by FIPS");
    for (std::size_t i = 1; i < dates.size(); ++i)
        if ((dates[i] - dates[i - 1]).count() != 1)
            throw ValidationError("dates not contiguous at " + format_date(dates[i]));
    if (!target.allFinite()) throw ValidationError("target has non-finite cells");
    if ((target.array() < 0.0).any()) throw ValidationError("target has negative cells");
    if (!static_features.allFinite()) throw ValidationError("static features have non-finite cells");
    for (const auto& ch : dynamic)
        if (!ch.values.allFinite())
            throw ValidationError("dynamic channel '" + ch.name + "' has non-finite cells");
}

namespace {

std::string matrix_csv(const PanelDataset& panel, const Eigen::MatrixXd& m) {
    std::ostringstream out;
    out << "fips";
    for (Date d : panel.dates) out << ',' << format_date(d);
    out << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        out << panel.counties[static_cast<std::size_t>(r)].fips();
        for (Eigen::Index c = 0; c < m.cols(); ++c) out << ',' << format_double(m(r, c));
        out << '\n';
    }
    return out.str();
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path, const PanelDataset& panel) {
    const CsvFile csv = read_csv(path);
    const auto c = panel.counties.size();
    const auto t = panel.dates.size();
    if (csv.header.size() != t + 1 || csv.rows.size() != c)
        throw ValidationError(path.string() + ": shape does not match dates/counties files");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(t));
    for (std::size_t r = 0; r < c; ++r) {
        if (csv.rows[r][0] != panel.counties[r].fips())
            throw ValidationError(path.string() + ": county order differs from counties.csv");
        for (std::size_t j = 0; j < t; ++j)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) =
                parse_double_field(csv.rows[r][j + 1], path, csv.line[r]);
    }
    return m;
}

std::string role_name(ChannelRole role) {
    return role == ChannelRole::past_observed ? "past_observed" : "known_future";
}

ChannelRole parse_role(const std::string& name, const std::filesystem::path& path) {
    if (name == "past_observed") return ChannelRole::past_observed;
    if (name == "known_future") return ChannelRole::known_future;
    throw ValidationError(path.string() + ": unknown channel role '" + name + "'");
}

}  // namespace

void export_panel(const PanelDataset& panel, const std::filesystem::path& dir) {
    panel.validate();
    std::filesystem::create_directories(dir);

    {
        std::ostringstream out;
        out << "date\n";
        for (Date d : panel.dates) out << format_date(d) << '\n';
        write_file_atomic(dir / "dates.csv", out.str());
    }
    {
        std::ostringstream out;
        out << "fips\n";
        for (const auto& county : panel.counties) out << county.fips() << '\n';
        write_file_atomic(dir / "counties.csv", out.str());
    }
    {
        std::ostringstream out;
        out << "fips";
        for (const auto& name : panel.static_names) out << ',' << name;
        out << '\n';
        for (Eigen::Index r = 0; r < panel.static_features.rows(); ++r) {
            out << panel.counties[static_cast<std::size_t>(r)].fips();
            for (Eigen::Index k = 0; k < panel.static_features.cols(); ++k)
                out << ',' << format_double(panel.static_features(r, k));
            out << '\n';
        }
        write_file_atomic(dir / "static.csv", out.str());
    }
    {
        std::ostringstream out;
        out << "name,role\n";
        for (const auto& ch : panel.dynamic) out << ch.name << ',' << role_name(ch.role) << '\n';
        write_file_atomic(dir / "channels.csv", out.str());
    }
    write_file_atomic(dir / "target.csv", matrix_csv(panel, panel.target));
    for (const auto& ch : panel.dynamic)
        write_file_atomic(dir / ("dynamic_" + ch.name + ".csv"), matrix_csv(panel, ch.values));
}

PanelDataset import_panel(const std::filesystem::path& dir) {
    PanelDataset panel;

    {
        const auto path = dir / "dates.csv";
        const CsvFile csv = read_csv(path);
        require_header(csv, path, {"date"});
        panel.dates.reserve(csv.rows.size());
        for (const auto& row : csv.rows) panel.dates.push_back(parse_date(row[0]));
    }
    {
        const auto path = dir / "counties.csv";
        const CsvFile csv = read_csv(path);
        require_header(csv, path, {"fips"});
        panel.counties.reserve(csv.rows.size());
        for (const auto& row : csv.rows) panel.counties.push_back(CountyId::parse(row[0]));
    }
    {
        const auto path = dir / "static.csv";
        const CsvFile csv = read_csv(path);
        if (csv.header.empty() || csv.header[0] != "fips")
            throw ValidationError(path.string() + ": first column must be fips");
        panel.static_names.assign(csv.header.begin() + 1, csv.header.end());
        const auto k = panel.static_names.size();
        if (csv.rows.size() != panel.counties.size())
            throw ValidationError(path.string() + ": county count mismatch");
        panel.static_features.resize(static_cast<Eigen::Index>(panel.counties.size()),
                                     static_cast<Eigen::Index>(k));
        for (std::size_t r = 0; r < csv.rows.size(); ++r) {
            if (csv.rows[r][0] != panel.counties[r].fips())
                throw ValidationError(path.string() + ": county order differs from counties.csv");
            for (std::size_t j = 0; j < k; ++j)
                panel.static_features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) =
                    parse_double_field(csv.rows[r][j + 1], path, csv.line[r]);
        }
    }
    panel.target = read_matrix_csv(dir / "target.csv", panel);
    {
        const auto path = dir / "channels.csv";
        const CsvFile csv = read_csv(path);
        require_header(csv, path, {"name", "role"});
        for (const auto& row : csv.rows) {
            DynamicChannel ch;
            ch.name = row[0];
            ch.role = parse_role(row[1], path);
            ch.values = read_matrix_csv(dir / ("dynamic_" + ch.name + ".csv"), panel);
            panel.dynamic.push_back(std::move(ch));
        }
    }
    panel.validate();
    return panel;
}

}  // namespace sensi
