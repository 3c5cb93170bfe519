#include "sensi/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "sensi/csv.hpp"
#include "sensi/errors.hpp"
#include "sensi/ingest.hpp"
#include "sensi/metrics.hpp"
#include "sensi/model.hpp"
#include "sensi/ranking.hpp"
#include "sensi/snapshot.hpp"

namespace fs = std::filesystem;

namespace sensi {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

struct KvFile {
    std::map<std::string, std::string> values;
    std::map<std::string, long> lines;
};

KvFile read_kv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingInputError("cannot open config " + path.string());
    KvFile kv;
    std::string raw;
    long line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string text = trim(raw);
        if (text.empty() || text[0] == '#') continue;
        std::size_t eq = text.find('=');
        if (eq == std::string::npos)
            throw UsageError(path.string() + ":" + std::to_string(line) +
                             ": expected key = value");
        std::string key = trim(text.substr(0, eq));
        std::string value = trim(text.substr(eq + 1));
        if (key.empty())
            throw UsageError(path.string() + ":" + std::to_string(line) + ": empty key");
        if (kv.values.count(key))
            throw UsageError(path.string() + ":" + std::to_string(line) + ": duplicate key '" +
                             key + "' (first at line " + std::to_string(kv.lines[key]) + ")");
        kv.values[key] = value;
        kv.lines[key] = line;
    }
    return kv;
}

class ConfigReader {
public:
    ConfigReader(KvFile kv, fs::path config_path)
        : kv_(std::move(kv)), path_(std::move(config_path)), base_(fs::absolute(path_).parent_path()) {}

    bool has(const std::string& key) const { return kv_.values.count(key) > 0; }

    std::string raw(const std::string& key) {
        seen_.insert(key);
        auto it = kv_.values.find(key);
        if (it == kv_.values.end())
            throw UsageError(path_.string() + ": missing required config key '" + key + "'");
        return it->second;
    }

    fs::path path_value(const std::string& key) {
        fs::path p = raw(key);
        return (p.is_absolute() ? p : base_ / p).lexically_normal();
    }

    fs::path path_or_empty(const std::string& key) {
        if (!has(key)) {
            seen_.insert(key);
            return {};
        }
        return path_value(key);
    }

    Date date_or(const std::string& key, Date fallback) {
        if (!has(key)) {
            seen_.insert(key);
            return fallback;
        }
        try {
            return parse_date(raw(key));
        } catch (const ValidationError& e) {
            throw UsageError(where(key) + e.what());
        }
    }

    long integer_or(const std::string& key, long fallback, long min_value) {
        if (!has(key)) {
            seen_.insert(key);
            return fallback;
        }
        std::string v = raw(key);
        long out = 0;
        auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc{} || p != v.data() + v.size())
            throw UsageError(where(key) + "'" + v + "' is not an integer");
        if (out < min_value)
            throw UsageError(where(key) + "must be at least " + std::to_string(min_value));
        return out;
    }

    double real_or(const std::string& key, double fallback) {
        if (!has(key)) {
            seen_.insert(key);
            return fallback;
        }
        std::string v = raw(key);
        try {
            std::size_t used = 0;
            double out = std::stod(v, &used);
            if (used != v.size()) throw std::invalid_argument(v);
            return out;
        } catch (const std::exception&) {
            throw UsageError(where(key) + "'" + v + "' is not a number");
        }
    }

    std::vector<double> deltas_or_default(const std::string& key) {
        if (!has(key)) {
            seen_.insert(key);
            return default_deltas();
        }
        std::string v = raw(key);
        std::vector<double> out;
        std::stringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            try {
                std::size_t used = 0;
                double d = std::stod(item, &used);
                if (used != item.size()) throw std::invalid_argument(item);
                out.push_back(d);
            } catch (const std::exception&) {
                throw UsageError(where(key) + "'" + item + "' is not a number");
            }
        }
        if (out.empty()) throw UsageError(where(key) + "empty delta list");
        for (double d : out)
            if (d == 0.0 || !std::isfinite(d))
                throw UsageError(where(key) + "deltas must be finite and nonzero");
        return out;
    }

    void reject_unknown() const {
        for (const auto& [key, value] : kv_.values) {
            (void)value;
            if (!seen_.count(key))
                throw UsageError(path_.string() + ":" + std::to_string(kv_.lines.at(key)) +
                                 ": unknown config key '" + key + "'");
        }
    }

private:
    std::string where(const std::string& key) const {
        auto it = kv_.lines.find(key);
        long line = it == kv_.lines.end() ? 0 : it->second;
        return path_.string() + ":" + std::to_string(line) + ": " + key + ": ";
    }

    KvFile kv_;
    fs::path path_;
    fs::path base_;
    std::set<std::string> seen_;
};

Eigen::Index count_role(const PanelDataset& panel, ChannelRole role) {
    Eigen::Index n = 0;
    for (const auto& ch : panel.dynamic)
        if (ch.role == role) ++n;
    return n;
}

std::vector<AgeGroup> selected_groups(std::optional<AgeGroup> group) {
    if (group) return {*group};
    const auto& all = all_age_groups();
    return {all.begin(), all.end()};
}

double round_half(double x) { return std::round(x * 2.0) / 2.0; }

}  // namespace

PipelineConfig PipelineConfig::load(const fs::path& path) {
    ConfigReader reader(read_kv(path), path);
    PipelineConfig cfg;
    cfg.cases_csv = reader.path_value("cases_csv");
    cfg.population_csv = reader.path_value("population_csv");
    cfg.vaccination_csv = reader.path_value("vaccination_csv");
    cfg.ground_truth_csv = reader.path_or_empty("ground_truth_csv");
    cfg.age_cases_csv = reader.path_or_empty("age_cases_csv");
    cfg.output_dir = reader.path_value("output_dir");

    SplitConfig d = SplitConfig::defaults();
    cfg.splits.train_start = reader.date_or("train_start", d.train_start);
    cfg.splits.train_end = reader.date_or("train_end", d.train_end);
    cfg.splits.val_start = reader.date_or("val_start", d.val_start);
    cfg.splits.val_end = reader.date_or("val_end", d.val_end);
    cfg.splits.test_start = reader.date_or("test_start", d.test_start);
    cfg.splits.test_end = reader.date_or("test_end", d.test_end);

    cfg.window.lag_days = static_cast<int>(reader.integer_or("lag_days", 13, 1));
    cfg.window.horizon_days = static_cast<int>(reader.integer_or("horizon_days", 15, 1));
    cfg.training.epochs = static_cast<int>(reader.integer_or("epochs", 20, 0));
    cfg.training.batch_size = static_cast<int>(reader.integer_or("batch_size", 256, 1));
    cfg.training.learning_rate = reader.real_or("learning_rate", 1e-3);
    cfg.training.patience = static_cast<int>(reader.integer_or("patience", 5, 0));
    cfg.training.seed = static_cast<std::uint64_t>(reader.integer_or("seed", 42, 0));
    cfg.hidden = static_cast<int>(reader.integer_or("hidden", 64, 1));
    cfg.deltas = reader.deltas_or_default("deltas");
    reader.reject_unknown();

    try {
        cfg.splits.validate();
        cfg.window.validate();
        cfg.training.validate();
    } catch (const ValidationError& e) {
        throw UsageError(path.string() + ": " + e.what());
    }
    return cfg;
}

fs::path PipelineConfig::panel_dir(AgeGroup g) const {
    return output_dir / "panels" / age_group_slug(g);
}

fs::path PipelineConfig::model_path(AgeGroup g) const {
    return output_dir / "models" / (age_group_slug(g) + ".json");
}

fs::path PipelineConfig::history_path(AgeGroup g) const {
    return output_dir / "models" / (age_group_slug(g) + "_history.csv");
}

void cmd_ingest(const PipelineConfig& cfg) {
    IngestDiagnostics load_diag;
    CaseTable cases = load_cases(cfg.cases_csv, &load_diag);
    StaticTable statics = load_static_population(cfg.population_csv);
    DynamicTable vaccination = load_vaccination(cfg.vaccination_csv);

    fs::create_directories(cfg.output_dir / "panels");
    IngestDiagnostics panel_diag;
    Eigen::Index panel_counties = 0;
    Eigen::Index panel_days = 0;
    for (AgeGroup g : all_age_groups()) {
        IngestDiagnostics diag;
        PanelDataset panel = assemble_panel(cases, statics, vaccination, cfg.splits.train_start,
                                            cfg.splits.test_end, g, &diag);
        export_panel(panel, cfg.panel_dir(g));
        if (g == all_age_groups().front()) {
            panel_diag = diag;
            panel_counties = panel.num_counties();
            panel_days = panel.num_days();
        }
    }

    std::ostringstream log;
    log << "panel counties: " << panel_counties << "\n";
    log << "panel days: " << panel_days << " (" << format_date(cfg.splits.train_start) << " .. "
        << format_date(cfg.splits.test_end) << ")\n";
    log << "case gaps forward-filled at load: " << load_diag.case_gap_fills << "\n";
    log << "negative daily diffs clamped per panel: " << panel_diag.negative_diff_clamps << "\n";
    log << "counties dropped (missing from cases or population): "
        << panel_diag.dropped_counties.size() << "\n";
    for (const CountyId& c : panel_diag.dropped_counties) log << "  " << c.fips() << "\n";
    log << "panels written:\n";
    for (AgeGroup g : all_age_groups())
        log << "  " << age_group_label(g) << " -> panels/" << age_group_slug(g) << "\n";
    write_file_atomic(cfg.output_dir / "ingest_log.txt", log.str());
    std::cout << "ingested " << panel_counties << " counties x " << panel_days << " days into "
              << kNumAgeGroups << " panels under " << (cfg.output_dir / "panels").string() << "\n";
}

namespace {

void upsert_rmse(const PipelineConfig& cfg, AgeGroup g, const EvalReport& report) {
    const fs::path path = cfg.output_dir / "rmse.csv";
    std::map<int, std::array<double, 3>> rows;
    if (fs::exists(path)) {
        CsvFile f = read_csv(path);
        require_header(f, path, {"age_group", "rmse_train", "rmse_val", "rmse_test"});
        for (std::size_t i = 0; i < f.rows.size(); ++i) {
            AgeGroup rg = parse_age_group(f.rows[i][0]);
            rows[index_of(rg)] = {parse_double_field(f.rows[i][1], path, f.line[i]),
                                  parse_double_field(f.rows[i][2], path, f.line[i]),
                                  parse_double_field(f.rows[i][3], path, f.line[i])};
        }
    }
    rows[index_of(g)] = {report.rmse_train, report.rmse_val, report.rmse_test};
    std::ostringstream out;
    out << "age_group,rmse_train,rmse_val,rmse_test\n";
    for (const auto& [idx, vals] : rows) {
        out << age_group_label(all_age_groups()[static_cast<std::size_t>(idx)]) << ","
            << format_double(vals[0]) << "," << format_double(vals[1]) << ","
            << format_double(vals[2]) << "\n";
    }
    write_file_atomic(path, out.str());
}

void train_one(const PipelineConfig& cfg, AgeGroup g, std::optional<std::uint64_t> seed_override) {
    PanelDataset panel = import_panel(cfg.panel_dir(g));
    PanelSplits splits = split_panel(panel, cfg.splits);
    Scaler scaler = Scaler::fit(splits.train);
    for (const std::string& w : scaler.warnings()) std::cerr << "warning: " << w << "\n";

    std::vector<WindowSample> train_windows = make_windows(splits.train, cfg.window);
    Eigen::Index val_anchor = panel.date_index(cfg.splits.val_start) - 1;
    if (val_anchor < cfg.window.lag_days - 1)
        throw ValidationError("val split starts too early for the lag window");
    std::vector<WindowSample> val_windows =
        windows_at_anchors(panel, cfg.window, {val_anchor});

    RecurrentConfig rc;
    rc.window = cfg.window;
    rc.static_dim = static_cast<int>(panel.num_static());
    rc.past_dim = static_cast<int>(count_role(panel, ChannelRole::past_observed));
    rc.known_dim = static_cast<int>(count_role(panel, ChannelRole::known_future));
    rc.hidden = cfg.hidden;
    TrainConfig tc = cfg.training;
    if (seed_override) tc.seed = *seed_override;

    RecurrentForecaster model(rc, tc.seed);
    model.set_scaler(std::move(scaler));
    TrainResult tr = train_model(model, train_windows, val_windows, tc);

    fs::create_directories(cfg.output_dir / "models");
    save_snapshot(model, cfg.model_path(g));
    std::ostringstream hist;
    hist << "epoch,train_loss,val_rmse,best_val_rmse\n";
    for (const EpochStats& e : tr.history)
        hist << e.epoch << "," << format_double(e.train_loss) << "," << format_double(e.val_rmse)
             << "," << format_double(e.best_val_rmse) << "\n";
    write_file_atomic(cfg.history_path(g), hist.str());

    EvalReport report = evaluate(model, panel, cfg.splits, cfg.window);
    upsert_rmse(cfg, g, report);
    std::cout << age_group_label(g) << ": best epoch " << tr.best_epoch << ", rmse train "
              << format_double(report.rmse_train) << ", val " << format_double(report.rmse_val)
              << ", test " << format_double(report.rmse_test) << "\n";
}

}  // namespace

void cmd_train(const PipelineConfig& cfg, std::optional<AgeGroup> group,
               std::optional<std::uint64_t> seed_override) {
    for (AgeGroup g : selected_groups(group)) train_one(cfg, g, seed_override);
}

void cmd_predict(const PipelineConfig& cfg, std::optional<AgeGroup> group) {
    for (AgeGroup g : selected_groups(group)) {
        PanelDataset panel = import_panel(cfg.panel_dir(g));
        RecurrentForecaster model = load_snapshot(cfg.model_path(g));
        EvalReport report = evaluate(model, panel, cfg.splits, model.window_config());
        std::ostringstream out;
        out << "split,fips,date,actual,predicted\n";
        for (const PredictionRow& row : report.predictions)
            out << row.split << "," << row.county.fips() << "," << format_date(row.date) << ","
                << format_double(row.actual) << "," << format_double(row.predicted) << "\n";
        fs::path path = cfg.output_dir / ("predictions_" + age_group_slug(g) + ".csv");
        write_file_atomic(path, out.str());
        std::cout << age_group_label(g) << ": rmse val " << format_double(report.rmse_val)
                  << ", test " << format_double(report.rmse_test) << " -> " << path.filename().string()
                  << "\n";
    }
}

void cmd_morris(const PipelineConfig& cfg, std::optional<AgeGroup> group) {
    std::vector<AgeGroup> groups = selected_groups(group);
    MorrisMatrix matrix;
    for (AgeGroup g : groups) {
        PanelDataset panel = import_panel(cfg.panel_dir(g));
        if (!fs::exists(cfg.model_path(g)))
            throw MissingInputError("no trained snapshot for age group " + age_group_label(g) +
                                    " at " + cfg.model_path(g).string());
        RecurrentForecaster model = load_snapshot(cfg.model_path(g));
        PanelSplits splits = split_panel(panel, cfg.splits);
        MorrisOptions opt;
        opt.window = model.window_config();
        opt.absolute = cfg.absolute;
        matrix.emplace(g, morris_sweep(model, splits.train, opt, 0, cfg.deltas));
    }

    std::ostringstream results;
    results << "age_group,delta,total_change,mu_star_hat,sigma,scaled_index\n";
    for (AgeGroup g : groups) {
        for (const MorrisResult& r : matrix.at(g).results)
            results << age_group_label(g) << "," << format_double(r.delta) << ","
                    << format_double(r.total_change) << "," << format_double(r.mu_star_hat) << ","
                    << format_double(r.sigma) << "," << format_double(r.scaled_index) << "\n";
    }
    write_file_atomic(cfg.output_dir / "morris_results.csv", results.str());

    std::ostringstream plot;
    plot << "delta";
    for (AgeGroup g : groups) plot << "," << age_group_label(g);
    plot << "\n";
    const auto& first = matrix.at(groups.front()).results;
    for (std::size_t d = 0; d < first.size(); ++d) {
        plot << format_double(first[d].delta);
        for (AgeGroup g : groups) plot << "," << format_double(matrix.at(g).results[d].scaled_index);
        plot << "\n";
    }
    write_file_atomic(cfg.output_dir / "morris_vs_delta.csv", plot.str());
    std::cout << "swept " << groups.size() << " age groups over " << cfg.deltas.size()
              << " deltas -> morris_results.csv\n";
}

namespace {

MorrisMatrix read_morris_results(const fs::path& path) {
    CsvFile f = read_csv(path);
    require_header(f, path, {"age_group", "delta", "total_change", "mu_star_hat", "sigma",
                             "scaled_index"});
    MorrisMatrix matrix;
    for (std::size_t i = 0; i < f.rows.size(); ++i) {
        AgeGroup g = parse_age_group(f.rows[i][0]);
        MorrisResult r;
        r.delta = parse_double_field(f.rows[i][1], path, f.line[i]);
        r.total_change = parse_double_field(f.rows[i][2], path, f.line[i]);
        r.mu_star_hat = parse_double_field(f.rows[i][3], path, f.line[i]);
        r.sigma = parse_double_field(f.rows[i][4], path, f.line[i]);
        r.scaled_index = parse_double_field(f.rows[i][5], path, f.line[i]);
        matrix[g].results.push_back(r);
    }
    for (auto& [g, sweep] : matrix) {
        (void)g;
        std::sort(sweep.results.begin(), sweep.results.end(),
                  [](const MorrisResult& a, const MorrisResult& b) { return a.delta < b.delta; });
    }
    return matrix;
}

void write_weekly_cases(const PipelineConfig& cfg) {
    CsvFile f = read_csv(cfg.age_cases_csv);
    require_header(f, cfg.age_cases_csv, {"date", "age_group", "cases"});
    std::map<Date, AgeGroupVector> weeks;
    for (std::size_t i = 0; i < f.rows.size(); ++i) {
        Date d;
        try {
            d = parse_date(f.rows[i][0]);
        } catch (const ValidationError& e) {
            throw ValidationError(cfg.age_cases_csv.string() + ":" + std::to_string(f.line[i]) +
                                  ": " + e.what());
        }
        AgeGroup g;
        try {
            g = parse_age_group(f.rows[i][1]);
        } catch (const ValidationError& e) {
            throw ValidationError(cfg.age_cases_csv.string() + ":" + std::to_string(f.line[i]) +
                                  ": " + e.what());
        }
        long long cases = parse_count_field(f.rows[i][2], cfg.age_cases_csv, f.line[i]);
        Date week_start = d - std::chrono::days{day_of_week_monday0(d)};
        auto [it, inserted] = weeks.try_emplace(week_start, AgeGroupVector{});
        (void)inserted;
        it->second[static_cast<std::size_t>(index_of(g))] += static_cast<double>(cases);
    }
    std::ostringstream out;
    out << "week_start";
    for (AgeGroup g : all_age_groups()) out << "," << age_group_label(g);
    out << "\n";
    for (const auto& [week, counts] : weeks) {
        out << format_date(week);
        for (double v : counts) out << "," << format_double(v);
        out << "\n";
    }
    write_file_atomic(cfg.output_dir / "weekly_cases_by_age.csv", out.str());
}

}  // namespace

void cmd_rank(const PipelineConfig& cfg) {
    if (cfg.ground_truth_csv.empty())
        throw UsageError("config key ground_truth_csv is required by the rank command");
    MorrisMatrix matrix = read_morris_results(cfg.output_dir / "morris_results.csv");
    AgeGroupVector morris_ranks = average_rank_over_deltas(matrix);

    GroundTruthAgeTable gt = load_ground_truth_age(cfg.ground_truth_csv);
    AgeGroupVector rates = infection_rates(gt.cases, gt.population);
    std::vector<double> rate_vec(rates.begin(), rates.end());
    std::vector<double> rate_ranks = rank_descending(rate_vec);

    AgeGroupVector infection_rank{};
    AgeGroupVector morris_rank_rounded{};
    for (int i = 0; i < kNumAgeGroups; ++i) {
        infection_rank[static_cast<std::size_t>(i)] =
            round_half(rate_ranks[static_cast<std::size_t>(i)]);
        morris_rank_rounded[static_cast<std::size_t>(i)] =
            round_half(morris_ranks[static_cast<std::size_t>(i)]);
    }
    AgeGroupVector diff = rank_difference(infection_rank, morris_rank_rounded);

    std::ostringstream out;
    out << "age_group,infection_rate,infection_rank,avg_morris_rank,difference\n";
    for (AgeGroup g : all_age_groups()) {
        std::size_t i = static_cast<std::size_t>(index_of(g));
        out << age_group_label(g) << "," << format_fixed(rates[i], 1) << ","
            << format_fixed(infection_rank[i], 1) << "," << format_fixed(morris_rank_rounded[i], 1)
            << "," << format_fixed(diff[i], 1) << "\n";
    }
    write_file_atomic(cfg.output_dir / "ranks.csv", out.str());

    double infection_sum = 0.0, morris_sum = 0.0;
    for (int i = 0; i < kNumAgeGroups; ++i) {
        infection_sum += rate_ranks[static_cast<std::size_t>(i)];
        morris_sum += morris_ranks[static_cast<std::size_t>(i)];
    }
    // Tied-everywhere rank vectors have no defined correlation; the summary
    // line is informational, so degrade to n/a instead of failing the command.
    std::vector<double> morris_vec(morris_ranks.begin(), morris_ranks.end());
    std::string rho_text;
    try {
        rho_text = format_fixed(spearman(rate_ranks, morris_vec), 3);
    } catch (const ValidationError&) {
        rho_text = "n/a";
    }

    std::ostringstream summary;
    summary << "age group | infection rate % | infection rank | avg morris rank | difference\n";
    for (AgeGroup g : all_age_groups()) {
        std::size_t i = static_cast<std::size_t>(index_of(g));
        summary << age_group_label(g) << " | " << format_fixed(rates[i], 1) << " | "
                << format_fixed(infection_rank[i], 1) << " | "
                << format_fixed(morris_rank_rounded[i], 1) << " | " << format_fixed(diff[i], 1)
                << "\n";
    }
    summary << "\nrank sum (infection) = " << format_double(infection_sum) << "\n";
    summary << "rank sum (morris) = " << format_double(morris_sum) << "\n";
    summary << "spearman(infection rank, morris rank) = " << rho_text << " (informational)\n";
    write_file_atomic(cfg.output_dir / "rank_summary.txt", summary.str());

    if (!cfg.age_cases_csv.empty()) write_weekly_cases(cfg);
    std::cout << "wrote ranks.csv and rank_summary.txt\n";
}

}  // namespace sensi
