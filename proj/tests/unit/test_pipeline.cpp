#include <doctest.h>

#include <fstream>
#include <sstream>
#include <string>

#include "../support/synthetic.hpp"
#include "sensi/csv.hpp"
#include "sensi/errors.hpp"
#include "sensi/pipeline.hpp"

using namespace sensi;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& content) {
    std::ofstream out(p);
    out << content;
}

const std::array<double, 8> kFlatBetas = {4, 4, 4, 4, 4, 4, 4, 4};

// Small-model knobs shared by the pipeline tests.
const std::string kTinyTraining =
    "hidden = 4\n"
    "epochs = 2\n"
    "batch_size = 32\n"
    "patience = 3\n";

}  // namespace

TEST_CASE("config loads with relative paths and defaults") {
    auto dir = testsupport::scratch_dir("cfg_ok");
    auto fx = testsupport::write_pipeline_fixture(dir, 3, 75, kFlatBetas, kTinyTraining, 5);
    auto cfg = PipelineConfig::load(fx.config);
    CHECK(cfg.cases_csv == dir / "cases.csv");
    CHECK(cfg.output_dir == dir / "out");
    CHECK(cfg.window.lag_days == 13);
    CHECK(cfg.window.horizon_days == 15);
    CHECK(cfg.hidden == 4);
    CHECK(cfg.training.epochs == 2);
    CHECK(cfg.training.seed == 42);        // default
    CHECK(cfg.deltas.size() == 20);        // default grid
    CHECK(cfg.splits.train_start == fx.splits.train_start);
    CHECK(cfg.splits.test_end == fx.splits.test_end);
    CHECK(cfg.panel_dir(AgeGroup::y0_4) == dir / "out" / "panels" / "age_0_4");
    CHECK(cfg.model_path(AgeGroup::y75_plus) == dir / "out" / "models" / "age_75_plus.json");
}

TEST_CASE("config errors are usage errors") {
    auto dir = testsupport::scratch_dir("cfg_bad");
    CHECK_THROWS_AS(PipelineConfig::load(dir / "none.txt"), MissingInputError);

    spit(dir / "noeq.txt", "cases_csv\n");
    CHECK_THROWS_AS(PipelineConfig::load(dir / "noeq.txt"), UsageError);

    spit(dir / "dup.txt", "cases_csv = a\ncases_csv = b\n");
    CHECK_THROWS_AS(PipelineConfig::load(dir / "dup.txt"), UsageError);

    spit(dir / "missing.txt", "cases_csv = a\n");
    CHECK_THROWS_AS(PipelineConfig::load(dir / "missing.txt"), UsageError);

    std::string base =
        "cases_csv = a\npopulation_csv = b\nvaccination_csv = c\noutput_dir = out\n";
    spit(dir / "unknown.txt", base + "not_a_key = 1\n");
    CHECK_THROWS_AS(PipelineConfig::load(dir / "unknown.txt"), UsageError);

    spit(dir / "baddate.txt", base + "train_start = 2020-13-40\n");
    CHECK_THROWS_AS(PipelineConfig::load(dir / "baddate.txt"), UsageError);

    spit(dir / "gap.txt", base + "train_end = 2021-11-26\n");  // val no longer contiguous
    CHECK_THROWS_AS(PipelineConfig::load(dir / "gap.txt"), UsageError);

    spit(dir / "zerodelta.txt", base + "deltas = 0.01,0\n");
    CHECK_THROWS_AS(PipelineConfig::load(dir / "zerodelta.txt"), UsageError);

    spit(dir / "badepochs.txt", base + "epochs = none\n");
    CHECK_THROWS_AS(PipelineConfig::load(dir / "badepochs.txt"), UsageError);

    // Comments and blank lines are fine.
    spit(dir / "comments.txt", "# header comment\n\n" + base + "seed = 7\n");
    auto cfg = PipelineConfig::load(dir / "comments.txt");
    CHECK(cfg.training.seed == 7);
}

TEST_CASE("ingest builds one panel per age group") {
    auto dir = testsupport::scratch_dir("pipe_ingest");
    auto fx = testsupport::write_pipeline_fixture(dir, 4, 75, kFlatBetas, kTinyTraining, 11);
    auto cfg = PipelineConfig::load(fx.config);
    cmd_ingest(cfg);

    CHECK(fs::exists(cfg.output_dir / "ingest_log.txt"));
    for (AgeGroup g : all_age_groups()) {
        auto panel = import_panel(cfg.panel_dir(g));
        panel.validate();
        CHECK(panel.num_counties() == 4);
        CHECK(panel.num_days() == 75);
        CHECK(panel.num_static() == 1);
        REQUIRE(panel.dynamic.size() == 2);
        CHECK(panel.dynamic[0].name == "vaccination");
        CHECK(panel.dynamic[1].name == "sin_weekly");
    }
    // Group panels differ only in the static column.
    auto p0 = import_panel(cfg.panel_dir(AgeGroup::y0_4));
    auto p5 = import_panel(cfg.panel_dir(AgeGroup::y50_64));
    CHECK(p0.target == p5.target);
    CHECK(p0.static_features != p5.static_features);

    // A missing input surfaces as MissingInputError.
    fs::remove(dir / "vaccination.csv");
    CHECK_THROWS_AS(cmd_ingest(cfg), MissingInputError);
}

TEST_CASE("train, predict, and morris on a tiny fixture") {
    auto dir = testsupport::scratch_dir("pipe_train");
    const std::array<double, 8> betas = {9, 8, 7, 6, 5, 4, 3, 2};
    auto fx = testsupport::write_pipeline_fixture(dir, 5, 75, betas, kTinyTraining, 13);
    auto cfg = PipelineConfig::load(fx.config);
    cmd_ingest(cfg);

    SUBCASE("single group end to end") {
        cmd_train(cfg, AgeGroup::y0_4, std::nullopt);
        CHECK(fs::exists(cfg.model_path(AgeGroup::y0_4)));

        auto hist = read_csv(cfg.history_path(AgeGroup::y0_4));
        CHECK(hist.header ==
              std::vector<std::string>{"epoch", "train_loss", "val_rmse", "best_val_rmse"});
        CHECK(hist.rows.size() >= 1);
        CHECK(hist.rows.size() <= 2);

        auto rmse_csv = read_csv(cfg.output_dir / "rmse.csv");
        REQUIRE(rmse_csv.rows.size() == 1);
        CHECK(rmse_csv.rows[0][0] == "0-4");
        for (int col : {1, 2, 3}) {
            double v = std::stod(rmse_csv.rows[0][static_cast<size_t>(col)]);
            CHECK(std::isfinite(v));
            CHECK(v >= 0.0);
        }

        // Training the same group again with the same seed reproduces the row.
        auto first = slurp(cfg.output_dir / "rmse.csv");
        auto snap_first = slurp(cfg.model_path(AgeGroup::y0_4));
        cmd_train(cfg, AgeGroup::y0_4, std::nullopt);
        CHECK(slurp(cfg.output_dir / "rmse.csv") == first);
        CHECK(slurp(cfg.model_path(AgeGroup::y0_4)) == snap_first);

        // A different seed changes the snapshot.
        cmd_train(cfg, AgeGroup::y0_4, std::uint64_t{7});
        CHECK(slurp(cfg.model_path(AgeGroup::y0_4)) != snap_first);

        cmd_predict(cfg, AgeGroup::y0_4);
        auto preds = read_csv(cfg.output_dir / "predictions_age_0_4.csv");
        CHECK(preds.header ==
              std::vector<std::string>{"split", "fips", "date", "actual", "predicted"});
        // 5 counties x 15 days x {val, test}
        CHECK(preds.rows.size() == 5 * 15 * 2);
        CHECK(preds.rows[0][0] == "val");
        CHECK(preds.rows.back()[0] == "test");

        // Morris on one group only: 20 rows for the default grid.
        CHECK_THROWS_AS(cmd_morris(cfg, AgeGroup::y5_17), MissingInputError);  // not trained
        cmd_morris(cfg, AgeGroup::y0_4);
        auto morris = read_csv(cfg.output_dir / "morris_results.csv");
        CHECK(morris.header ==
              std::vector<std::string>{"age_group", "delta", "total_change", "mu_star_hat",
                                       "sigma", "scaled_index"});
        REQUIRE(morris.rows.size() == 20);
        for (auto& row : morris.rows) CHECK(row[0] == "0-4");
        // Deltas ascend.
        for (size_t i = 1; i < morris.rows.size(); ++i)
            CHECK(std::stod(morris.rows[i][1]) > std::stod(morris.rows[i - 1][1]));
    }

    SUBCASE("all groups and ranking") {
        cmd_train(cfg, std::nullopt, std::nullopt);
        auto rmse_csv = read_csv(cfg.output_dir / "rmse.csv");
        CHECK(rmse_csv.rows.size() == 8);

        cmd_morris(cfg, std::nullopt);
        auto morris = read_csv(cfg.output_dir / "morris_results.csv");
        CHECK(morris.rows.size() == 160);

        auto plot = read_csv(cfg.output_dir / "morris_vs_delta.csv");
        REQUIRE(plot.header.size() == 9);
        CHECK(plot.header[0] == "delta");
        CHECK(plot.header[1] == "0-4");
        CHECK(plot.rows.size() == 20);

        cmd_rank(cfg);
        auto ranks = read_csv(cfg.output_dir / "ranks.csv");
        CHECK(ranks.header ==
              std::vector<std::string>{"age_group", "infection_rate", "infection_rank",
                                       "avg_morris_rank", "difference"});
        REQUIRE(ranks.rows.size() == 8);
        double rank_sum = 0.0;
        for (auto& row : ranks.rows) rank_sum += std::stod(row[3]);
        CHECK(rank_sum == doctest::Approx(36.0).epsilon(1e-9));
        CHECK(fs::exists(cfg.output_dir / "rank_summary.txt"));
    }
}

TEST_CASE("rank reproduces the reference table from a prepared sweep") {
    auto dir = testsupport::scratch_dir("pipe_rank");
    auto fx = testsupport::write_pipeline_fixture(dir, 3, 75, kFlatBetas, kTinyTraining, 17);

    // Replace the fixture ground truth with the real county-summed table.
    spit(dir / "ground_truth_age.csv",
         "age_group,cases,population\n"
         "0-4,1249223,19392551\n"
         "5-17,6184296,54992661\n"
         "18-29,10018923,53013409\n"
         "30-39,7760789,45034182\n"
         "40-49,6767348,41003731\n"
         "50-64,8820765,63876118\n"
         "65-74,3289094,32346340\n"
         "75+,2505606,21790289\n");

    auto cfg = PipelineConfig::load(fx.config);
    fs::create_directories(cfg.output_dir);

    // Hand-written sweep whose per-delta order is constant: the average rank
    // per group is 8, 7, 1, 3.5, 2, 5, 6, 3.5.
    double scaled[8] = {10, 20, 80, 55, 70, 40, 30, 55};
    std::ostringstream m;
    m << "age_group,delta,total_change,mu_star_hat,sigma,scaled_index\n";
    for (int g = 0; g < 8; ++g)
        for (double delta : {-0.01, 0.01})
            m << age_group_label(all_age_groups()[static_cast<size_t>(g)]) << ',' << delta
              << ",0,0,1," << scaled[g] << '\n';
    spit(cfg.output_dir / "morris_results.csv", m.str());

    cmd_rank(cfg);
    CHECK(slurp(cfg.output_dir / "ranks.csv") ==
          "age_group,infection_rate,infection_rank,avg_morris_rank,difference\n"
          "0-4,6.4,8.0,8.0,0.0\n"
          "5-17,11.2,6.0,7.0,1.0\n"
          "18-29,18.9,1.0,1.0,0.0\n"
          "30-39,17.2,2.0,3.5,1.5\n"
          "40-49,16.5,3.0,2.0,1.0\n"
          "50-64,13.8,4.0,5.0,1.0\n"
          "65-74,10.2,7.0,6.0,1.0\n"
          "75+,11.5,5.0,3.5,1.5\n");

    auto summary = slurp(cfg.output_dir / "rank_summary.txt");
    CHECK(summary.find("spearman") != std::string::npos);

    // Ground truth with a missing group fails validation.
    spit(dir / "ground_truth_age.csv",
         "age_group,cases,population\n"
         "0-4,1,1\n");
    CHECK_THROWS_AS(cmd_rank(cfg), ValidationError);
}

TEST_CASE("rank without a ground truth path is a usage error") {
    auto dir = testsupport::scratch_dir("pipe_rank_nogt");
    auto fx = testsupport::write_pipeline_fixture(dir, 3, 75, kFlatBetas, kTinyTraining, 19);
    // Rewrite the config without the ground_truth_csv line.
    std::string cfg_text = slurp(fx.config);
    auto pos = cfg_text.find("ground_truth_csv");
    auto end = cfg_text.find('\n', pos);
    cfg_text.erase(pos, end - pos + 1);
    spit(fx.config, cfg_text);

    auto cfg = PipelineConfig::load(fx.config);
    CHECK_THROWS_AS(cmd_rank(cfg), UsageError);
}

TEST_CASE("weekly case aggregation starts weeks on Monday") {
    auto dir = testsupport::scratch_dir("pipe_weekly");
    auto fx = testsupport::write_pipeline_fixture(dir, 3, 75, kFlatBetas,
                                                  kTinyTraining + "age_cases_csv = age_cases.csv\n", 23);
    spit(dir / "age_cases.csv",
         "date,age_group,cases\n"
         "2020-03-02,0-4,5\n"
         "2020-03-04,0-4,3\n"
         "2020-03-08,5-17,2\n"
         "2020-03-09,0-4,7\n");
    spit(dir / "ground_truth_age.csv",
         "age_group,cases,population\n"
         "0-4,1249223,19392551\n"
         "5-17,6184296,54992661\n"
         "18-29,10018923,53013409\n"
         "30-39,7760789,45034182\n"
         "40-49,6767348,41003731\n"
         "50-64,8820765,63876118\n"
         "65-74,3289094,32346340\n"
         "75+,2505606,21790289\n");

    auto cfg = PipelineConfig::load(fx.config);
    fs::create_directories(cfg.output_dir);
    double scaled[8] = {10, 20, 80, 55, 70, 40, 30, 55};
    std::ostringstream m;
    m << "age_group,delta,total_change,mu_star_hat,sigma,scaled_index\n";
    for (int g = 0; g < 8; ++g)
        m << age_group_label(all_age_groups()[static_cast<size_t>(g)]) << ",0.01,0,0,1,"
          << scaled[g] << '\n';
    spit(cfg.output_dir / "morris_results.csv", m.str());

    cmd_rank(cfg);
    auto weekly = read_csv(cfg.output_dir / "weekly_cases_by_age.csv");
    REQUIRE(weekly.header.size() == 9);
    CHECK(weekly.header[0] == "week_start");
    REQUIRE(weekly.rows.size() == 2);
    CHECK(weekly.rows[0][0] == "2020-03-02");
    CHECK(std::stod(weekly.rows[0][1]) == 8.0);   // 0-4: 5 + 3
    CHECK(std::stod(weekly.rows[0][2]) == 2.0);   // 5-17 on Sunday of week 1
    CHECK(std::stod(weekly.rows[0][3]) == 0.0);
    CHECK(weekly.rows[1][0] == "2020-03-09");
    CHECK(std::stod(weekly.rows[1][1]) == 7.0);
}
