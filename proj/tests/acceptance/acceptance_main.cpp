// Acceptance gate for the sensitivity toolkit. Each criterion prints exactly
// one PASS/FAIL line; the exit code is the number of failures. argv[1] must be
// the path to the sensi CLI binary (used by the determinism criterion).

#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../support/synthetic.hpp"
#include "sensi/csv.hpp"
#include "sensi/dataset.hpp"
#include "sensi/errors.hpp"
#include "sensi/ingest.hpp"
#include "sensi/metrics.hpp"
#include "sensi/model.hpp"
#include "sensi/morris.hpp"
#include "sensi/pipeline.hpp"
#include "sensi/ranking.hpp"
#include "sensi/recurrent.hpp"

namespace fs = std::filesystem;
using namespace sensi;

namespace {

int failures = 0;

void report(int criterion, bool ok, const std::string& detail) {
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << criterion << ": " << detail << "\n";
    if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) { return format_double(v); }

// ---------------------------------------------------------------- criterion 1
// A forecaster that is exactly linear in the static feature, with weight 2.0,
// on a panel whose feature has population std 0.5, must score a scaled index
// of 1.0 at every grid delta, to 1e-9 relative, with spread below 1e-9, in
// under a second.
void criterion1() {
    auto t0 = std::chrono::steady_clock::now();
    WindowConfig w;
    auto panel = testsupport::random_panel(4, 43, 1, 2024);
    panel.static_features.col(0) << 0.0, 0.0, 1.0, 1.0;  // population std exactly 0.5

    LinearBaseline model(w, 1, 1);
    model.w_static[0] = 2.0;
    model.bias = 1.0;

    MorrisOptions opt;
    opt.window = w;
    auto sweep = morris_sweep(model, panel, opt, 0, default_deltas());

    bool ok = sweep.results.size() == 20;
    double lo = 1e300, hi = -1e300, worst = 0.0;
    for (auto& r : sweep.results) {
        double rel = std::abs(r.scaled_index - 1.0);
        worst = std::max(worst, rel);
        lo = std::min(lo, r.scaled_index);
        hi = std::max(hi, r.scaled_index);
        if (rel > 1e-9) ok = false;
    }
    if ((hi - lo) > 1e-9 * std::abs(hi)) ok = false;
    double elapsed = seconds_since(t0);
    if (elapsed >= 1.0) ok = false;
    report(1, ok,
           "linear oracle: max |scaled - 1| = " + fmt(worst) + ", spread = " + fmt(hi - lo) +
               ", " + fmt(elapsed) + "s");
}

// ---------------------------------------------------------------- criterion 2
// The tiled sweep must agree with a from-scratch brute-force evaluation on
// random small panels and a nonlinear model, both variants, 1e-12 relative,
// over at least 100 cases.
void criterion2() {
    std::mt19937_64 rng(777);
    int cases = 0, bad = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 34; ++trial) {
        int counties = 2 + static_cast<int>(rng() % 4);  // <= 5
        int k = 2 + static_cast<int>(rng() % 4);
        int tau = 2 + static_cast<int>(rng() % 4);
        int days = k + tau + static_cast<int>(rng() % 19);  // <= 30
        WindowConfig w;
        w.lag_days = k;
        w.horizon_days = tau;
        auto panel = testsupport::random_panel(counties, days, 1, rng());
        testsupport::NonlinearTestModel model(w, rng());
        MorrisOptions opt;
        opt.window = w;
        opt.absolute = (trial % 2) == 1;

        for (double delta : {-0.008, 0.0035, 0.01}) {
            // Brute force: fresh windows for base and perturbed panels, plain sums.
            auto anchors = tile_anchors(panel.num_days(), w, w.lag_days, panel.num_days() - 1);
            auto pert = perturb_static(panel, 0, delta);
            auto base_w = windows_at_anchors(panel, w, anchors);
            auto pert_w = windows_at_anchors(pert, w, anchors);
            double g = 0.0;
            for (size_t i = 0; i < base_w.size(); ++i) {
                auto y0 = model.predict(base_w[i]);
                auto y1 = model.predict(pert_w[i]);
                for (int j = 0; j < tau; ++j)
                    g += opt.absolute ? std::abs(y1[j] - y0[j]) : (y1[j] - y0[j]);
            }
            double cells = static_cast<double>(panel.num_counties()) *
                           static_cast<double>(anchors.size()) * tau;
            double denom = opt.absolute ? std::abs(delta) : delta;
            double expected = g / (cells * denom) * static_sigma(panel, 0);

            auto r = morris_index(model, panel, opt, 0, delta);
            double rel = std::abs(r.scaled_index - expected) /
                         std::max({std::abs(expected), std::abs(r.scaled_index), 1e-300});
            worst = std::max(worst, rel);
            if (rel > 1e-12) ++bad;
            ++cases;
        }
    }
    report(2, cases >= 100 && bad == 0,
           "brute-force equivalence on " + std::to_string(cases) + " cases, worst rel diff " +
               fmt(worst));
}

// ---------------------------------------------------------------- criterion 3
// Infection rates recomputed from the county-summed totals match the reference
// per-group rates to +-0.05 cases per 100 persons.
void criterion3() {
    AgeGroupVector cases = {1249223, 6184296, 10018923, 7760789,
                            6767348, 8820765, 3289094, 2505606};
    AgeGroupVector population = {19392551, 54992661, 53013409, 45034182,
                                 41003731, 63876118, 32346340, 21790289};
    AgeGroupVector reference = {6.4, 11.2, 18.9, 17.2, 16.5, 13.8, 10.2, 11.5};

    auto rates = infection_rates(cases, population);
    bool ok = true;
    double worst = 0.0;
    for (size_t g = 0; g < 8; ++g) {
        double diff = std::abs(rates[g] - reference[g]);
        worst = std::max(worst, diff);
        if (diff > 0.05) ok = false;
    }
    report(3, ok, "observed rates match to " + fmt(worst) + " (limit 0.05)");
}

// ---------------------------------------------------------------- criterion 4
// Ranking the reference rates reproduces the expected observed ranks, and the
// rank differences against the reference model ranks come out exactly.
void criterion4() {
    std::vector<double> rates = {6.4, 11.2, 18.9, 17.2, 16.5, 13.8, 10.2, 11.5};
    std::vector<double> expected_ranks = {8, 6, 1, 2, 3, 4, 7, 5};
    auto ranks = rank_descending(rates);
    bool ok = ranks == expected_ranks;

    AgeGroupVector observed{}, model{};
    AgeGroupVector model_ranks = {8, 7, 1, 3.5, 2, 5, 6, 3.5};
    AgeGroupVector expected_diff = {0, 1, 0, 1.5, 1, 1, 1, 1.5};
    for (size_t g = 0; g < 8; ++g) {
        observed[g] = ranks[g];
        model[g] = model_ranks[g];
    }
    auto diff = rank_difference(observed, model);
    for (size_t g = 0; g < 8; ++g)
        if (diff[g] != expected_diff[g]) ok = false;
    report(4, ok, "reference rank vectors and differences reproduced exactly");
}

// ---------------------------------------------------------------- criterion 5
// The shipped split dates cover 637/15/15 days and a 637-day training panel
// yields 610 sliding windows per county.
void criterion5() {
    auto splits = SplitConfig::defaults();
    splits.validate();
    long train_days = day_count(splits.train_start, splits.train_end);
    long val_days = day_count(splits.val_start, splits.val_end);
    long test_days = day_count(splits.test_start, splits.test_end);

    // A panel spanning the whole study period, split on the shipped dates.
    sensi::PanelDataset panel = testsupport::random_panel(2, 667, 1, 5);
    // Re-stamp the dates so they start on the shipped train_start.
    for (size_t i = 0; i < panel.dates.size(); ++i)
        panel.dates[i] = splits.train_start + std::chrono::days(static_cast<long>(i));
    auto parts = split_panel(panel, splits);

    WindowConfig w;
    auto windows = make_windows(parts.train, w);
    long per_county = static_cast<long>(windows.size()) / parts.train.num_counties();

    bool ok = train_days == 637 && val_days == 15 && test_days == 15 &&
              parts.train.num_days() == 637 && parts.val.num_days() == 15 &&
              parts.test.num_days() == 15 && per_county == 610;
    report(5, ok,
           "splits " + std::to_string(train_days) + "/" + std::to_string(val_days) + "/" +
               std::to_string(test_days) + " days, " + std::to_string(per_county) +
               " windows per county");
}

// ---------------------------------------------------------------- criterion 6
// On a 20x250 AR(1) panel with a static county effect, training must reach a
// validation RMSE no worse than the persistence forecast within 20 epochs and
// 10 minutes.
void criterion6() {
    auto t0 = std::chrono::steady_clock::now();
    testsupport::Ar1Options opt;
    opt.counties = 20;
    opt.days = 250;
    opt.beta = 6.0;
    opt.phi = 0.8;
    opt.noise = 1.0;
    opt.base_level = 10.0;
    opt.seed = 20240301;
    auto panel = testsupport::ar1_panel(opt);

    WindowConfig w;
    auto windows = make_windows(panel, w);
    std::vector<WindowSample> train, val;
    for (auto& s : windows)
        (s.anchor <= 204 ? train : val).push_back(s);

    RecurrentConfig rc;
    rc.window = w;
    rc.static_dim = 1;
    rc.past_dim = 0;
    rc.known_dim = 1;
    rc.hidden = 24;

    RecurrentForecaster model(rc, 42);
    model.set_scaler(Scaler::fit(panel));

    TrainConfig tc;
    tc.epochs = 20;
    tc.batch_size = 128;
    tc.learning_rate = 2e-3;
    tc.patience = 20;
    tc.seed = 42;
    auto result = train_model(model, train, val, tc);

    std::vector<Eigen::VectorXd> predicted, actual;
    for (auto& s : val) {
        predicted.push_back(model.predict(s));
        actual.push_back(s.future_target);
    }
    double model_rmse = rmse(predicted, actual);
    double persist = persistence_rmse(val);
    double elapsed = seconds_since(t0);

    bool ok = !result.history.empty() && static_cast<int>(result.history.size()) <= 20 &&
              model_rmse <= persist && elapsed < 600.0;
    report(6, ok,
           "val RMSE " + fmt(model_rmse) + " vs persistence " + fmt(persist) + " after " +
               std::to_string(result.history.size()) + " epochs, " + fmt(elapsed) + "s");
}

// ---------------------------------------------------------------- criterion 7
// Central finite differences confirm the analytic gradient on 100 sampled
// parameters to 1e-4 relative error.
void criterion7() {
    auto panel = testsupport::random_panel(3, 40, 1, 31);
    WindowConfig w;
    RecurrentConfig rc;
    rc.window = w;
    rc.static_dim = 1;
    rc.past_dim = 1;
    rc.known_dim = 1;
    rc.hidden = 64;

    auto scaler = Scaler::fit(panel);
    auto windows = make_windows(panel, w);
    auto sample = scaler.transform(windows[windows.size() / 2]);

    RecurrentForecaster model(rc, 7);
    auto rep = gradient_check(model, sample, 100, 1e-4, 1e-5, 11);
    report(7, rep.passed && rep.entries.size() == 100,
           "gradient check on " + std::to_string(rep.entries.size()) +
               " parameters, max rel error " + fmt(rep.max_rel_error));
}

// ---------------------------------------------------------------- criterion 8
// End to end: panels generated with known, well-separated age effect sizes;
// ingest, train, and sweep through the pipeline; the average Morris ranking
// must recover the planted order with mean Spearman >= 0.9 over 5 seeds.
void criterion8() {
    auto dir = testsupport::scratch_dir("acceptance_recovery");
    std::array<double, 8> betas = {80, 70, 60, 50, 40, 30, 20, 10};
    auto fx = testsupport::write_pipeline_fixture(dir, 40, 140, betas,
                                                  "hidden = 16\n"
                                                  "epochs = 12\n"
                                                  "batch_size = 64\n"
                                                  "learning_rate = 0.003\n"
                                                  "patience = 12\n",
                                                  99);
    auto cfg = PipelineConfig::load(fx.config);
    cmd_ingest(cfg);

    std::vector<double> expected_ranks = {1, 2, 3, 4, 5, 6, 7, 8};
    double rho_sum = 0.0;
    std::string per_seed;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        cmd_train(cfg, std::nullopt, seed);
        cmd_morris(cfg, std::nullopt);

        // Average the per-delta rankings of the scaled indices.
        auto csv = read_csv(cfg.output_dir / "morris_results.csv");
        std::map<double, std::array<double, 8>> by_delta;
        for (size_t i = 0; i < csv.rows.size(); ++i) {
            auto& row = csv.rows[i];
            int g = index_of(parse_age_group(row[0]));
            by_delta[std::stod(row[1])][static_cast<size_t>(g)] = std::stod(row[5]);
        }
        std::array<double, 8> rank_sum{};
        for (auto& [delta, scaled] : by_delta) {
            auto ranks = rank_descending(std::vector<double>(scaled.begin(), scaled.end()));
            for (size_t g = 0; g < 8; ++g) rank_sum[g] += ranks[g];
        }
        std::vector<double> avg(8);
        for (size_t g = 0; g < 8; ++g)
            avg[g] = rank_sum[g] / static_cast<double>(by_delta.size());

        double rho = spearman(avg, expected_ranks);
        rho_sum += rho;
        per_seed += (per_seed.empty() ? "" : " ") + format_fixed(rho, 3);
    }
    double mean_rho = rho_sum / 5.0;
    report(8, mean_rho >= 0.9,
           "planted-order recovery, per-seed spearman [" + per_seed + "], mean " +
               format_fixed(mean_rho, 3));
}

// ---------------------------------------------------------------- criterion 9
// Two CLI runs with the same config and seed produce byte-identical outputs.
int run_cli(const std::string& binary, const std::string& args) {
    std::string cmd = binary + " " + args + " >/dev/null";
    int rc = std::system(cmd.c_str());
    if (rc == -1) return -1;
    if (WIFEXITED(rc)) return WEXITSTATUS(rc);
    return -2;
}

void criterion9(const std::string& binary) {
    std::array<double, 8> betas = {9, 8, 7, 6, 5, 4, 3, 2};
    std::string knobs =
        "hidden = 4\n"
        "epochs = 2\n"
        "batch_size = 32\n"
        "seed = 42\n";

    std::vector<fs::path> out_dirs;
    bool ran_ok = true;
    for (int run = 0; run < 2; ++run) {
        auto dir = testsupport::scratch_dir("acceptance_identical_" + std::to_string(run));
        auto fx = testsupport::write_pipeline_fixture(dir, 4, 75, betas, knobs, 3);
        std::string cfg_arg = "--config " + fx.config.string();
        for (const char* sub : {"ingest", "train", "predict", "morris", "rank"}) {
            int rc = run_cli(binary, std::string(sub) + " " + cfg_arg);
            if (rc != 0) {
                ran_ok = false;
                std::cout << "  (run " << run << " " << sub << " exited " << rc << ")\n";
            }
        }
        out_dirs.push_back(dir / "out");
    }

    bool identical = ran_ok;
    std::string first_diff;
    if (ran_ok) {
        // Collect relative paths from both trees.
        std::vector<fs::path> rel;
        for (auto& e : fs::recursive_directory_iterator(out_dirs[0]))
            if (e.is_regular_file()) rel.push_back(fs::relative(e.path(), out_dirs[0]));
        std::sort(rel.begin(), rel.end());
        size_t count_b = 0;
        for (auto& e : fs::recursive_directory_iterator(out_dirs[1]))
            if (e.is_regular_file()) ++count_b;
        if (count_b != rel.size()) {
            identical = false;
            first_diff = "file count mismatch";
        }
        for (auto& r : rel) {
            std::ifstream a(out_dirs[0] / r, std::ios::binary);
            std::ifstream b(out_dirs[1] / r, std::ios::binary);
            std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
            std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
            if (!b.good() && sb.empty() && !fs::exists(out_dirs[1] / r)) {
                identical = false;
                first_diff = r.string() + " missing in second run";
                break;
            }
            if (sa != sb) {
                identical = false;
                first_diff = r.string() + " differs";
                break;
            }
        }
    }
    report(9, identical,
           identical ? "two CLI runs produced byte-identical outputs"
                     : ("outputs differ: " + (first_diff.empty() ? "CLI run failed" : first_diff)));
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: acceptance <path-to-sensi-binary>\n";
        return 64;
    }
    std::string binary = argv[1];

    try {
        criterion1();
        criterion2();
        criterion3();
        criterion4();
        criterion5();
        criterion6();
        criterion7();
        criterion8();
        criterion9(binary);
    } catch (const std::exception& e) {
        std::cout << "FAIL: unexpected exception: " << e.what() << "\n";
        return 99;
    }

    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
              << "\n";
    return failures;
}
