#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sensi/errors.hpp"
#include "sensi/pipeline.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string age_group;
};

std::optional<sensi::AgeGroup> parse_group_arg(const std::string& label) {
    if (label.empty()) return std::nullopt;
    try {
        return sensi::parse_age_group(label);
    } catch (const sensi::ValidationError& e) {
        throw sensi::UsageError(e.what());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"age-group sensitivity analysis pipeline for county-level case forecasts"};
    app.require_subcommand(1);

    CommonArgs ingest_args, train_args, predict_args, morris_args, rank_args;
    std::uint64_t seed_value = 0;
    bool seed_given = false;
    bool absolute = false;

    CLI::App* ingest = app.add_subcommand("ingest", "build one panel per age group from raw CSVs");
    ingest->add_option("--config", ingest_args.config_path, "pipeline config file")->required();

    CLI::App* train = app.add_subcommand("train", "train the forecaster for one or all age groups");
    train->add_option("--config", train_args.config_path, "pipeline config file")->required();
    train->add_option("--age-group", train_args.age_group, "single age group label, e.g. 18-29");
    train->add_option("--seed", seed_value, "override the config seed")
        ->check(CLI::NonNegativeNumber)
        ->each([&](const std::string&) { seed_given = true; });

    CLI::App* predict = app.add_subcommand("predict", "write val/test predictions from a snapshot");
    predict->add_option("--config", predict_args.config_path, "pipeline config file")->required();
    predict->add_option("--age-group", predict_args.age_group, "single age group label");

    CLI::App* morris = app.add_subcommand("morris", "delta sweep of static-feature sensitivity");
    morris->add_option("--config", morris_args.config_path, "pipeline config file")->required();
    morris->add_option("--age-group", morris_args.age_group, "single age group label");
    morris->add_flag("--absolute", absolute, "accumulate absolute forecast changes");

    CLI::App* rank = app.add_subcommand("rank", "rank groups by infection rate and sensitivity");
    rank->add_option("--config", rank_args.config_path, "pipeline config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 4;
    }

    try {
        if (ingest->parsed()) {
            sensi::cmd_ingest(sensi::PipelineConfig::load(ingest_args.config_path));
        } else if (train->parsed()) {
            sensi::PipelineConfig cfg = sensi::PipelineConfig::load(train_args.config_path);
            std::optional<std::uint64_t> seed;
            if (seed_given) seed = seed_value;
            sensi::cmd_train(cfg, parse_group_arg(train_args.age_group), seed);
        } else if (predict->parsed()) {
            sensi::PipelineConfig cfg = sensi::PipelineConfig::load(predict_args.config_path);
            sensi::cmd_predict(cfg, parse_group_arg(predict_args.age_group));
        } else if (morris->parsed()) {
            sensi::PipelineConfig cfg = sensi::PipelineConfig::load(morris_args.config_path);
            cfg.absolute = absolute;
            sensi::cmd_morris(cfg, parse_group_arg(morris_args.age_group));
        } else if (rank->parsed()) {
            sensi::cmd_rank(sensi::PipelineConfig::load(rank_args.config_path));
        }
    } catch (const sensi::UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const sensi::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const sensi::MissingInputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
