#include "sensi/snapshot.hpp"

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sensi/csv.hpp"
#include "sensi/errors.hpp"

namespace sensi {

namespace {

constexpr int kFormatVersion = 1;

using nlohmann::json;

std::string role_name(ChannelRole role) {
    return role == ChannelRole::known_future ? "known_future" : "past_observed";
}

ChannelRole role_from(const std::string& text) {
    if (text == "known_future") return ChannelRole::known_future;
    if (text == "past_observed") return ChannelRole::past_observed;
    throw Error("snapshot: unknown channel role '" + text + "'");
}

json stats_to_json(const Scaler::ChannelStats& s, bool with_role) {
    json j{{"name", s.name}, {"mean", s.mean}, {"stdev", s.stdev}};
    if (with_role) j["role"] = role_name(s.role);
    return j;
}

Scaler::ChannelStats stats_from_json(const json& j, bool with_role) {
    Scaler::ChannelStats s;
    s.name = j.at("name").get<std::string>();
    s.mean = j.at("mean").get<double>();
    s.stdev = j.at("stdev").get<double>();
    if (with_role) s.role = role_from(j.at("role").get<std::string>());
    return s;
}

}  // namespace

void save_snapshot(const RecurrentForecaster& model, const std::filesystem::path& path) {
    const RecurrentConfig& cfg = model.config();
    const Scaler& sc = model.scaler();

    json j;
    j["format_version"] = kFormatVersion;
    j["model"] = "recurrent";
    j["config"] = {{"lag_days", cfg.window.lag_days},   {"horizon_days", cfg.window.horizon_days},
                   {"static_dim", cfg.static_dim},      {"past_dim", cfg.past_dim},
                   {"known_dim", cfg.known_dim},        {"hidden", cfg.hidden}};
    json dyn = json::array();
    for (const auto& s : sc.dynamic_stats()) dyn.push_back(stats_to_json(s, true));
    j["scaler"] = {{"target", stats_to_json(sc.target_stats(), false)}, {"dynamic", std::move(dyn)}};

    json params;
    const ParamSet& p = model.params();
    for (std::size_t i = 0; i < p.tensor_count(); ++i) {
        const Eigen::MatrixXd& m = p.tensor(i);
        std::vector<double> data(m.data(), m.data() + m.size());
        params[p.name_of(i)] = {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
    }
    j["params"] = std::move(params);
    write_file_atomic(path, j.dump(1));
}

RecurrentForecaster load_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingInputError("cannot open snapshot " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw Error("snapshot " + path.string() + " is not valid JSON: " + e.what());
    }
    try {
        int version = j.at("format_version").get<int>();
        if (version != kFormatVersion)
            throw Error("snapshot " + path.string() + " has format_version " +
                        std::to_string(version) + "; this build reads version " +
                        std::to_string(kFormatVersion));
        std::string kind = j.at("model").get<std::string>();
        if (kind != "recurrent")
            throw Error("snapshot " + path.string() + " holds model '" + kind + "'");

        const json& c = j.at("config");
        RecurrentConfig cfg;
        cfg.window.lag_days = c.at("lag_days").get<int>();
        cfg.window.horizon_days = c.at("horizon_days").get<int>();
        cfg.static_dim = c.at("static_dim").get<int>();
        cfg.past_dim = c.at("past_dim").get<int>();
        cfg.known_dim = c.at("known_dim").get<int>();
        cfg.hidden = c.at("hidden").get<int>();

        RecurrentForecaster seeded(cfg, 0);
        ParamSet params = seeded.params().zeros_like();
        const json& jp = j.at("params");
        if (jp.size() != params.tensor_count())
            throw ValidationError("snapshot " + path.string() + " holds " +
                                  std::to_string(jp.size()) + " tensors, expected " +
                                  std::to_string(params.tensor_count()));
        for (std::size_t i = 0; i < params.tensor_count(); ++i) {
            const std::string& name = params.name_of(i);
            if (!jp.contains(name))
                throw ValidationError("snapshot " + path.string() + " is missing tensor " + name);
            const json& tj = jp.at(name);
            Eigen::MatrixXd& m = params.tensor(i);
            long rows = tj.at("rows").get<long>();
            long cols = tj.at("cols").get<long>();
            if (rows != m.rows() || cols != m.cols())
                throw ValidationError("snapshot tensor " + name + " is " + std::to_string(rows) +
                                      "x" + std::to_string(cols) + ", expected " +
                                      std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
            const auto& data = tj.at("data");
            if (static_cast<long>(data.size()) != m.size())
                throw ValidationError("snapshot tensor " + name + " has " +
                                      std::to_string(data.size()) + " values, expected " +
                                      std::to_string(m.size()));
            for (long idx = 0; idx < m.size(); ++idx) m.data()[idx] = data[idx].get<double>();
        }

        const json& js = j.at("scaler");
        Scaler::ChannelStats target = stats_from_json(js.at("target"), false);
        std::vector<Scaler::ChannelStats> dynamic;
        for (const auto& dj : js.at("dynamic")) dynamic.push_back(stats_from_json(dj, true));

        RecurrentForecaster model(cfg, std::move(params));
        model.set_scaler(Scaler::from_stats(std::move(target), std::move(dynamic)));
        return model;
    } catch (const json::exception& e) {
        throw Error("snapshot " + path.string() + " is malformed: " + e.what());
    }
}

}  // namespace sensi
