#pragma once
// Run configuration for the command-line tool (JSON).
//
// {
//   "data": {"path": "prices.csv", "layout": "auto"}        // or
//   "data": {"synthetic": {"distribution": "t", "nu": 3, "assets": 3,
//                          "observations": 2000, "scale": 0.01, "correlation": 0}},
//   "universe": "all" | {"mode": "tickers", "tickers": [...]}
//             | {"mode": "alpha_groups", "cut_points": [2.2, 2.6], "groups": [1, 2, 3]},
//   "window_len": 1500, "tail_fraction": 0.1, "rebalance_every": 1,
//   "strategies": ["ERI", "MV", "EW"], "ridge": 0.0,
//   "solver": {"tolerance": 1e-7, "max_iterations": 5000},
//   "initial_value": 100, "histogram_bin_width": 0.1,
//   "output_dir": "out", "seed": 0
// }
//
// Relative paths are resolved against the directory holding the config file.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "eri/error.hpp"
#include "eri/market_data.hpp"
#include "eri/strategies.hpp"
#include "eri/synthetic.hpp"

namespace eri {

enum class UniverseMode { All, Tickers, AlphaGroups };

struct RunConfig {
    std::optional<std::filesystem::path> data_path;
    std::string data_path_text;  // as written in the file
    CsvLayout layout = CsvLayout::Auto;
    std::optional<SyntheticPanelSpec> synthetic;

    UniverseMode universe = UniverseMode::All;
    std::vector<std::string> tickers;
    std::vector<double> cut_points{2.2, 2.6};
    std::vector<int> groups{1, 2, 3};

    std::size_t window_len = 1500;
    double tail_fraction = 0.10;
    std::size_t rebalance_every = 1;
    std::vector<StrategyKind> strategies{StrategyKind::ERI, StrategyKind::MV, StrategyKind::EW};
    double ridge = 0.0;
    SolverOptions solver;
    double initial_value = 100.0;
    double histogram_bin_width = 0.1;
    std::filesystem::path output_dir = "out";
    std::uint64_t seed = 0;

    [[nodiscard]] StrategySpec strategy_spec(StrategyKind kind) const {
        switch (kind) {
            case StrategyKind::ERI: return StrategySpec::eri(StaticFraction{tail_fraction}, solver);
            case StrategyKind::MV: return StrategySpec::mv(ridge, solver);
            case StrategyKind::EW: break;
        }
        return StrategySpec::ew();
    }
};

class ConfigError : public Error {
public:
    ConfigError(std::size_t line, const std::string& message)
        : Error(ErrorCode::InvalidConfig, "line " + std::to_string(line) + ": " + message), line_(line) {}
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

namespace detail {

using ConfigJson = nlohmann::json;

// 1-based line of the first occurrence of "key", or 1.
inline std::size_t line_of_key(const std::string& text, const std::string& key) {
    const auto pos = text.find("\"" + key + "\"");
    if (pos == std::string::npos) return 1;
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

class ConfigReader {
public:
    explicit ConfigReader(std::string text) : text_(std::move(text)) {}

    [[noreturn]] void error(const std::string& key, const std::string& message) const {
        throw ConfigError(line_of_key(text_, key), message);
    }

    template <typename T>
    T get(const ConfigJson& obj, const std::string& key, const T& fallback) const {
        if (!obj.contains(key)) return fallback;
        if constexpr (std::is_unsigned_v<T>) {
            if (!obj.at(key).is_number_unsigned()) error(key, "field '" + key + "' must be a non-negative integer");
        }
        try {
            return obj.at(key).get<T>();
        } catch (const nlohmann::json::exception&) {
            error(key, "field '" + key + "' has the wrong type");
        }
    }

    void check_keys(const ConfigJson& obj, const std::set<std::string>& allowed, const std::string& where) const {
        for (const auto& [k, _] : obj.items()) {
            if (!allowed.contains(k)) error(k, "unknown field '" + k + "' in " + where);
        }
    }

private:
    std::string text_;
};

}  // namespace detail

inline std::string layout_name(CsvLayout layout) {
    switch (layout) {
        case CsvLayout::Wide: return "wide";
        case CsvLayout::Long: return "long";
        case CsvLayout::Auto: break;
    }
    return "auto";
}

/// Parses and validates a config. Errors carry the offending line.
inline RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = ".") {
    using detail::ConfigJson;
    ConfigJson root;
    try {
        root = ConfigJson::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        // byte offset -> line
        const auto upto = std::min<std::size_t>(e.byte, text.size());
        const auto line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n'));
        throw ConfigError(line, std::string("malformed JSON: ") + e.what());
    }
    const detail::ConfigReader rd(text);
    if (!root.is_object()) throw ConfigError(1, "config must be a JSON object");
    rd.check_keys(root,
                  {"data", "universe", "window_len", "tail_fraction", "rebalance_every", "strategies", "ridge", "solver",
                   "initial_value", "histogram_bin_width", "output_dir", "seed"},
                  "config");

    RunConfig cfg;
    if (!root.contains("data")) throw ConfigError(1, "missing required field 'data'");
    const auto& data = root.at("data");
    if (!data.is_object()) rd.error("data", "'data' must be an object");
    rd.check_keys(data, {"path", "layout", "synthetic"}, "data");
    if (data.contains("path") == data.contains("synthetic")) {
        rd.error("data", "'data' needs exactly one of 'path' or 'synthetic'");
    }
    if (data.contains("path")) {
        cfg.data_path_text = rd.get<std::string>(data, "path", "");
        if (cfg.data_path_text.empty()) rd.error("path", "data path is empty");
        std::filesystem::path p(cfg.data_path_text);
        if (p.is_relative()) p = base_dir / p;
        if (!std::filesystem::exists(p)) rd.error("path", "data file '" + cfg.data_path_text + "' does not exist");
        cfg.data_path = p;
        const auto layout = rd.get<std::string>(data, "layout", "auto");
        if (layout == "auto") cfg.layout = CsvLayout::Auto;
        else if (layout == "wide") cfg.layout = CsvLayout::Wide;
        else if (layout == "long") cfg.layout = CsvLayout::Long;
        else rd.error("layout", "layout must be auto, wide or long");
    } else {
        const auto& syn = data.at("synthetic");
        if (!syn.is_object()) rd.error("synthetic", "'synthetic' must be an object");
        rd.check_keys(syn, {"distribution", "nu", "alpha", "assets", "observations", "scale", "correlation"}, "synthetic");
        SyntheticPanelSpec s;
        s.distribution = rd.get<std::string>(syn, "distribution", s.distribution);
        s.nu = rd.get<double>(syn, "nu", s.nu);
        s.alpha = rd.get<double>(syn, "alpha", s.alpha);
        s.assets = rd.get<std::size_t>(syn, "assets", s.assets);
        s.observations = rd.get<std::size_t>(syn, "observations", s.observations);
        s.scale = rd.get<double>(syn, "scale", s.scale);
        s.correlation = rd.get<double>(syn, "correlation", s.correlation);
        try {
            validate(to_sample_spec(s));
        } catch (const Error& e) {
            rd.error("synthetic", e.what());
        }
        cfg.synthetic = s;
    }

    if (root.contains("universe")) {
        const auto& u = root.at("universe");
        if (u.is_string()) {
            if (u.get<std::string>() != "all") rd.error("universe", "universe string must be \"all\"");
        } else if (u.is_object()) {
            rd.check_keys(u, {"mode", "tickers", "cut_points", "groups"}, "universe");
            const auto mode = rd.get<std::string>(u, "mode", "all");
            if (mode == "all") {
                cfg.universe = UniverseMode::All;
            } else if (mode == "tickers") {
                cfg.universe = UniverseMode::Tickers;
                cfg.tickers = rd.get<std::vector<std::string>>(u, "tickers", {});
                if (cfg.tickers.empty()) rd.error("tickers", "ticker universe is empty");
            } else if (mode == "alpha_groups") {
                cfg.universe = UniverseMode::AlphaGroups;
                cfg.cut_points = rd.get<std::vector<double>>(u, "cut_points", cfg.cut_points);
                if (cfg.cut_points.empty() || !std::is_sorted(cfg.cut_points.begin(), cfg.cut_points.end()) ||
                    std::adjacent_find(cfg.cut_points.begin(), cfg.cut_points.end()) != cfg.cut_points.end()) {
                    rd.error("cut_points", "cut points must be non-empty and strictly ascending");
                }
                std::vector<int> all;
                for (int g = 1; g <= static_cast<int>(cfg.cut_points.size()) + 1; ++g) all.push_back(g);
                cfg.groups = rd.get<std::vector<int>>(u, "groups", all);
                for (int g : cfg.groups) {
                    if (g < 1 || g > static_cast<int>(cfg.cut_points.size()) + 1) rd.error("groups", "group index out of range");
                }
            } else {
                rd.error("mode", "universe mode must be all, tickers or alpha_groups");
            }
        } else {
            rd.error("universe", "universe must be a string or an object");
        }
    }

    cfg.window_len = rd.get<std::size_t>(root, "window_len", cfg.window_len);
    if (cfg.window_len < kMinTailWindow) rd.error("window_len", "window_len must be at least 20");
    cfg.tail_fraction = rd.get<double>(root, "tail_fraction", cfg.tail_fraction);
    if (!(cfg.tail_fraction > 0.0 && cfg.tail_fraction < 1.0)) rd.error("tail_fraction", "tail_fraction must lie in (0,1)");
    cfg.rebalance_every = rd.get<std::size_t>(root, "rebalance_every", cfg.rebalance_every);
    if (cfg.rebalance_every < 1) rd.error("rebalance_every", "rebalance_every must be at least 1");
    if (root.contains("strategies")) {
        const auto names = rd.get<std::vector<std::string>>(root, "strategies", {});
        if (names.empty()) rd.error("strategies", "at least one strategy is required");
        cfg.strategies.clear();
        for (const auto& n : names) {
            try {
                cfg.strategies.push_back(parse_strategy_kind(n));
            } catch (const Error& e) {
                rd.error("strategies", e.what());
            }
        }
    }
    cfg.ridge = rd.get<double>(root, "ridge", cfg.ridge);
    if (cfg.ridge < 0.0) rd.error("ridge", "ridge must be non-negative");
    if (root.contains("solver")) {
        const auto& s = root.at("solver");
        if (!s.is_object()) rd.error("solver", "'solver' must be an object");
        rd.check_keys(s, {"tolerance", "max_iterations"}, "solver");
        cfg.solver.tolerance = rd.get<double>(s, "tolerance", cfg.solver.tolerance);
        cfg.solver.max_iterations = rd.get<std::size_t>(s, "max_iterations", cfg.solver.max_iterations);
        if (!(cfg.solver.tolerance > 0.0)) rd.error("tolerance", "solver tolerance must be positive");
        if (cfg.solver.max_iterations < 1) rd.error("max_iterations", "max_iterations must be positive");
    }
    cfg.initial_value = rd.get<double>(root, "initial_value", cfg.initial_value);
    if (!(cfg.initial_value > 0.0)) rd.error("initial_value", "initial_value must be positive");
    cfg.histogram_bin_width = rd.get<double>(root, "histogram_bin_width", cfg.histogram_bin_width);
    if (!(cfg.histogram_bin_width > 0.0)) rd.error("histogram_bin_width", "histogram_bin_width must be positive");
    if (root.contains("output_dir")) {
        std::filesystem::path out(rd.get<std::string>(root, "output_dir", "out"));
        cfg.output_dir = out.is_relative() ? base_dir / out : out;
    } else {
        cfg.output_dir = base_dir / "out";
    }
    cfg.seed = rd.get<std::uint64_t>(root, "seed", cfg.seed);
    if (cfg.synthetic) cfg.synthetic->seed = cfg.seed;
    return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(0, "cannot open config file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    auto base = path.parent_path();
    if (base.empty()) base = ".";
    return parse_config(buf.str(), base);
}

/// Computation-relevant settings, echoed into every report file. The output
/// location is deliberately left out so that reruns elsewhere are identical.
inline nlohmann::ordered_json config_provenance(const RunConfig& cfg) {
    nlohmann::ordered_json j;
    if (cfg.data_path) {
        j["data"] = {{"path", cfg.data_path_text}, {"layout", layout_name(cfg.layout)}};
    } else {
        const auto& s = *cfg.synthetic;
        j["data"] = {{"synthetic",
                      {{"distribution", s.distribution},
                       {"nu", s.nu},
                       {"alpha", s.alpha},
                       {"assets", s.assets},
                       {"observations", s.observations},
                       {"scale", s.scale},
                       {"correlation", s.correlation}}}};
    }
    switch (cfg.universe) {
        case UniverseMode::All: j["universe"] = {{"mode", "all"}}; break;
        case UniverseMode::Tickers: j["universe"] = {{"mode", "tickers"}, {"tickers", cfg.tickers}}; break;
        case UniverseMode::AlphaGroups:
            j["universe"] = {{"mode", "alpha_groups"}, {"cut_points", cfg.cut_points}, {"groups", cfg.groups}};
            break;
    }
    j["window_len"] = cfg.window_len;
    j["tail_fraction"] = cfg.tail_fraction;
    j["rebalance_every"] = cfg.rebalance_every;
    std::vector<std::string> names;
    for (auto k : cfg.strategies) names.emplace_back(to_string(k));
    j["strategies"] = names;
    j["ridge"] = cfg.ridge;
    j["solver"] = {{"tolerance", cfg.solver.tolerance}, {"max_iterations", cfg.solver.max_iterations}};
    j["initial_value"] = cfg.initial_value;
    j["histogram_bin_width"] = cfg.histogram_bin_width;
    j["seed"] = cfg.seed;
    return j;
}

}  // namespace eri
