// eri_cli: batch front end for estimation, backtests and synthetic data.
//
//   eri_cli backtest --config run.json [--out DIR] [--strategy ERI|MV|EW]... [--rebalance N] [--seed U64]
//   eri_cli estimate --config run.json [--out DIR] [--seed U64]
//   eri_cli report   --config run.json [--out DIR]
//   eri_cli synth    [--distribution t|pareto] [--nu X] [--alpha X] [--assets N] [--observations N]
//                    [--scale X] [--correlation X] [--seed U64] [--out FILE]
//
// Exit codes: 0 success, 2 configuration or usage error, 3 data error.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "eri/config.hpp"
#include "eri/eri.hpp"

namespace fs = std::filesystem;
using eri::report::Json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

struct DataError : eri::Error {
    using eri::Error::Error;
};

struct Overrides {
    std::string config;
    std::optional<std::string> out;
    std::vector<std::string> strategies;
    std::optional<std::size_t> rebalance;
    std::optional<std::uint64_t> seed;
};

eri::RunConfig resolve_config(const Overrides& o) {
    if (o.config.empty()) throw eri::ConfigError(0, "--config is required");
    if (!fs::exists(o.config)) throw eri::ConfigError(0, "config file '" + o.config + "' does not exist");
    eri::RunConfig cfg = eri::load_config(o.config);
    if (o.out) cfg.output_dir = *o.out;
    if (!o.strategies.empty()) {
        cfg.strategies.clear();
        for (const auto& s : o.strategies) {
            try {
                cfg.strategies.push_back(eri::parse_strategy_kind(s));
            } catch (const eri::Error& e) {
                throw eri::ConfigError(0, "--strategy: " + e.message());
            }
        }
    }
    if (o.rebalance) {
        if (*o.rebalance < 1) throw eri::ConfigError(0, "--rebalance must be at least 1");
        cfg.rebalance_every = *o.rebalance;
    }
    if (o.seed) {
        cfg.seed = *o.seed;
        if (cfg.synthetic) cfg.synthetic->seed = *o.seed;
    }
    return cfg;
}

struct LoadedData {
    eri::PricePanel panel;
    std::vector<std::string> dropped;
};

LoadedData load_data(const eri::RunConfig& cfg) {
    try {
        if (cfg.synthetic) return {eri::synthetic_panel(*cfg.synthetic), {}};
        std::ifstream in(*cfg.data_path, std::ios::binary);
        if (!in) throw eri::Error(eri::ErrorCode::EmptyInput, "cannot open " + cfg.data_path->string());
        eri::CsvSchema schema;
        schema.layout = cfg.layout;
        schema.missing = eri::MissingPolicy::DropAsset;
        auto result = eri::load_prices_with_report(in, schema);
        for (const auto& t : result.dropped) std::cerr << "warning: dropped " << t << " (incomplete price history)\n";
        return {std::move(result.panel), std::move(result.dropped)};
    } catch (const eri::Error& e) {
        throw DataError(e.code(), e.message());
    }
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

void write_json(const fs::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

template <typename Writer>
void write_stream(const fs::path& path, Writer&& writer) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    writer(out);
}

Json provenance(const eri::RunConfig& cfg, const std::string& command) {
    Json p;
    p["tool"] = "eri_cli";
    p["command"] = command;
    p["config"] = eri::config_provenance(cfg);
    return p;
}

struct Run {
    std::string name;
    std::vector<std::string> universe;  // empty: all
};

struct UniversePlan {
    std::vector<Run> runs;  // per strategy-independent universe
    std::vector<std::string> notes;
    std::optional<eri::AlphaGrouping> grouping;
};

std::string first_backtest_date(const eri::PricePanel& panel, std::size_t window_len) {
    if (panel.num_dates() < window_len + 2) {
        throw DataError(eri::ErrorCode::InsufficientData,
                        "panel has " + std::to_string(panel.num_dates() - 1) + " return periods; window_len " +
                            std::to_string(window_len) + " needs at least " + std::to_string(window_len + 1));
    }
    return panel.dates()[window_len + 1];
}

UniversePlan plan_universes(const eri::RunConfig& cfg, const eri::PricePanel& panel) {
    UniversePlan plan;
    try {
        switch (cfg.universe) {
            case eri::UniverseMode::All: plan.runs.push_back({"", {}}); break;
            case eri::UniverseMode::Tickers:
                for (const auto& t : cfg.tickers) {
                    if (!panel.index_of(t)) throw eri::Error(eri::ErrorCode::UnknownTicker, "ticker " + t + " not in data");
                }
                plan.runs.push_back({"", cfg.tickers});
                break;
            case eri::UniverseMode::AlphaGroups: {
                const auto date = first_backtest_date(panel, cfg.window_len);
                plan.grouping = eri::build_grouping(panel, date, cfg.window_len, cfg.cut_points,
                                                    eri::StaticFraction{cfg.tail_fraction});
                for (int g : cfg.groups) {
                    auto members = plan.grouping->members(g);
                    if (members.empty()) {
                        plan.notes.push_back("group " + std::to_string(g) + " is empty; its runs were skipped");
                        continue;
                    }
                    plan.runs.push_back({"group" + std::to_string(g), std::move(members)});
                }
                break;
            }
        }
    } catch (const DataError&) {
        throw;
    } catch (const eri::Error& e) {
        throw DataError(e.code(), e.message());
    }
    return plan;
}

void write_grouping(const fs::path& path, const eri::AlphaGrouping& g, const Json& prov) {
    write_stream(path, [&](std::ostream& out) {
        eri::report::write_provenance_comment(out, prov);
        eri::csv::write_row(out, {"ticker", "alpha_hat", "group"});
        for (const auto& t : g.tickers) {
            eri::csv::write_row(out, {t, eri::csv::format_number(g.alpha_hat.at(t)), std::to_string(g.assignment.at(t))});
        }
    });
}

std::string run_label(eri::StrategyKind kind, const Run& run) {
    std::string label(eri::to_string(kind));
    if (!run.name.empty()) label += "_" + run.name;
    return label;
}

std::string notes_block(const std::vector<std::string>& notes) {
    std::string s;
    for (const auto& n : notes) s += "note: " + n + "\n";
    return s;
}

int cmd_backtest(const Overrides& o) {
    const auto cfg = resolve_config(o);
    const auto data = load_data(cfg);
    const auto plan = plan_universes(cfg, data.panel);
    fs::create_directories(cfg.output_dir);
    const Json prov = provenance(cfg, "backtest");

    std::vector<std::string> notes = plan.notes;
    for (const auto& t : data.dropped) notes.push_back("dropped " + t + " (incomplete price history)");
    if (plan.grouping) write_grouping(cfg.output_dir / "grouping.csv", *plan.grouping, prov);

    std::vector<std::pair<std::string, eri::StatsReport>> columns;
    for (const auto& run : plan.runs) {
        const eri::PricePanel panel = run.universe.empty() ? data.panel : data.panel.select(run.universe);
        const eri::LossMatrix losses = eri::compute_losses(panel);
        for (const auto kind : cfg.strategies) {
            eri::BacktestConfig bc;
            bc.window_len = cfg.window_len;
            bc.rebalance_every = cfg.rebalance_every;
            bc.strategy = cfg.strategy_spec(kind);
            bc.initial_value = cfg.initial_value;
            eri::BacktestLedger ledger;
            try {
                ledger = eri::run_backtest(panel, bc);
            } catch (const eri::Error& e) {
                throw DataError(e.code(), e.message());
            }
            const std::string label = run_label(kind, run);
            std::size_t fallbacks = 0;
            for (const auto& d : ledger.days) fallbacks += d.fallback ? 1 : 0;
            if (fallbacks > 0) {
                std::cerr << "warning: " << label << ": strategy failed on " << fallbacks
                          << " day(s); drifted weights were carried\n";
                notes.push_back(label + ": " + std::to_string(fallbacks) + " fallback day(s)");
            }
            Json run_prov = prov;
            run_prov["run"] = label;
            run_prov["universe_size"] = panel.num_assets();

            const auto stats = eri::summarize(ledger, losses);
            const auto pca = eri::daily_first_pca(ledger, losses);
            write_stream(cfg.output_dir / ("ledger_" + label + ".csv"),
                         [&](std::ostream& out) { eri::report::write_ledger_csv(out, ledger, run_prov); });
            write_json(cfg.output_dir / ("ledger_" + label + ".json"), eri::report::ledger_to_json(ledger, run_prov));
            write_json(cfg.output_dir / ("stats_" + label + ".json"), eri::report::stats_to_json(stats, run_prov));
            write_stream(cfg.output_dir / ("timeseries_" + label + ".csv"),
                         [&](std::ostream& out) { eri::report::write_timeseries_csv(out, ledger, pca, run_prov); });
            columns.emplace_back(label, stats);
        }
    }
    const std::string table = "# provenance: " + prov.dump() + "\n" + eri::report::comparison_table(columns) + notes_block(notes);
    write_text(cfg.output_dir / "comparison.txt", table);
    std::cout << eri::report::comparison_table(columns) << notes_block(notes);
    return kExitOk;
}

int cmd_report(const Overrides& o) {
    const auto cfg = resolve_config(o);
    const auto data = load_data(cfg);
    const auto plan = plan_universes(cfg, data.panel);
    const Json prov = provenance(cfg, "report");
    std::vector<std::pair<std::string, eri::StatsReport>> columns;
    std::vector<std::string> notes = plan.notes;
    for (const auto& run : plan.runs) {
        const eri::PricePanel panel = run.universe.empty() ? data.panel : data.panel.select(run.universe);
        const eri::LossMatrix losses = eri::compute_losses(panel);
        for (const auto kind : cfg.strategies) {
            const std::string label = run_label(kind, run);
            const fs::path path = cfg.output_dir / ("ledger_" + label + ".json");
            if (!fs::exists(path)) {
                notes.push_back("no ledger for " + label + " in " + cfg.output_dir.string());
                continue;
            }
            std::ifstream in(path, std::ios::binary);
            eri::BacktestLedger ledger;
            try {
                ledger = eri::report::ledger_from_json(Json::parse(in));
                columns.emplace_back(label, eri::summarize(ledger, losses));
            } catch (const std::exception& e) {
                throw DataError(eri::ErrorCode::MalformedCsv, path.string() + ": " + e.what());
            }
        }
    }
    if (columns.empty()) throw DataError(eri::ErrorCode::EmptyInput, "no ledgers found in " + cfg.output_dir.string());
    const std::string table = eri::report::comparison_table(columns);
    write_text(cfg.output_dir / "report.txt", "# provenance: " + prov.dump() + "\n" + table + notes_block(notes));
    std::cout << table << notes_block(notes);
    return kExitOk;
}

int cmd_estimate(const Overrides& o) {
    const auto cfg = resolve_config(o);
    const auto data = load_data(cfg);
    const Json prov = provenance(cfg, "estimate");
    const eri::TailRule rule = eri::StaticFraction{cfg.tail_fraction};

    eri::PricePanel panel = data.panel;
    if (cfg.universe == eri::UniverseMode::Tickers) {
        try {
            panel = data.panel.select(cfg.tickers);
        } catch (const eri::Error& e) {
            throw DataError(e.code(), e.message());
        }
    }
    const auto date = first_backtest_date(panel, cfg.window_len);
    fs::create_directories(cfg.output_dir);

    const eri::LossMatrix losses = eri::compute_losses(panel);
    const std::size_t w = cfg.window_len;
    write_stream(cfg.output_dir / "alpha_series.csv", [&](std::ostream& out) {
        eri::report::write_provenance_comment(out, prov);
        eri::csv::write_row(out, {"date", "alpha_hat", "k", "note"});
        for (std::size_t t = w; t < losses.num_periods(); ++t) {
            const auto window = losses.log_losses.middleRows(static_cast<Eigen::Index>(t - w), static_cast<Eigen::Index>(w));
            try {
                const auto est = eri::estimate_tail(window, rule);
                eri::csv::write_row(out, {losses.dates[t], eri::csv::format_number(est.alpha_hat), std::to_string(est.k), ""});
            } catch (const eri::Error& e) {
                eri::csv::write_row(out, {losses.dates[t], "", "", e.what()});
            }
        }
    });

    eri::AlphaGrouping grouping;
    try {
        grouping = eri::build_grouping(panel, date, w, cfg.cut_points, rule);
    } catch (const eri::Error& e) {
        throw DataError(e.code(), e.message());
    }
    write_grouping(cfg.output_dir / "per_stock_alpha.csv", grouping, prov);

    std::map<long long, std::size_t> bins;
    for (const auto& [_, a] : grouping.alpha_hat) bins[static_cast<long long>(std::floor(a / cfg.histogram_bin_width))]++;
    write_stream(cfg.output_dir / "alpha_histogram.csv", [&](std::ostream& out) {
        eri::report::write_provenance_comment(out, prov);
        eri::csv::write_row(out, {"bin_lower", "bin_upper", "count"});
        for (const auto& [b, count] : bins) {
            eri::csv::write_row(out, {eri::csv::format_number(static_cast<double>(b) * cfg.histogram_bin_width),
                                      eri::csv::format_number(static_cast<double>(b + 1) * cfg.histogram_bin_width),
                                      std::to_string(count)});
        }
    });
    std::cout << "estimated tail index on " << (losses.num_periods() - w) << " days; per-stock estimates as of " << date
              << " for " << grouping.tickers.size() << " assets\n";
    return kExitOk;
}

struct SynthFlags {
    std::optional<std::string> config;
    eri::SyntheticPanelSpec spec;
    std::string out = "synthetic_prices.csv";
};

int cmd_synth(SynthFlags f, const Overrides& o) {
    if (f.config) {
        Overrides co = o;
        co.config = *f.config;
        const auto cfg = resolve_config(co);
        if (!cfg.synthetic) throw eri::ConfigError(0, "config has no data.synthetic section");
        f.spec = *cfg.synthetic;
    }
    if (o.seed) f.spec.seed = *o.seed;
    try {
        eri::validate(eri::to_sample_spec(f.spec));
    } catch (const eri::Error& e) {
        throw eri::ConfigError(0, e.message());
    }
    fs::path out = f.out;
    if (fs::is_directory(out)) out /= "synthetic_prices.csv";
    const auto panel = eri::synthetic_panel(f.spec);
    write_stream(out, [&](std::ostream& s) { eri::write_prices(s, panel); });
    std::cout << "wrote " << panel.num_dates() << " dates x " << panel.num_assets() << " assets to " << out.string() << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Extreme-risk-index portfolio optimization and backtesting"};
    app.require_subcommand(1);

    Overrides o;
    auto add_common = [&](CLI::App* sub, bool with_strategy) {
        sub->add_option("--config", o.config, "Run configuration (JSON)");
        sub->add_option("--out", o.out, "Output directory");
        sub->add_option("--seed", o.seed, "Seed for synthetic data");
        if (with_strategy) {
            sub->add_option("--strategy", o.strategies, "Strategy to run (repeatable): ERI, MV or EW");
            sub->add_option("--rebalance", o.rebalance, "Trading days between rebalances");
        }
    };
    auto* backtest = app.add_subcommand("backtest", "Run rolling-window backtests and write reports");
    add_common(backtest, true);
    auto* estimate = app.add_subcommand("estimate", "Write tail-index time series and per-stock estimates");
    add_common(estimate, false);
    auto* report = app.add_subcommand("report", "Recompute statistics from ledgers in the output directory");
    add_common(report, true);

    SynthFlags sf;
    std::optional<std::string> synth_out;
    auto* synth = app.add_subcommand("synth", "Write a synthetic price panel (wide CSV)");
    synth->add_option("--config", sf.config, "Take the spec from data.synthetic of a config");
    synth->add_option("--distribution", sf.spec.distribution, "t, pareto (stable is unsupported)");
    synth->add_option("--nu", sf.spec.nu, "Degrees of freedom of the t distribution");
    synth->add_option("--alpha", sf.spec.alpha, "Pareto tail index");
    synth->add_option("--assets", sf.spec.assets, "Number of assets");
    synth->add_option("--observations", sf.spec.observations, "Number of return periods");
    synth->add_option("--scale", sf.spec.scale, "Daily loss scale");
    synth->add_option("--correlation", sf.spec.correlation, "Equicorrelation of the t scale matrix");
    synth->add_option("--seed", o.seed, "Seed");
    synth->add_option("--out", synth_out, "Output CSV file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*backtest) return cmd_backtest(o);
        if (*estimate) return cmd_estimate(o);
        if (*report) return cmd_report(o);
        if (*synth) {
            if (synth_out) sf.out = *synth_out;
            return cmd_synth(sf, o);
        }
    } catch (const eri::ConfigError& e) {
        std::cerr << "config error: " << (o.config.empty() ? std::string{} : o.config + ": ") << e.what() << "\n";
        return kExitConfig;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
