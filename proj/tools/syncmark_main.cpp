// syncmark: multi-security market-model experiments and tick analytics.
// One binary, subcommand style; data goes to files or stdout, diagnostics to
// stderr. Exit codes: 0 success, 2 bad input, 1 runtime failure.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "syncmark/syncmark.hpp"

namespace {

using namespace syncmark;

TableFormat format_of(const std::string& name) {
    if (name == "csv") return TableFormat::Csv;
    if (name == "json") return TableFormat::Json;
    throw ValidationError("format", "must be 'csv' or 'json'");
}

Regime regime_of(const std::string& name) {
    if (name == "sync") return Regime::Synchronized;
    if (name == "unsync") return Regime::Unsynchronized;
    throw ValidationError("regime", "must be 'sync' or 'unsync'");
}

Side side_of(const std::string& name) {
    if (name == "buy") return Side::Buy;
    if (name == "sell") return Side::Sell;
    throw ValidationError("side", "must be 'buy' or 'sell'");
}

std::string regime_name(Regime r) {
    return r == Regime::Synchronized ? "sync" : "unsync";
}

void append_metrics_cells(std::vector<Table::Cell>& row, const MarketMetrics& m) {
    row.emplace_back(m.cost);
    row.emplace_back(m.error);
    row.emplace_back(m.informed_profit);
    row.emplace_back(m.cost_se);
    row.emplace_back(m.error_se);
    row.emplace_back(m.informed_profit_se);
}

struct MetricsArgs {
    std::string config, regime, method = "exact", target, side = "buy", out, format = "csv";
    std::uint64_t samples = 1'000'000;
    std::optional<std::uint64_t> seed;
};

int run_metrics(const MetricsArgs& a) {
    const ModelConfig cfg = load_config(a.config);
    const Regime regime = regime_of(a.regime);
    const Side side = side_of(a.side);
    const int target = a.target.empty() ? 0 : cfg.index_of(a.target);

    MarketMetrics m;
    if (a.method == "exact") {
        m = exact_metrics(cfg.securities, cfg.rho, regime, target, side, cfg.scenario);
    } else if (a.method == "mc") {
        m = mc_metrics(cfg.securities, cfg.rho, regime, target, side, a.samples,
                       a.seed.value_or(cfg.seed), cfg.scenario);
    } else {
        throw ValidationError("method", "must be 'exact' or 'mc'");
    }

    Table t;
    t.columns = {"target",   "side",         "regime",
                 "method",   "cost",         "error",
                 "informed_profit", "std_err_cost", "std_err_error",
                 "std_err_informed_profit"};
    std::vector<Table::Cell> row;
    row.emplace_back(cfg.securities[static_cast<std::size_t>(target)].symbol);
    row.emplace_back(std::string(1, side_code(side)));
    row.emplace_back(regime_name(regime));
    row.emplace_back(a.method);
    append_metrics_cells(row, m);
    t.add_row(std::move(row));
    write_table(t, a.out, format_of(a.format));
    return 0;
}

struct SweepArgs {
    std::string config, param, target, side = "buy", out, format = "csv";
    double from = 0.0, to = 0.0;
    int steps = 0;
};

int run_sweep(const SweepArgs& a) {
    const ModelConfig cfg = load_config(a.config);
    SweepParam param;
    if (a.param == "rho")
        param = SweepParam::Rho;
    else if (a.param == "phi")
        param = SweepParam::Phi;
    else
        throw ValidationError("param", "must be 'rho' or 'phi'");
    const Side side = side_of(a.side);
    const int target = a.target.empty() ? 0 : cfg.index_of(a.target);

    const auto rows = sweep(cfg.securities, cfg.rho, param, a.from, a.to, a.steps, target, side,
                            cfg.scenario);
    Table t;
    t.columns = {a.param,  "regime",          "cost",
                 "error",  "informed_profit", "std_err_cost",
                 "std_err_error", "std_err_informed_profit", "status"};
    for (const auto& r : rows) {
        std::vector<Table::Cell> row;
        row.emplace_back(r.value);
        row.emplace_back(regime_name(r.regime));
        if (r.skipped) {
            for (int k = 0; k < 6; ++k) row.emplace_back(std::monostate{});
            row.emplace_back(std::string("skipped"));
        } else {
            append_metrics_cells(row, r.metrics);
            row.emplace_back(std::string("ok"));
        }
        t.add_row(std::move(row));
    }
    write_table(t, a.out, format_of(a.format));
    return 0;
}

struct GenArgs {
    std::string config, out;
};

int run_gen_ticks(const GenArgs& a) {
    const ModelConfig cfg = load_config(a.config);
    const TickSeries ticks =
        gen_ticks(cfg.securities, cfg.rho, cfg.regime, cfg.periods, cfg.seed, cfg.scenario, cfg.gen);
    write_ticks(ticks, a.out);
    return 0;
}

struct CostErrorArgs {
    std::string ticks, out, summary, format = "csv";
    double horizon = 0.0;
    std::optional<double> vol_divisor;
};

int run_cost_error(const CostErrorArgs& a) {
    const TickSeries ticks = read_ticks(a.ticks);
    const CostErrorResult result = trade_cost_error(ticks, a.horizon, a.vol_divisor);

    Table per_trade;
    per_trade.columns = {"ts_ns", "symbol", "side",           "trader_class", "price",
                         "prevailing_mid", "horizon_mid", "cost",         "error"};
    for (const auto& row : result.rows) {
        std::vector<Table::Cell> cells;
        cells.emplace_back(row.ts_ns);
        cells.emplace_back(row.symbol);
        cells.emplace_back(std::string(1, side_code(row.side)));
        cells.emplace_back(row.trader_class
                               ? Table::Cell(std::string(1, static_cast<char>(*row.trader_class)))
                               : Table::Cell(std::monostate{}));
        cells.emplace_back(row.price);
        cells.emplace_back(row.prevailing_mid);
        cells.emplace_back(row.horizon_mid);
        cells.emplace_back(row.cost);
        cells.emplace_back(row.error);
        per_trade.add_row(std::move(cells));
    }
    write_table(per_trade, a.out, format_of(a.format));

    Table summary;
    summary.columns = {"group", "n", "mean_cost", "mean_error"};
    summary.add_row({std::string("all"), static_cast<std::int64_t>(result.rows.size()),
                     result.mean_cost, result.mean_error});
    for (const auto& g : result.groups) {
        std::string name = "class=";
        name += g.trader_class ? static_cast<char>(*g.trader_class) : '-';
        name += ",side=";
        name += side_code(g.side);
        summary.add_row({name, static_cast<std::int64_t>(g.count), g.mean_cost, g.mean_error});
    }
    summary.add_row({std::string("excluded:no_pre_quote"),
                     static_cast<std::int64_t>(result.excluded_no_pre_quote), std::monostate{},
                     std::monostate{}});
    summary.add_row({std::string("excluded:no_horizon_quote"),
                     static_cast<std::int64_t>(result.excluded_no_horizon_quote), std::monostate{},
                     std::monostate{}});
    if (a.summary.empty())
        std::cout << to_csv(summary);
    else
        write_table(summary, a.summary, format_of(a.format));
    return 0;
}

struct ResponseArgs {
    std::string ticks, sym_i, sym_j, out, format = "csv";
    double max_lag = 0.0, grid = 0.0, window_ms = 50.0;
    bool all_pairs = false, decompose = false;
};

int run_response(const ResponseArgs& a) {
    const TickSeries ticks = read_ticks(a.ticks);
    ResponseCurve curve;
    if (a.all_pairs) {
        curve = response_all_pairs(ticks, a.max_lag, a.grid, a.decompose, a.window_ms);
    } else {
        if (a.sym_i.empty() || a.sym_j.empty())
            throw ValidationError("symbol", "provide --i and --j, or --all-pairs");
        curve = a.decompose
                    ? decompose_response(ticks, a.sym_i, a.sym_j, a.max_lag, a.grid, a.window_ms)
                    : price_response(ticks, a.sym_i, a.sym_j, a.max_lag, a.grid);
    }
    Table t;
    t.columns = {"lag_s", "response", "std_err"};
    if (curve.decomposed) {
        t.columns.push_back("hft");
        t.columns.push_back("non_hft");
        t.columns.push_back("uncategorized");
    }
    for (std::size_t k = 0; k < curve.lags_s.size(); ++k) {
        std::vector<Table::Cell> row{curve.lags_s[k], curve.total[k], curve.se[k]};
        if (curve.decomposed) {
            row.emplace_back(curve.hft[k]);
            row.emplace_back(curve.investor[k]);
            row.emplace_back(curve.uncategorized[k]);
        }
        t.add_row(std::move(row));
    }
    write_table(t, a.out, format_of(a.format));
    std::cerr << "events=" << curve.events << " plateau=" << format_sig12(curve.plateau) << "\n";
    return 0;
}

struct CorrelateArgs {
    std::string ticks, out, format = "csv";
    double dt = 0.0;
    bool index = false, hft = false;
};

int run_correlate(const CorrelateArgs& a) {
    const TickSeries ticks = read_ticks(a.ticks);
    const ReturnsMatrix rm = returns(ticks, a.dt);
    if (!a.index && !a.hft) {
        write_file(a.out, write_correlation_csv(correlation_matrix(rm)));
        return 0;
    }
    Table t;
    t.columns = {"symbol"};
    if (a.index) t.columns.push_back("index_correlation");
    if (a.hft) t.columns.push_back("hft_fraction");
    for (const auto& sym : rm.symbols) {
        std::vector<Table::Cell> row{sym};
        if (a.index) row.emplace_back(index_correlation(rm, sym));
        if (a.hft) row.emplace_back(hft_fraction(ticks, sym));
        t.add_row(std::move(row));
    }
    write_table(t, a.out, format_of(a.format));
    return 0;
}

struct MstArgs {
    std::string corr, sectors, out, format = "csv";
};

int run_mst(const MstArgs& a) {
    const LabeledCorrelation lc = read_correlation_csv(a.corr);
    std::map<std::string, std::string> sectors;
    if (!a.sectors.empty()) sectors = read_sectors_csv(a.sectors);
    const MstEdges tree = mst(lc.corr, lc.symbols, sectors);

    Table t;
    t.columns = {"symbol_a", "symbol_b", "distance"};
    if (!sectors.empty()) {
        t.columns.push_back("sector_a");
        t.columns.push_back("sector_b");
    }
    auto sector_of = [&](const std::string& sym) -> Table::Cell {
        const auto it = sectors.find(sym);
        return it == sectors.end() ? Table::Cell(std::monostate{}) : Table::Cell(it->second);
    };
    for (const auto& e : tree.edges) {
        std::vector<Table::Cell> row{e.a, e.b, e.distance};
        if (!sectors.empty()) {
            row.push_back(sector_of(e.a));
            row.push_back(sector_of(e.b));
        }
        t.add_row(std::move(row));
    }
    write_table(t, a.out, format_of(a.format));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"synthetic multi-security market model and tick analytics"};
    app.require_subcommand(1);

    MetricsArgs metrics_args;
    auto* metrics = app.add_subcommand("metrics", "exact or Monte Carlo market metrics");
    metrics->add_option("--config", metrics_args.config, "model configuration JSON")->required();
    metrics->add_option("--regime", metrics_args.regime, "sync|unsync")->required();
    metrics->add_option("--method", metrics_args.method, "exact|mc")->required();
    metrics->add_option("--samples", metrics_args.samples, "Monte Carlo sample count");
    metrics->add_option("--seed", metrics_args.seed, "Monte Carlo seed (default: config seed)");
    metrics->add_option("--target", metrics_args.target, "target symbol (default: first)");
    metrics->add_option("--side", metrics_args.side, "buy|sell conditioning order");
    metrics->add_option("--out", metrics_args.out, "output table path")->required();
    metrics->add_option("--format", metrics_args.format, "csv|json");

    SweepArgs sweep_args;
    auto* sweep_cmd = app.add_subcommand("sweep", "metrics over a rho or phi grid, both regimes");
    sweep_cmd->add_option("--config", sweep_args.config, "model configuration JSON")->required();
    sweep_cmd->add_option("--param", sweep_args.param, "rho|phi")->required();
    sweep_cmd->add_option("--from", sweep_args.from, "grid start")->required();
    sweep_cmd->add_option("--to", sweep_args.to, "grid end")->required();
    sweep_cmd->add_option("--steps", sweep_args.steps, "grid points")->required();
    sweep_cmd->add_option("--target", sweep_args.target, "target symbol (default: first)");
    sweep_cmd->add_option("--side", sweep_args.side, "buy|sell conditioning order");
    sweep_cmd->add_option("--out", sweep_args.out, "output table path")->required();
    sweep_cmd->add_option("--format", sweep_args.format, "csv|json");

    GenArgs gen_args;
    auto* gen = app.add_subcommand("gen-ticks", "generate a synthetic tick series");
    gen->add_option("--config", gen_args.config, "model configuration JSON")->required();
    gen->add_option("--out", gen_args.out, "output tick CSV path")->required();

    CostErrorArgs ce_args;
    auto* cost_error = app.add_subcommand("cost-error", "per-trade transaction cost and error");
    cost_error->add_option("--ticks", ce_args.ticks, "tick CSV path")->required();
    cost_error->add_option("--horizon", ce_args.horizon, "error horizon, seconds")->required();
    cost_error->add_option("--vol-divisor", ce_args.vol_divisor, "volatility divisor");
    cost_error->add_option("--out", ce_args.out, "per-trade table path")->required();
    cost_error->add_option("--summary", ce_args.summary, "summary table path (default: stdout)");
    cost_error->add_option("--format", ce_args.format, "csv|json");

    ResponseArgs resp_args;
    auto* response = app.add_subcommand("response", "lagged cross-security price response");
    response->add_option("--ticks", resp_args.ticks, "tick CSV path")->required();
    response->add_option("--i", resp_args.sym_i, "responding symbol");
    response->add_option("--j", resp_args.sym_j, "conditioning symbol");
    response->add_flag("--all-pairs", resp_args.all_pairs, "pool all ordered pairs");
    response->add_option("--max-lag", resp_args.max_lag, "maximum lag, seconds")->required();
    response->add_option("--grid", resp_args.grid, "lag grid step, seconds")->required();
    response->add_flag("--decompose", resp_args.decompose, "split by trader class");
    response->add_option("--window", resp_args.window_ms, "attribution window, milliseconds");
    response->add_option("--out", resp_args.out, "output table path")->required();
    response->add_option("--format", resp_args.format, "csv|json");

    CorrelateArgs corr_args;
    auto* correlate = app.add_subcommand("correlate", "return correlations from ticks");
    correlate->add_option("--ticks", corr_args.ticks, "tick CSV path")->required();
    correlate->add_option("--dt", corr_args.dt, "sampling interval, seconds")->required();
    correlate->add_flag("--index", corr_args.index, "per-symbol correlation with the index");
    correlate->add_flag("--hft-fraction", corr_args.hft, "per-symbol HFT share-volume fraction");
    correlate->add_option("--out", corr_args.out, "output path")->required();
    correlate->add_option("--format", corr_args.format, "csv|json");

    MstArgs mst_args;
    auto* mst_cmd = app.add_subcommand("mst", "minimum spanning tree of a correlation matrix");
    mst_cmd->add_option("--corr", mst_args.corr, "correlation matrix CSV")->required();
    mst_cmd->add_option("--sectors", mst_args.sectors, "sector labels CSV (symbol,sector)");
    mst_cmd->add_option("--out", mst_args.out, "edge list path")->required();
    mst_cmd->add_option("--format", mst_args.format, "csv|json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (metrics->parsed()) return run_metrics(metrics_args);
        if (sweep_cmd->parsed()) return run_sweep(sweep_args);
        if (gen->parsed()) return run_gen_ticks(gen_args);
        if (cost_error->parsed()) return run_cost_error(ce_args);
        if (response->parsed()) return run_response(resp_args);
        if (correlate->parsed()) return run_correlate(corr_args);
        if (mst_cmd->parsed()) return run_mst(mst_args);
        std::cerr << app.help();
        return 2;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
