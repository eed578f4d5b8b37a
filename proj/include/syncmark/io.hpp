#pragma once

// File formats. Tick CSV is bit-exact: header
// ts_ns,symbol,event,side,price,size,trader_class,bid,ask with event T|Q,
// side B|S|empty, trader_class H|N|U|empty, prices as decimals with at most
// six fractional digits, LF line endings. Model configuration is JSON.
// Result tables are CSV or JSON with 12 significant digits.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "analytics.hpp"
#include "errors.hpp"
#include "model.hpp"
#include "sim.hpp"
#include "ticks.hpp"

namespace syncmark {

// -- primitive formatting ----------------------------------------------------

// Decimal with <= 6 fractional digits, trailing zeros trimmed.
inline std::string format_price(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    std::string s(buf);
    const std::size_t dot = s.find('.');
    std::size_t end = s.size();
    while (end > dot + 1 && s[end - 1] == '0') --end;
    if (end == dot + 1) end = dot;
    s.resize(end);
    if (s == "-0") s = "0";
    return s;
}

inline std::string format_sig12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return std::string(buf);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path + " for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << content;
    if (!out) throw IoError("write failed for " + path);
}

// -- result tables -------------------------------------------------------------

enum class TableFormat : std::uint8_t { Csv, Json };

struct Table {
    using Cell = std::variant<std::monostate, std::string, double, std::int64_t>;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add_row(std::vector<Cell> row) {
        if (row.size() != columns.size())
            throw ValidationError("table", "row width does not match columns");
        rows.push_back(std::move(row));
    }
};

namespace detail {

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline std::string cell_text(const Table::Cell& cell) {
    if (std::holds_alternative<std::monostate>(cell)) return {};
    if (const auto* s = std::get_if<std::string>(&cell)) return csv_escape(*s);
    if (const auto* d = std::get_if<double>(&cell)) return format_sig12(*d);
    return std::to_string(std::get<std::int64_t>(cell));
}

} // namespace detail

inline std::string to_csv(const Table& table) {
    std::string out;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c) out += ',';
        out += detail::csv_escape(table.columns[c]);
    }
    out += '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            out += detail::cell_text(row[c]);
        }
        out += '\n';
    }
    return out;
}

inline std::string to_json(const Table& table) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) {
        nlohmann::ordered_json obj;
        for (std::size_t c = 0; c < row.size(); ++c) {
            const auto& cell = row[c];
            if (std::holds_alternative<std::monostate>(cell))
                obj[table.columns[c]] = nullptr;
            else if (const auto* s = std::get_if<std::string>(&cell))
                obj[table.columns[c]] = *s;
            else if (const auto* d = std::get_if<double>(&cell))
                obj[table.columns[c]] = *d;
            else
                obj[table.columns[c]] = std::get<std::int64_t>(cell);
        }
        rows.push_back(std::move(obj));
    }
    return rows.dump(2) + "\n";
}

inline void write_table(const Table& table, const std::string& path, TableFormat format) {
    write_file(path, format == TableFormat::Csv ? to_csv(table) : to_json(table));
}

// -- tick CSV -------------------------------------------------------------------

inline constexpr const char* kTickHeader = "ts_ns,symbol,event,side,price,size,trader_class,bid,ask";

inline std::string write_ticks_string(const TickSeries& ticks) {
    validate_ticks(ticks);
    std::string out = kTickHeader;
    out += '\n';
    for (const TickRecord& r : ticks) {
        out += std::to_string(r.ts_ns);
        out += ',';
        out += r.symbol;
        out += ',';
        out += r.event == EventType::Trade ? 'T' : 'Q';
        out += ',';
        if (r.side) out += side_code(*r.side);
        out += ',';
        if (r.price) out += format_price(*r.price);
        out += ',';
        if (r.size) out += std::to_string(*r.size);
        out += ',';
        if (r.trader_class) out += static_cast<char>(*r.trader_class);
        out += ',';
        if (r.bid) out += format_price(*r.bid);
        out += ',';
        if (r.ask) out += format_price(*r.ask);
        out += '\n';
    }
    return out;
}

inline void write_ticks(const TickSeries& ticks, const std::string& path) {
    write_file(path, write_ticks_string(ticks));
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

inline double parse_number(const std::string& s, std::size_t line, const char* what) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || s.empty())
        throw SchemaError(line, std::string("invalid ") + what + " '" + s + "'");
    return v;
}

inline std::int64_t parse_int(const std::string& s, std::size_t line, const char* what) {
    char* end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (end != s.c_str() + s.size() || s.empty())
        throw SchemaError(line, std::string("invalid ") + what + " '" + s + "'");
    return static_cast<std::int64_t>(v);
}

} // namespace detail

inline TickSeries read_ticks_string(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw SchemaError(1, "missing header");
    ++lineno;
    if (line == std::string(kTickHeader) + "\r") line.pop_back();
    if (line != kTickHeader) throw SchemaError(1, "unexpected header '" + line + "'");

    TickSeries out;
    std::map<std::string, std::int64_t> last_ts;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != 9) throw SchemaError(lineno, "expected 9 fields");
        TickRecord r;
        r.ts_ns = detail::parse_int(fields[0], lineno, "ts_ns");
        r.symbol = fields[1];
        if (r.symbol.empty()) throw SchemaError(lineno, "empty symbol");
        if (fields[2] == "T")
            r.event = EventType::Trade;
        else if (fields[2] == "Q")
            r.event = EventType::Quote;
        else
            throw SchemaError(lineno, "event must be T or Q, got '" + fields[2] + "'");
        if (!fields[3].empty()) {
            if (fields[3] == "B")
                r.side = Side::Buy;
            else if (fields[3] == "S")
                r.side = Side::Sell;
            else
                throw SchemaError(lineno, "side must be B, S or empty");
        }
        if (!fields[4].empty()) r.price = detail::parse_number(fields[4], lineno, "price");
        if (!fields[5].empty()) r.size = detail::parse_int(fields[5], lineno, "size");
        if (!fields[6].empty()) {
            if (fields[6] == "H")
                r.trader_class = TraderClass::Hft;
            else if (fields[6] == "N")
                r.trader_class = TraderClass::Investor;
            else if (fields[6] == "U")
                r.trader_class = TraderClass::Uncategorized;
            else
                throw SchemaError(lineno, "trader_class must be H, N, U or empty");
        }
        if (!fields[7].empty()) r.bid = detail::parse_number(fields[7], lineno, "bid");
        if (!fields[8].empty()) r.ask = detail::parse_number(fields[8], lineno, "ask");

        if (r.event == EventType::Trade) {
            if (!r.side || !r.price || !r.size)
                throw SchemaError(lineno, "trade rows need side, price and size");
            if (r.bid || r.ask) throw SchemaError(lineno, "trade rows must not carry bid/ask");
            if (*r.size < 1) throw SchemaError(lineno, "size must be >= 1");
        } else {
            if (!r.bid || !r.ask) throw SchemaError(lineno, "quote rows need bid and ask");
            if (r.side || r.price || r.size || r.trader_class)
                throw SchemaError(lineno, "quote rows must not carry trade fields");
            if (!(*r.bid <= *r.ask)) throw SchemaError(lineno, "bid exceeds ask");
        }
        const auto it = last_ts.find(r.symbol);
        if (it != last_ts.end() && r.ts_ns < it->second)
            throw SchemaError(lineno, "timestamps must be nondecreasing per symbol");
        last_ts[r.symbol] = r.ts_ns;
        out.push_back(std::move(r));
    }
    return out;
}

inline TickSeries read_ticks(const std::string& path) {
    return read_ticks_string(read_file(path));
}

// -- model configuration ----------------------------------------------------------

struct ModelConfig {
    std::vector<SecuritySpec> securities;
    CorrelationMatrix rho;
    Regime regime = Regime::Unsynchronized;
    Scenario scenario = Scenario::baseline();
    std::uint64_t seed = 0;
    std::int64_t periods = 1;
    GenOptions gen{};

    int index_of(const std::string& symbol) const {
        for (std::size_t i = 0; i < securities.size(); ++i)
            if (securities[i].symbol == symbol) return static_cast<int>(i);
        throw ValidationError("symbol", "unknown symbol " + symbol);
    }
};

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& obj, const char* key,
                                           const std::string& path) {
    if (!obj.contains(key)) throw ValidationError(path + key, "required field missing");
    return obj.at(key);
}

inline double number_field(const nlohmann::json& obj, const char* key, const std::string& path) {
    const auto& v = require_field(obj, key, path);
    if (!v.is_number()) throw ValidationError(path + key, "must be a number");
    return v.get<double>();
}

} // namespace detail

inline ModelConfig parse_config(const std::string& text) {
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ParseError("config root must be an object");

    ModelConfig cfg;
    const auto& securities = detail::require_field(root, "securities", "");
    if (!securities.is_array() || securities.empty())
        throw ValidationError("securities", "must be a non-empty array");
    for (std::size_t i = 0; i < securities.size(); ++i) {
        const std::string path = "securities[" + std::to_string(i) + "].";
        const auto& s = securities[i];
        if (!s.is_object()) throw ValidationError(path, "must be an object");
        SecuritySpec spec;
        const auto& sym = detail::require_field(s, "symbol", path);
        if (!sym.is_string() || sym.get<std::string>().empty())
            throw ValidationError(path + "symbol", "must be a non-empty string");
        spec.symbol = sym.get<std::string>();
        spec.mid = detail::number_field(s, "mid", path);
        spec.delta = detail::number_field(s, "delta", path);
        spec.phi = detail::number_field(s, "phi", path);
        if (!(spec.delta > 0.0)) throw ValidationError(path + "delta", "must be > 0");
        if (!(spec.phi >= 0.5 && spec.phi < 1.0))
            throw ValidationError(path + "phi", "must satisfy 0.5 <= phi < 1");
        if (!(spec.mid - spec.delta > 0.0))
            throw ValidationError(path + "mid", "mid - delta must be > 0");
        cfg.securities.push_back(std::move(spec));
    }
    for (std::size_t i = 0; i < cfg.securities.size(); ++i)
        for (std::size_t j = i + 1; j < cfg.securities.size(); ++j)
            if (cfg.securities[i].symbol == cfg.securities[j].symbol)
                throw ValidationError("securities[" + std::to_string(j) + "].symbol",
                                      "duplicate symbol " + cfg.securities[i].symbol);

    const int n = static_cast<int>(cfg.securities.size());
    const auto& rho = detail::require_field(root, "rho", "");
    if (!rho.is_array() || static_cast<int>(rho.size()) != n)
        throw ValidationError("rho", "must be an array of " + std::to_string(n) + " rows");
    cfg.rho = CorrelationMatrix(n);
    for (int i = 0; i < n; ++i) {
        const auto& row = rho[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<int>(row.size()) != n)
            throw ValidationError("rho[" + std::to_string(i) + "]",
                                  "must be an array of " + std::to_string(n) + " numbers");
        for (int j = 0; j < n; ++j) {
            const auto& v = row[static_cast<std::size_t>(j)];
            if (!v.is_number())
                throw ValidationError("rho[" + std::to_string(i) + "][" + std::to_string(j) + "]",
                                      "must be a number");
            if (j >= i) cfg.rho.set(i, j, v.get<double>());
            else if (cfg.rho(i, j) != v.get<double>())
                throw ValidationError("rho[" + std::to_string(i) + "][" + std::to_string(j) + "]",
                                      "matrix must be symmetric");
        }
    }
    cfg.rho.validate();

    const auto& regime = detail::require_field(root, "regime", "");
    const std::string regime_s = regime.is_string() ? regime.get<std::string>() : "";
    if (regime_s == "synchronized" || regime_s == "sync")
        cfg.regime = Regime::Synchronized;
    else if (regime_s == "unsynchronized" || regime_s == "unsync")
        cfg.regime = Regime::Unsynchronized;
    else
        throw ValidationError("regime", "must be 'synchronized' or 'unsynchronized'");

    if (root.contains("scenario")) {
        const auto& sc = root.at("scenario");
        if (!sc.is_object()) throw ValidationError("scenario", "must be an object");
        const auto& kind = detail::require_field(sc, "kind", "scenario.");
        const std::string kind_s = kind.is_string() ? kind.get<std::string>() : "";
        if (kind_s == "baseline") {
            cfg.scenario = Scenario::baseline();
        } else if (kind_s == "misconception") {
            cfg.scenario =
                Scenario::misconception(detail::number_field(sc, "sell_prob", "scenario."));
        } else if (kind_s == "shock") {
            const auto& sym = detail::require_field(sc, "security", "scenario.");
            if (!sym.is_string()) throw ValidationError("scenario.security", "must be a symbol");
            std::optional<double> breaker;
            if (sc.contains("breaker")) breaker = detail::number_field(sc, "breaker", "scenario.");
            cfg.scenario = Scenario::shock(cfg.index_of(sym.get<std::string>()),
                                           detail::number_field(sc, "size", "scenario."), breaker);
        } else {
            throw ValidationError("scenario.kind",
                                  "must be 'baseline', 'misconception' or 'shock'");
        }
        cfg.scenario.validate(n);
    }

    if (root.contains("seed")) {
        const auto& v = root.at("seed");
        if (!v.is_number_unsigned()) throw ValidationError("seed", "must be a nonnegative integer");
        cfg.seed = v.get<std::uint64_t>();
    }
    if (root.contains("periods")) {
        const auto& v = root.at("periods");
        if (!v.is_number_integer() || v.get<std::int64_t>() < 1)
            throw ValidationError("periods", "must be an integer >= 1");
        cfg.periods = v.get<std::int64_t>();
    }
    if (root.contains("timing")) {
        const auto& tm = root.at("timing");
        if (!tm.is_object()) throw ValidationError("timing", "must be an object");
        auto pick = [&](const char* key, std::int64_t& field) {
            if (!tm.contains(key)) return;
            const auto& v = tm.at(key);
            if (!v.is_number_integer())
                throw ValidationError(std::string("timing.") + key, "must be an integer");
            field = v.get<std::int64_t>();
        };
        pick("period_ns", cfg.gen.timing.period_ns);
        pick("order_spacing_ns", cfg.gen.timing.order_spacing_ns);
        pick("sync_lag_ns", cfg.gen.timing.sync_lag_ns);
        pick("jitter_ns", cfg.gen.timing.jitter_ns);
        pick("terminal_offset_ns", cfg.gen.timing.terminal_offset_ns);
    }
    cfg.gen.timing.validate(n);
    if (root.contains("coverage")) {
        const auto& cov = root.at("coverage");
        if (!cov.is_array() || static_cast<int>(cov.size()) != n)
            throw ValidationError("coverage", "must be an array of " + std::to_string(n) + " numbers");
        for (std::size_t i = 0; i < cov.size(); ++i) {
            const auto& v = cov[i];
            if (!v.is_number() || !(v.get<double>() >= 0.0 && v.get<double>() <= 1.0))
                throw ValidationError("coverage[" + std::to_string(i) + "]",
                                      "must be a number in [0, 1]");
            cfg.gen.coverage.push_back(v.get<double>());
        }
    }
    return cfg;
}

inline ModelConfig load_config(const std::string& path) { return parse_config(read_file(path)); }

// Canonical serialization: parse(write(cfg)) == cfg and write is idempotent
// byte-for-byte.
inline std::string write_config(const ModelConfig& cfg) {
    nlohmann::ordered_json root;
    root["securities"] = nlohmann::ordered_json::array();
    for (const auto& s : cfg.securities) {
        nlohmann::ordered_json sec;
        sec["symbol"] = s.symbol;
        sec["mid"] = s.mid;
        sec["delta"] = s.delta;
        sec["phi"] = s.phi;
        root["securities"].push_back(std::move(sec));
    }
    const int n = static_cast<int>(cfg.securities.size());
    root["rho"] = nlohmann::ordered_json::array();
    for (int i = 0; i < n; ++i) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (int j = 0; j < n; ++j) row.push_back(cfg.rho(i, j));
        root["rho"].push_back(std::move(row));
    }
    root["regime"] = cfg.regime == Regime::Synchronized ? "synchronized" : "unsynchronized";
    nlohmann::ordered_json sc;
    switch (cfg.scenario.kind) {
        case Scenario::Kind::Baseline:
            sc["kind"] = "baseline";
            break;
        case Scenario::Kind::Misconception:
            sc["kind"] = "misconception";
            sc["sell_prob"] = cfg.scenario.sell_prob;
            break;
        case Scenario::Kind::Shock:
            sc["kind"] = "shock";
            sc["security"] = cfg.securities[static_cast<std::size_t>(cfg.scenario.shock_security)]
                                 .symbol;
            sc["size"] = cfg.scenario.shock_size;
            if (cfg.scenario.breaker) sc["breaker"] = *cfg.scenario.breaker;
            break;
    }
    root["scenario"] = std::move(sc);
    root["seed"] = cfg.seed;
    root["periods"] = cfg.periods;
    nlohmann::ordered_json tm;
    tm["period_ns"] = cfg.gen.timing.period_ns;
    tm["order_spacing_ns"] = cfg.gen.timing.order_spacing_ns;
    tm["sync_lag_ns"] = cfg.gen.timing.sync_lag_ns;
    tm["jitter_ns"] = cfg.gen.timing.jitter_ns;
    tm["terminal_offset_ns"] = cfg.gen.timing.terminal_offset_ns;
    root["timing"] = std::move(tm);
    if (!cfg.gen.coverage.empty()) root["coverage"] = cfg.gen.coverage;
    return root.dump(2) + "\n";
}

// -- correlation matrix / sector files ----------------------------------------------

inline std::string write_correlation_csv(const LabeledCorrelation& lc) {
    std::string out = "symbol";
    for (const auto& s : lc.symbols) {
        out += ',';
        out += detail::csv_escape(s);
    }
    out += '\n';
    for (std::size_t i = 0; i < lc.symbols.size(); ++i) {
        out += detail::csv_escape(lc.symbols[i]);
        for (std::size_t j = 0; j < lc.symbols.size(); ++j) {
            out += ',';
            out += format_sig12(lc.corr(static_cast<int>(i), static_cast<int>(j)));
        }
        out += '\n';
    }
    return out;
}

inline LabeledCorrelation read_correlation_csv_string(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw SchemaError(1, "missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = detail::split_csv_line(line);
    if (header.size() < 2 || header[0] != "symbol")
        throw SchemaError(1, "expected header starting with 'symbol'");
    LabeledCorrelation lc;
    lc.symbols.assign(header.begin() + 1, header.end());
    const int n = static_cast<int>(lc.symbols.size());
    lc.corr = CorrelationMatrix(n);
    std::size_t lineno = 1;
    for (int i = 0; i < n; ++i) {
        if (!std::getline(in, line)) throw SchemaError(lineno + 1, "missing matrix row");
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto fields = detail::split_csv_line(line);
        if (static_cast<int>(fields.size()) != n + 1)
            throw SchemaError(lineno, "expected " + std::to_string(n + 1) + " fields");
        if (fields[0] != lc.symbols[static_cast<std::size_t>(i)])
            throw SchemaError(lineno, "row label does not match header order");
        for (int j = 0; j < n; ++j) {
            const double v =
                detail::parse_number(fields[static_cast<std::size_t>(j) + 1], lineno, "correlation");
            if (j >= i) lc.corr.set(i, j, v);
        }
    }
    lc.corr.validate();
    return lc;
}

inline LabeledCorrelation read_correlation_csv(const std::string& path) {
    return read_correlation_csv_string(read_file(path));
}

// CSV with header symbol,sector.
inline std::map<std::string, std::string> read_sectors_csv(const std::string& path) {
    const std::string text = read_file(path);
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw SchemaError(1, "missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "symbol,sector") throw SchemaError(1, "expected header 'symbol,sector'");
    std::map<std::string, std::string> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != 2) throw SchemaError(lineno, "expected 2 fields");
        out[fields[0]] = fields[1];
    }
    return out;
}

} // namespace syncmark
