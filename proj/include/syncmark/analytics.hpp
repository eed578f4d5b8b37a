#pragma once

// Empirical estimators over tick series: per-trade transaction cost and
// pricing error, lagged cross-security price response with trader-class
// decomposition, grid-sampled log returns, correlation structure, OLS, and
// the correlation-network minimum spanning tree.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "model.hpp"
#include "ticks.hpp"

namespace syncmark {

namespace detail {

struct SymbolQuotes {
    std::vector<std::int64_t> ts;
    std::vector<double> mid;
};

struct SymbolTrade {
    std::int64_t ts = 0;
    double price = 0.0;
    std::int64_t size = 0;
    Side side = Side::Buy;
    std::optional<TraderClass> cls;
};

struct TickIndex {
    std::vector<std::string> symbols; // insertion order of first appearance
    std::map<std::string, int> lookup;
    std::vector<SymbolQuotes> quotes;
    std::vector<std::vector<SymbolTrade>> trades;

    int require(const std::string& symbol) const {
        const auto it = lookup.find(symbol);
        if (it == lookup.end()) throw ValidationError("symbol", "unknown symbol " + symbol);
        return it->second;
    }
};

inline TickIndex index_ticks(const TickSeries& ticks) {
    if (ticks.empty()) throw EmptyInput("tick series is empty");
    TickIndex ix;
    for (const TickRecord& r : ticks) {
        auto it = ix.lookup.find(r.symbol);
        if (it == ix.lookup.end()) {
            it = ix.lookup.emplace(r.symbol, static_cast<int>(ix.symbols.size())).first;
            ix.symbols.push_back(r.symbol);
            ix.quotes.emplace_back();
            ix.trades.emplace_back();
        }
        const int s = it->second;
        if (r.event == EventType::Quote) {
            ix.quotes[s].ts.push_back(r.ts_ns);
            ix.quotes[s].mid.push_back(r.midpoint());
        } else {
            ix.trades[s].push_back(SymbolTrade{r.ts_ns, *r.price, *r.size, *r.side, r.trader_class});
        }
    }
    return ix;
}

// Index of the last quote with ts strictly before t; -1 when none.
inline std::ptrdiff_t quote_before(const SymbolQuotes& q, std::int64_t t) {
    const auto it = std::lower_bound(q.ts.begin(), q.ts.end(), t);
    return (it - q.ts.begin()) - 1;
}

// Index of the last quote with ts <= t; -1 when none.
inline std::ptrdiff_t quote_at_or_before(const SymbolQuotes& q, std::int64_t t) {
    const auto it = std::upper_bound(q.ts.begin(), q.ts.end(), t);
    return (it - q.ts.begin()) - 1;
}

// Index of the first quote with ts >= t; size() when none.
inline std::size_t quote_at_or_after(const SymbolQuotes& q, std::int64_t t) {
    return static_cast<std::size_t>(std::lower_bound(q.ts.begin(), q.ts.end(), t) - q.ts.begin());
}

inline std::int64_t to_ns(double seconds) {
    return static_cast<std::int64_t>(std::llround(seconds * 1e9));
}

} // namespace detail

// -- transaction cost / pricing error ---------------------------------------

struct CostErrorRow {
    std::int64_t ts_ns = 0;
    std::string symbol;
    Side side = Side::Buy;
    std::optional<TraderClass> trader_class;
    double price = 0.0;
    double prevailing_mid = 0.0;
    double horizon_mid = 0.0;
    double cost = 0.0;  // buy: p - m, sell: m - p (divided by the volatility divisor when given)
    double error = 0.0; // |p - horizon midpoint|
};

struct CostErrorGroup {
    std::optional<TraderClass> trader_class;
    Side side = Side::Buy;
    std::size_t count = 0;
    double mean_cost = 0.0;
    double mean_error = 0.0;
};

struct CostErrorResult {
    std::vector<CostErrorRow> rows;
    std::size_t excluded_no_pre_quote = 0;
    std::size_t excluded_no_horizon_quote = 0;
    double mean_cost = 0.0;
    double mean_error = 0.0;
    std::vector<CostErrorGroup> groups; // by (trader_class, side)

    // Mean over rows matching the given class/side filters; count reported.
    std::pair<double, double> filtered_means(std::optional<TraderClass> cls,
                                             std::optional<Side> side,
                                             const std::string& symbol = {},
                                             std::size_t* count_out = nullptr) const {
        double cost = 0.0, error = 0.0;
        std::size_t count = 0;
        for (const auto& row : rows) {
            if (cls && row.trader_class != cls) continue;
            if (side && row.side != *side) continue;
            if (!symbol.empty() && row.symbol != symbol) continue;
            cost += row.cost;
            error += row.error;
            ++count;
        }
        if (count_out) *count_out = count;
        if (count == 0) return {0.0, 0.0};
        return {cost / count, error / count};
    }
};

// Cost of each trade against the last midpoint strictly before it and error
// against the midpoint at the first quote at or after trade time + horizon.
// Trades missing either bracket are excluded and tallied.
inline CostErrorResult trade_cost_error(const TickSeries& ticks, double horizon_s,
                                        std::optional<double> vol_divisor = {}) {
    if (!(horizon_s > 0.0)) throw ValidationError("horizon", "must be > 0");
    if (vol_divisor && !(*vol_divisor > 0.0))
        throw ValidationError("vol_divisor", "must be > 0");
    const detail::TickIndex ix = detail::index_ticks(ticks);
    const std::int64_t horizon_ns = detail::to_ns(horizon_s);
    const double divisor = vol_divisor.value_or(1.0);

    CostErrorResult out;
    for (std::size_t s = 0; s < ix.symbols.size(); ++s) {
        const auto& quotes = ix.quotes[s];
        for (const auto& trade : ix.trades[s]) {
            const std::ptrdiff_t pre = detail::quote_before(quotes, trade.ts);
            if (pre < 0) {
                ++out.excluded_no_pre_quote;
                continue;
            }
            const std::size_t horizon = detail::quote_at_or_after(quotes, trade.ts + horizon_ns);
            if (horizon >= quotes.ts.size()) {
                ++out.excluded_no_horizon_quote;
                continue;
            }
            CostErrorRow row;
            row.ts_ns = trade.ts;
            row.symbol = ix.symbols[s];
            row.side = trade.side;
            row.trader_class = trade.cls;
            row.price = trade.price;
            row.prevailing_mid = quotes.mid[static_cast<std::size_t>(pre)];
            row.horizon_mid = quotes.mid[horizon];
            const double signed_cost = trade.side == Side::Buy ? trade.price - row.prevailing_mid
                                                               : row.prevailing_mid - trade.price;
            row.cost = signed_cost / divisor;
            row.error = std::abs(trade.price - row.horizon_mid) / divisor;
            out.rows.push_back(std::move(row));
        }
    }
    if (out.rows.empty() && out.excluded_no_pre_quote + out.excluded_no_horizon_quote == 0)
        throw EmptyInput("no trades in tick series");
    std::sort(out.rows.begin(), out.rows.end(), [](const CostErrorRow& a, const CostErrorRow& b) {
        return a.ts_ns != b.ts_ns ? a.ts_ns < b.ts_ns : a.symbol < b.symbol;
    });

    for (const auto& row : out.rows) {
        out.mean_cost += row.cost;
        out.mean_error += row.error;
        auto match = std::find_if(out.groups.begin(), out.groups.end(), [&](const CostErrorGroup& g) {
            return g.trader_class == row.trader_class && g.side == row.side;
        });
        if (match == out.groups.end()) {
            out.groups.push_back(CostErrorGroup{row.trader_class, row.side, 0, 0.0, 0.0});
            match = out.groups.end() - 1;
        }
        match->count += 1;
        match->mean_cost += row.cost;
        match->mean_error += row.error;
    }
    if (!out.rows.empty()) {
        out.mean_cost /= static_cast<double>(out.rows.size());
        out.mean_error /= static_cast<double>(out.rows.size());
    }
    for (auto& g : out.groups) {
        g.mean_cost /= static_cast<double>(g.count);
        g.mean_error /= static_cast<double>(g.count);
    }
    std::sort(out.groups.begin(), out.groups.end(), [](const CostErrorGroup& a, const CostErrorGroup& b) {
        const char ca = a.trader_class ? static_cast<char>(*a.trader_class) : ' ';
        const char cb = b.trader_class ? static_cast<char>(*b.trader_class) : ' ';
        return ca != cb ? ca < cb : side_code(a.side) < side_code(b.side);
    });
    return out;
}

// -- lagged cross-security price response ------------------------------------

struct ResponseCurve {
    std::vector<double> lags_s;
    std::vector<double> total; // normalized so the final lag equals 1
    std::vector<double> se;
    std::vector<double> hft, investor, uncategorized; // present after decomposition
    double plateau = 0.0;                             // unnormalized value at the final lag
    std::size_t events = 0;
    bool decomposed = false;
};

inline constexpr std::size_t kMinResponseEvents = 30;

namespace detail {

struct ResponseAccum {
    std::size_t lags = 0;
    std::size_t events = 0;
    std::vector<double> sum, sumsq;
    std::vector<double> comp_h, comp_n, comp_u;

    explicit ResponseAccum(std::size_t l)
        : lags(l), sum(l, 0.0), sumsq(l, 0.0), comp_h(l, 0.0), comp_n(l, 0.0), comp_u(l, 0.0) {}
};

// Midpoint-change events of one symbol: (ts, signed change).
inline std::vector<std::pair<std::int64_t, double>> midpoint_changes(const SymbolQuotes& q) {
    std::vector<std::pair<std::int64_t, double>> events;
    for (std::size_t k = 1; k < q.ts.size(); ++k) {
        const double change = q.mid[k] - q.mid[k - 1];
        if (change != 0.0) events.emplace_back(q.ts[k], change);
    }
    return events;
}

// Trader class responsible for a midpoint change at ts: the class of the
// most recent same-symbol trade within the preceding window, else U.
inline TraderClass attribute_change(const std::vector<SymbolTrade>& trades, std::int64_t ts,
                                    std::int64_t window_ns) {
    auto it = std::upper_bound(trades.begin(), trades.end(), ts,
                               [](std::int64_t t, const SymbolTrade& tr) { return t < tr.ts; });
    if (it == trades.begin()) return TraderClass::Uncategorized;
    const SymbolTrade& last = *(it - 1);
    if (last.ts < ts - window_ns || !last.cls) return TraderClass::Uncategorized;
    return *last.cls;
}

// Accumulates the response of symbol `i` to midpoint changes of symbol `j`.
inline void accumulate_response(const TickIndex& ix, int i, int j, std::int64_t grid_ns,
                                std::size_t lags, bool decompose, std::int64_t window_ns,
                                ResponseAccum& acc) {
    const SymbolQuotes& qj = ix.quotes[static_cast<std::size_t>(j)];
    const SymbolQuotes& qi = ix.quotes[static_cast<std::size_t>(i)];
    const auto events = midpoint_changes(qj);
    std::vector<double> comp_lag(lags);
    for (const auto& [ts, change] : events) {
        const std::ptrdiff_t base_idx = quote_at_or_before(qi, ts);
        if (base_idx < 0) continue;
        const double base = qi.mid[static_cast<std::size_t>(base_idx)];
        const double direction = change > 0.0 ? 1.0 : -1.0;
        for (std::size_t k = 0; k < lags; ++k) {
            const std::int64_t horizon = ts + static_cast<std::int64_t>(k + 1) * grid_ns;
            const std::ptrdiff_t idx = quote_at_or_before(qi, horizon);
            const double value =
                direction * (qi.mid[static_cast<std::size_t>(idx)] - base);
            acc.sum[k] += value;
            acc.sumsq[k] += value * value;
        }
        acc.events += 1;
        if (!decompose) continue;
        std::fill(comp_lag.begin(), comp_lag.end(), 0.0);
        const std::size_t first = quote_at_or_after(qi, ts + 1);
        const std::int64_t last_ts = ts + static_cast<std::int64_t>(lags) * grid_ns;
        auto bucket = [&](std::int64_t when) {
            const std::int64_t offset = when - ts;
            return static_cast<std::size_t>((offset + grid_ns - 1) / grid_ns) - 1;
        };
        for (std::size_t k = first; k < qi.ts.size() && qi.ts[k] <= last_ts; ++k) {
            const double step = qi.mid[k] - qi.mid[k - 1];
            if (step == 0.0) continue;
            const TraderClass cls =
                attribute_change(ix.trades[static_cast<std::size_t>(i)], qi.ts[k], window_ns);
            const std::size_t b = bucket(qi.ts[k]);
            const double weighted = direction * step;
            auto& comp = cls == TraderClass::Hft        ? acc.comp_h
                         : cls == TraderClass::Investor ? acc.comp_n
                                                        : acc.comp_u;
            // A change contributes to every lag at or past its bucket.
            for (std::size_t l = b; l < lags; ++l) comp[l] += weighted;
        }
    }
}

inline ResponseCurve finish_response(const ResponseAccum& acc, double grid_s, bool decomposed) {
    if (acc.events < kMinResponseEvents)
        throw InsufficientEvents("need at least " + std::to_string(kMinResponseEvents) +
                                 " conditioning events, got " + std::to_string(acc.events));
    ResponseCurve curve;
    curve.events = acc.events;
    curve.decomposed = decomposed;
    const double inv = 1.0 / static_cast<double>(acc.events);
    std::vector<double> mean(acc.lags), se(acc.lags);
    for (std::size_t k = 0; k < acc.lags; ++k) {
        mean[k] = acc.sum[k] * inv;
        const double var = std::max(
            0.0, (acc.sumsq[k] - static_cast<double>(acc.events) * mean[k] * mean[k]) /
                     std::max<double>(1.0, static_cast<double>(acc.events - 1)));
        se[k] = std::sqrt(var * inv);
    }
    curve.plateau = mean.back();
    if (!(curve.plateau > 0.0))
        throw DegenerateNormalization("response plateau is not positive; cannot normalize");
    curve.lags_s.resize(acc.lags);
    curve.total.resize(acc.lags);
    curve.se.resize(acc.lags);
    for (std::size_t k = 0; k < acc.lags; ++k) {
        curve.lags_s[k] = grid_s * static_cast<double>(k + 1);
        curve.total[k] = mean[k] / curve.plateau;
        curve.se[k] = se[k] / curve.plateau;
    }
    if (decomposed) {
        curve.hft.resize(acc.lags);
        curve.investor.resize(acc.lags);
        curve.uncategorized.resize(acc.lags);
        for (std::size_t k = 0; k < acc.lags; ++k) {
            curve.hft[k] = acc.comp_h[k] * inv / curve.plateau;
            curve.investor[k] = acc.comp_n[k] * inv / curve.plateau;
            curve.uncategorized[k] = acc.comp_u[k] * inv / curve.plateau;
        }
    }
    return curve;
}

inline std::size_t lag_count(double max_lag_s, double grid_s) {
    if (!(grid_s > 0.0)) throw ValidationError("grid", "must be > 0");
    if (!(max_lag_s >= grid_s)) throw ValidationError("max_lag", "must be >= grid");
    return static_cast<std::size_t>(std::llround(max_lag_s / grid_s));
}

} // namespace detail

// Normalized price response of symbol i to nonzero midpoint changes of
// symbol j: for each change with direction e, accumulate
// e * (m_i(t + tau) - m_i(t)) over the lag grid, average over events, and
// scale by the value at the final lag.
inline ResponseCurve price_response(const TickSeries& ticks, const std::string& sym_i,
                                    const std::string& sym_j, double max_lag_s, double grid_s) {
    if (sym_i == sym_j) throw ValidationError("symbol", "i and j must differ");
    const detail::TickIndex ix = detail::index_ticks(ticks);
    const std::size_t lags = detail::lag_count(max_lag_s, grid_s);
    detail::ResponseAccum acc(lags);
    detail::accumulate_response(ix, ix.require(sym_i), ix.require(sym_j), detail::to_ns(grid_s),
                                lags, false, 0, acc);
    return detail::finish_response(acc, grid_s, false);
}

// price_response with the response of i split by the trader class of the
// most recent same-symbol trade within `window_ms` before each midpoint
// change (H / N, else U). Component curves sum to the total.
inline ResponseCurve decompose_response(const TickSeries& ticks, const std::string& sym_i,
                                        const std::string& sym_j, double max_lag_s, double grid_s,
                                        double window_ms = 50.0) {
    if (sym_i == sym_j) throw ValidationError("symbol", "i and j must differ");
    if (!(window_ms > 0.0)) throw ValidationError("window", "must be > 0");
    const detail::TickIndex ix = detail::index_ticks(ticks);
    const std::size_t lags = detail::lag_count(max_lag_s, grid_s);
    detail::ResponseAccum acc(lags);
    detail::accumulate_response(ix, ix.require(sym_i), ix.require(sym_j), detail::to_ns(grid_s),
                                lags, true, detail::to_ns(window_ms * 1e-3), acc);
    return detail::finish_response(acc, grid_s, true);
}

// Convenience wrapper pooling conditioning events across all ordered pairs.
inline ResponseCurve response_all_pairs(const TickSeries& ticks, double max_lag_s, double grid_s,
                                        bool decompose = false, double window_ms = 50.0) {
    const detail::TickIndex ix = detail::index_ticks(ticks);
    if (ix.symbols.size() < 2) throw ValidationError("symbol", "need at least two symbols");
    const std::size_t lags = detail::lag_count(max_lag_s, grid_s);
    detail::ResponseAccum acc(lags);
    for (std::size_t i = 0; i < ix.symbols.size(); ++i)
        for (std::size_t j = 0; j < ix.symbols.size(); ++j)
            if (i != j)
                detail::accumulate_response(ix, static_cast<int>(i), static_cast<int>(j),
                                            detail::to_ns(grid_s), lags, decompose,
                                            detail::to_ns(window_ms * 1e-3), acc);
    return detail::finish_response(acc, grid_s, decompose);
}

// -- grid-sampled returns and correlations -----------------------------------

struct ReturnsMatrix {
    double dt_s = 0.0;
    std::int64_t origin_ns = 0;
    std::vector<std::string> symbols;
    std::vector<std::vector<double>> values;       // [symbol][interval]
    std::vector<std::vector<std::uint8_t>> valid;  // explicit gap markers

    std::size_t intervals() const { return values.empty() ? 0 : values[0].size(); }
};

// Log midpoint returns on a common dt grid using the last quote at or before
// each grid point. Intervals with a missing endpoint are marked as gaps.
inline ReturnsMatrix returns(const TickSeries& ticks, double dt_s,
                             std::optional<std::int64_t> origin_ns = {}) {
    if (!(dt_s > 0.0)) throw ValidationError("dt", "must be > 0");
    const detail::TickIndex ix = detail::index_ticks(ticks);
    std::int64_t lo = std::numeric_limits<std::int64_t>::max();
    std::int64_t hi = std::numeric_limits<std::int64_t>::min();
    for (const auto& q : ix.quotes) {
        if (q.ts.empty()) continue;
        lo = std::min(lo, q.ts.front());
        hi = std::max(hi, q.ts.back());
    }
    if (lo > hi) throw EmptyInput("tick series has no quotes");

    ReturnsMatrix rm;
    rm.dt_s = dt_s;
    rm.origin_ns = origin_ns.value_or(lo);
    rm.symbols = ix.symbols;
    const std::int64_t dt_ns = detail::to_ns(dt_s);
    const std::int64_t span = hi - rm.origin_ns;
    const std::size_t points = span < 0 ? 0 : static_cast<std::size_t>(span / dt_ns) + 1;
    const std::size_t intervals = points > 1 ? points - 1 : 0;

    for (std::size_t s = 0; s < ix.symbols.size(); ++s) {
        const auto& quotes = ix.quotes[s];
        std::vector<double> sampled(points);
        std::vector<std::uint8_t> have(points, 0);
        for (std::size_t k = 0; k < points; ++k) {
            const std::int64_t t = rm.origin_ns + static_cast<std::int64_t>(k) * dt_ns;
            const std::ptrdiff_t idx = detail::quote_at_or_before(quotes, t);
            if (idx >= 0) {
                sampled[k] = quotes.mid[static_cast<std::size_t>(idx)];
                have[k] = 1;
            }
        }
        std::vector<double> vals(intervals, 0.0);
        std::vector<std::uint8_t> ok(intervals, 0);
        for (std::size_t k = 1; k < points; ++k) {
            if (have[k - 1] && have[k] && sampled[k - 1] > 0.0 && sampled[k] > 0.0) {
                vals[k - 1] = std::log(sampled[k] / sampled[k - 1]);
                ok[k - 1] = 1;
            }
        }
        rm.values.push_back(std::move(vals));
        rm.valid.push_back(std::move(ok));
    }
    return rm;
}

namespace detail {

inline bool is_constant(std::span<const double> x) {
    for (std::size_t k = 1; k < x.size(); ++k)
        if (x[k] != x[0]) return false;
    return true;
}

inline double sample_correlation(std::span<const double> x, std::span<const double> y,
                                 const std::string& what) {
    const std::size_t n = x.size();
    if (n < 2) throw InsufficientOverlap(what + ": need at least 2 joint observations");
    if (is_constant(x) || is_constant(y))
        throw DivisionByZero(what + ": constant series has no correlation");
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        mx += x[k];
        my += y[k];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double dx = x[k] - mx, dy = y[k] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw DivisionByZero(what + ": constant series has no correlation");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

} // namespace detail

struct LabeledCorrelation {
    std::vector<std::string> symbols;
    CorrelationMatrix corr;
};

// Pairwise-complete sample correlations of the return matrix; gaps are
// never imputed.
inline LabeledCorrelation correlation_matrix(const ReturnsMatrix& rm) {
    const int n = static_cast<int>(rm.symbols.size());
    if (n < 1) throw EmptyInput("returns matrix has no symbols");
    LabeledCorrelation out{rm.symbols, CorrelationMatrix(n)};
    std::vector<double> xs, ys;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            xs.clear();
            ys.clear();
            for (std::size_t k = 0; k < rm.intervals(); ++k) {
                if (rm.valid[i][k] && rm.valid[j][k]) {
                    xs.push_back(rm.values[i][k]);
                    ys.push_back(rm.values[j][k]);
                }
            }
            out.corr.set(i, j, detail::sample_correlation(xs, ys,
                                                          rm.symbols[i] + "/" + rm.symbols[j]));
        }
    }
    return out;
}

// Correlation of symbol i's returns with the equal-weighted average return
// of all symbols (including i), over cells where every symbol is observed.
inline double index_correlation(const ReturnsMatrix& rm, const std::string& symbol) {
    const auto it = std::find(rm.symbols.begin(), rm.symbols.end(), symbol);
    if (it == rm.symbols.end()) throw ValidationError("symbol", "unknown symbol " + symbol);
    const std::size_t i = static_cast<std::size_t>(it - rm.symbols.begin());
    std::vector<double> own, index;
    for (std::size_t k = 0; k < rm.intervals(); ++k) {
        bool all = true;
        double sum = 0.0;
        for (std::size_t s = 0; s < rm.symbols.size(); ++s) {
            if (!rm.valid[s][k]) {
                all = false;
                break;
            }
            sum += rm.values[s][k];
        }
        if (!all) continue;
        own.push_back(rm.values[i][k]);
        index.push_back(sum / static_cast<double>(rm.symbols.size()));
    }
    return detail::sample_correlation(own, index, symbol + "/index");
}

// Share-volume fraction attributable to class-H trades for one symbol.
inline double hft_fraction(const TickSeries& ticks, const std::string& symbol) {
    const detail::TickIndex ix = detail::index_ticks(ticks);
    const int s = ix.require(symbol);
    const auto& trades = ix.trades[static_cast<std::size_t>(s)];
    if (trades.empty()) throw EmptyInput("no trades for symbol " + symbol);
    double hft = 0.0, total = 0.0;
    for (const auto& t : trades) {
        total += static_cast<double>(t.size);
        if (t.cls == TraderClass::Hft) hft += static_cast<double>(t.size);
    }
    return hft / total;
}

struct OlsFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0; // squared sample correlation
    double correlation = 0.0;
};

inline OlsFit ols_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ValidationError("ols", "size mismatch");
    const std::size_t n = x.size();
    if (n < 2) throw InsufficientOverlap("ols: need at least 2 points");
    if (detail::is_constant(x)) throw DivisionByZero("ols: x values are constant");
    if (detail::is_constant(y)) throw DivisionByZero("ols: y values are constant");
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        mx += x[k];
        my += y[k];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double dx = x[k] - mx, dy = y[k] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0) throw DivisionByZero("ols: x values are constant");
    OlsFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (syy == 0.0) throw DivisionByZero("ols: y values are constant");
    fit.correlation = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    fit.r2 = fit.correlation * fit.correlation;
    return fit;
}

// -- correlation-network minimum spanning tree --------------------------------

struct MstEdge {
    std::string a, b;
    double distance = 0.0;
};

struct MstEdges {
    std::vector<MstEdge> edges;
    std::map<std::string, std::string> sectors; // optional labels, passed through
};

inline double correlation_distance(double rho) { return std::sqrt(2.0 * (1.0 - rho)); }

// Kruskal on the complete graph with d = sqrt(2 (1 - rho)); ties broken by
// lexicographic symbol pair, so the result is deterministic.
inline MstEdges mst(const CorrelationMatrix& corr, std::span<const std::string> labels,
                    const std::map<std::string, std::string>& sectors = {}) {
    const int n = corr.size();
    if (static_cast<int>(labels.size()) != n)
        throw ValidationError("labels", "label count must match matrix dimension");
    corr.validate();

    struct Candidate {
        double d;
        int i, j; // label-ordered endpoints
    };
    std::vector<Candidate> all;
    all.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const bool swap = labels[j] < labels[i];
            all.push_back(Candidate{correlation_distance(corr(i, j)), swap ? j : i, swap ? i : j});
        }
    std::sort(all.begin(), all.end(), [&](const Candidate& a, const Candidate& b) {
        if (a.d != b.d) return a.d < b.d;
        if (labels[a.i] != labels[b.i]) return labels[a.i] < labels[b.i];
        return labels[a.j] < labels[b.j];
    });

    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    };

    MstEdges out;
    out.sectors = sectors;
    for (const Candidate& c : all) {
        const int ra = find(c.i), rb = find(c.j);
        if (ra == rb) continue;
        parent[ra] = rb;
        out.edges.push_back(MstEdge{labels[c.i], labels[c.j], c.d});
        if (static_cast<int>(out.edges.size()) == n - 1) break;
    }
    return out;
}

} // namespace syncmark
