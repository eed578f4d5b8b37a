#pragma once

// Timestamped trade/quote records. Trades carry side, price, size and an
// optional trader-class flag (H = synchronizer, N = investor, U/empty =
// uncategorized); quotes carry bid/ask. Prices live on a 1e-6 grid so the
// CSV round trip is bit-exact.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "model.hpp"

namespace syncmark {

enum class EventType : std::uint8_t { Trade, Quote };

enum class TraderClass : char { Hft = 'H', Investor = 'N', Uncategorized = 'U' };

// Smallest representable price increment in tick files.
inline double quantize_price(double v) { return std::round(v * 1e6) / 1e6; }

struct TickRecord {
    std::int64_t ts_ns = 0;
    std::string symbol;
    EventType event = EventType::Quote;
    std::optional<Side> side;                // trades
    std::optional<double> price;             // trades
    std::optional<std::int64_t> size;        // trades, shares
    std::optional<TraderClass> trader_class; // trades, may be absent
    std::optional<double> bid, ask;          // quotes

    bool operator==(const TickRecord&) const = default;

    double midpoint() const { return (*bid + *ask) / 2.0; }
};

using TickSeries = std::vector<TickRecord>;

inline TickRecord make_trade(std::int64_t ts_ns, std::string symbol, Side side, double price,
                             std::int64_t size, std::optional<TraderClass> cls) {
    TickRecord r;
    r.ts_ns = ts_ns;
    r.symbol = std::move(symbol);
    r.event = EventType::Trade;
    r.side = side;
    r.price = price;
    r.size = size;
    r.trader_class = cls;
    return r;
}

inline TickRecord make_quote(std::int64_t ts_ns, std::string symbol, double bid, double ask) {
    TickRecord r;
    r.ts_ns = ts_ns;
    r.symbol = std::move(symbol);
    r.event = EventType::Quote;
    r.bid = bid;
    r.ask = ask;
    return r;
}

// Per-record invariants plus per-symbol timestamp monotonicity.
inline void validate_ticks(const TickSeries& ticks) {
    std::vector<std::pair<std::string, std::int64_t>> last; // few symbols; linear scan is fine
    for (std::size_t i = 0; i < ticks.size(); ++i) {
        const TickRecord& r = ticks[i];
        const std::string where = "ticks[" + std::to_string(i) + "]";
        if (r.event == EventType::Trade) {
            if (!r.side || !r.price || !r.size)
                throw ValidationError(where, "trade records need side, price and size");
        } else {
            if (!r.bid || !r.ask) throw ValidationError(where, "quote records need bid and ask");
            if (!(*r.bid <= *r.ask)) throw ValidationError(where, "bid must not exceed ask");
        }
        bool found = false;
        for (auto& [sym, ts] : last) {
            if (sym == r.symbol) {
                if (r.ts_ns < ts)
                    throw ValidationError(where, "timestamps must be nondecreasing per symbol");
                ts = r.ts_ns;
                found = true;
                break;
            }
        }
        if (!found) last.emplace_back(r.symbol, r.ts_ns);
    }
}

} // namespace syncmark
