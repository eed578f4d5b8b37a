#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <vector>

#include "syncmark/sim.hpp"

using namespace syncmark;

namespace {

std::vector<SecuritySpec> two_securities(double phi = 0.75) {
    return {{"S1", 50.0, 1.0, phi}, {"S2", 50.0, 1.0, phi}};
}

std::vector<SecuritySpec> n_securities(int n, double phi = 0.75) {
    std::vector<SecuritySpec> specs;
    for (int i = 0; i < n; ++i) specs.push_back({"S" + std::to_string(i + 1), 50.0, 1.0, phi});
    return specs;
}

CorrelationMatrix equi_corr(int n, double rho) {
    CorrelationMatrix m(n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) m.set(i, j, rho);
    return m;
}

TickSeries symbol_records(const TickSeries& ticks, const std::string& symbol) {
    TickSeries out;
    for (const auto& r : ticks)
        if (r.symbol == symbol) out.push_back(r);
    return out;
}

bool identical_metrics(const MarketMetrics& a, const MarketMetrics& b) {
    return a.cost == b.cost && a.error == b.error && a.informed_profit == b.informed_profit &&
           a.cost_se == b.cost_se && a.error_se == b.error_se &&
           a.informed_profit_se == b.informed_profit_se;
}

} // namespace

TEST_CASE("exact metrics reproduce the two-security worked example") {
    const auto specs = two_securities();
    const auto rho = equi_corr(2, 0.8);

    const MarketMetrics unsync =
        exact_metrics(specs, rho, Regime::Unsynchronized, 0, Side::Buy);
    CHECK(unsync.cost == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(unsync.error == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(unsync.informed_profit == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(unsync.cost_se == 0.0);

    const MarketMetrics sync = exact_metrics(specs, rho, Regime::Synchronized, 0, Side::Buy);
    CHECK(sync.informed_profit == doctest::Approx(0.46875).epsilon(1e-12));
    CHECK(sync.cost == doctest::Approx(0.46).epsilon(1e-12));
    CHECK(sync.error == doctest::Approx(0.703125).epsilon(1e-12));
}

TEST_CASE("sell-side conditioning mirrors the buy side") {
    const auto specs = two_securities();
    const auto rho = equi_corr(2, 0.8);
    for (Regime regime : {Regime::Unsynchronized, Regime::Synchronized}) {
        const MarketMetrics buy = exact_metrics(specs, rho, regime, 0, Side::Buy);
        const MarketMetrics sell = exact_metrics(specs, rho, regime, 0, Side::Sell);
        CHECK(sell.cost == doctest::Approx(buy.cost).epsilon(1e-12));
        CHECK(sell.error == doctest::Approx(buy.error).epsilon(1e-12));
        CHECK(sell.informed_profit == doctest::Approx(buy.informed_profit).epsilon(1e-12));
    }
}

TEST_CASE("rho = 0 makes the regimes indistinguishable") {
    for (int n : {2, 3}) {
        CAPTURE(n);
        const auto specs = n_securities(n);
        const auto rho = equi_corr(n, 0.0);
        const MarketMetrics unsync =
            exact_metrics(specs, rho, Regime::Unsynchronized, 0, Side::Buy);
        const MarketMetrics sync = exact_metrics(specs, rho, Regime::Synchronized, 0, Side::Buy);
        CHECK(std::abs(sync.cost - unsync.cost) <= 1e-12);
        CHECK(std::abs(sync.error - unsync.error) <= 1e-12);
        CHECK(std::abs(sync.informed_profit - unsync.informed_profit) <= 1e-12);
    }
}

TEST_CASE("synchronization never hurts in the baseline scenario") {
    for (double phi : {0.6, 0.75, 0.9}) {
        const auto specs = two_securities(phi);
        for (int k = -9; k <= 9; ++k) {
            const double rho_v = k / 10.0;
            CAPTURE(phi);
            CAPTURE(rho_v);
            const auto rho = equi_corr(2, rho_v);
            const MarketMetrics unsync =
                exact_metrics(specs, rho, Regime::Unsynchronized, 0, Side::Buy);
            const MarketMetrics sync =
                exact_metrics(specs, rho, Regime::Synchronized, 0, Side::Buy);
            if (k == 0) {
                CHECK(std::abs(sync.cost - unsync.cost) <= 1e-12);
                CHECK(std::abs(sync.error - unsync.error) <= 1e-12);
                CHECK(std::abs(sync.informed_profit - unsync.informed_profit) <= 1e-12);
            } else {
                CHECK(sync.cost < unsync.cost - 1e-12);
                CHECK(sync.error < unsync.error - 1e-12);
                CHECK(sync.informed_profit < unsync.informed_profit - 1e-12);
            }
        }
    }
}

TEST_CASE("misconception reverses the accuracy benefit") {
    const auto specs = two_securities();
    const auto rho = equi_corr(2, 0.8);
    const Scenario scenario = Scenario::misconception(0.5);
    const MarketMetrics unsync =
        exact_metrics(specs, rho, Regime::Unsynchronized, 0, Side::Buy, scenario);
    const MarketMetrics sync =
        exact_metrics(specs, rho, Regime::Synchronized, 0, Side::Buy, scenario);
    CHECK(sync.error > unsync.error);
    // Hand enumeration over the six branches with the sell-biased order law.
    CHECK(unsync.error == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(sync.error == doctest::Approx(0.7734375).epsilon(1e-12));
}

TEST_CASE("exact metrics input guards") {
    const auto specs = n_securities(7);
    CHECK_THROWS_AS(
        exact_metrics(specs, equi_corr(7, 0.1), Regime::Synchronized, 0, Side::Buy),
        TooLargeForExact);
    const auto two = two_securities();
    CHECK_THROWS_AS(exact_metrics(two, equi_corr(2, 0.5), Regime::Synchronized, 0, Side::Buy,
                                  Scenario::shock(0, 1.0)),
                    ValidationError);
    CHECK_THROWS_AS(exact_metrics(two, equi_corr(2, 0.5), Regime::Synchronized, 5, Side::Buy),
                    ValidationError);
}

TEST_CASE("sweep over rho tracks the exact engine and marks infeasible rows") {
    const auto specs = two_securities();
    const auto rows =
        sweep(specs, equi_corr(2, 0.0), SweepParam::Rho, 0.0, 1.0, 6, 0, Side::Buy);
    REQUIRE(rows.size() == 12);

    std::vector<double> sync_cost;
    for (const auto& row : rows) {
        CHECK_FALSE(row.skipped);
        if (row.regime == Regime::Synchronized) sync_cost.push_back(row.metrics.cost);
    }
    REQUIRE(sync_cost.size() == 6); // rho = 0, 0.2, 0.4, 0.6, 0.8, 1
    CHECK(sync_cost.front() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(sync_cost[4] == doctest::Approx(0.46).epsilon(1e-12));
    CHECK(sync_cost.back() == doctest::Approx(0.4375).epsilon(1e-12));
    CHECK(std::is_sorted(sync_cost.rbegin(), sync_cost.rend()));

    // rho = 0 row: regimes agree exactly.
    CHECK(std::abs(rows[0].metrics.cost - rows[1].metrics.cost) <= 1e-12);

    // Equicorrelated three-security grid runs infeasible at rho = -0.9.
    const auto rows3 = sweep(n_securities(3), equi_corr(3, 0.0), SweepParam::Rho, -0.9, 0.5, 2,
                             0, Side::Buy);
    CHECK(rows3[0].skipped);
    CHECK(rows3[1].skipped);
    CHECK_FALSE(rows3[2].skipped);
    CHECK_FALSE(rows3[3].skipped);
}

TEST_CASE("phi = 0.5 carries no information and costs nothing") {
    const auto rows = sweep(two_securities(), equi_corr(2, 0.8), SweepParam::Phi, 0.5, 0.5, 1, 0,
                            Side::Buy);
    for (const auto& row : rows) {
        CHECK(row.metrics.cost == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(row.metrics.error == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("Monte Carlo agrees with exact enumeration") {
    for (int n : {2, 3}) {
        for (double rho_v : {0.0, 0.5, 0.8}) {
            for (double phi : {0.6, 0.75}) {
                for (Regime regime : {Regime::Unsynchronized, Regime::Synchronized}) {
                    CAPTURE(n);
                    CAPTURE(rho_v);
                    CAPTURE(phi);
                    const auto specs = n_securities(n, phi);
                    const auto rho = equi_corr(n, rho_v);
                    const MarketMetrics exact =
                        exact_metrics(specs, rho, regime, 0, Side::Buy);
                    const MarketMetrics mc =
                        mc_metrics(specs, rho, regime, 0, Side::Buy, 200000, 12);
                    // The unsynchronized transaction price is a function of
                    // the conditioning order alone, so its cost is constant
                    // and the standard error is legitimately zero.
                    CHECK(mc.error_se > 0.0);
                    CHECK(std::abs(mc.cost - exact.cost) <= 3.0 * mc.cost_se + 1e-9);
                    CHECK(std::abs(mc.error - exact.error) <= 3.0 * mc.error_se + 1e-9);
                    CHECK(std::abs(mc.informed_profit - exact.informed_profit) <=
                          3.0 * mc.informed_profit_se + 1e-9);
                }
            }
        }
    }
}

TEST_CASE("Monte Carlo regimes agree when correlations vanish") {
    const auto specs = two_securities();
    const auto rho = equi_corr(2, 0.0);
    const MarketMetrics sync =
        mc_metrics(specs, rho, Regime::Synchronized, 0, Side::Buy, 200000, 3);
    const MarketMetrics unsync =
        mc_metrics(specs, rho, Regime::Unsynchronized, 0, Side::Buy, 200000, 4);
    const double err_se = std::hypot(sync.error_se, unsync.error_se);
    const double prof_se = std::hypot(sync.informed_profit_se, unsync.informed_profit_se);
    CHECK(std::abs(sync.cost - unsync.cost) <=
          3.0 * std::hypot(sync.cost_se, unsync.cost_se) + 1e-9);
    CHECK(std::abs(sync.error - unsync.error) <= 3.0 * err_se + 1e-9);
    CHECK(std::abs(sync.informed_profit - unsync.informed_profit) <= 3.0 * prof_se + 1e-9);
}

TEST_CASE("five securities run through both engines") {
    const auto specs = n_securities(5);
    const auto rho = equi_corr(5, 0.4);
    const MarketMetrics unsync = exact_metrics(specs, rho, Regime::Unsynchronized, 0, Side::Buy);
    const MarketMetrics sync = exact_metrics(specs, rho, Regime::Synchronized, 0, Side::Buy);
    CHECK(unsync.cost == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(sync.cost < unsync.cost);
    CHECK(sync.error < unsync.error);
    const MarketMetrics mc = mc_metrics(specs, rho, Regime::Synchronized, 0, Side::Buy, 100000, 9);
    CHECK(std::abs(mc.cost - sync.cost) <= 3.0 * mc.cost_se + 1e-9);
    CHECK(std::abs(mc.error - sync.error) <= 3.0 * mc.error_se + 1e-9);
}

TEST_CASE("Monte Carlo is deterministic and worker-count independent") {
    const auto specs = two_securities();
    const auto rho = equi_corr(2, 0.8);

    setenv("SYNCMARK_THREADS", "1", 1);
    const MarketMetrics serial =
        mc_metrics(specs, rho, Regime::Synchronized, 0, Side::Buy, 200000, 42);
    setenv("SYNCMARK_THREADS", "4", 1);
    const MarketMetrics threaded =
        mc_metrics(specs, rho, Regime::Synchronized, 0, Side::Buy, 200000, 42);
    unsetenv("SYNCMARK_THREADS");
    CHECK(identical_metrics(serial, threaded));

    const MarketMetrics again =
        mc_metrics(specs, rho, Regime::Synchronized, 0, Side::Buy, 200000, 42);
    CHECK(identical_metrics(serial, again));

    const MarketMetrics other =
        mc_metrics(specs, rho, Regime::Synchronized, 0, Side::Buy, 200000, 43);
    CHECK_FALSE(identical_metrics(serial, other));
}

TEST_CASE("tick generation in the unsynchronized regime") {
    const auto specs = two_securities();
    const auto rho = equi_corr(2, 0.8);
    const TickSeries ticks = gen_ticks(specs, rho, Regime::Unsynchronized, 1, 11);
    CHECK_NOTHROW(validate_ticks(ticks));

    std::size_t trades = 0;
    for (const auto& r : ticks) {
        if (r.event != EventType::Trade) continue;
        ++trades;
        CHECK(r.trader_class == TraderClass::Investor);
    }
    CHECK(trades == 2);
}

TEST_CASE("synchronized cross-update moves the other quote before its own trade") {
    const auto specs = two_securities();
    const auto rho = equi_corr(2, 0.8);
    GenOptions options;
    options.fixed_arrival = ArrivalSequence{{1, 0}}; // security 2 trades first
    for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull}) {
        CAPTURE(seed);
        const TickSeries ticks =
            gen_ticks(specs, rho, Regime::Synchronized, 1, seed, Scenario::baseline(), options);
        std::int64_t own_trade_ts = -1;
        for (const auto& r : ticks)
            if (r.symbol == "S1" && r.event == EventType::Trade &&
                r.trader_class == TraderClass::Investor) {
                own_trade_ts = r.ts_ns;
                break;
            }
        REQUIRE(own_trade_ts > 0);
        bool found = false;
        for (const auto& r : ticks) {
            if (r.symbol != "S1" || r.event != EventType::Quote) continue;
            if (r.midpoint() == 50.0) continue;
            CHECK(r.ts_ns < own_trade_ts);
            CHECK((r.midpoint() == doctest::Approx(50.4).epsilon(1e-9) ||
                   r.midpoint() == doctest::Approx(49.6).epsilon(1e-9)));
            found = true;
            break;
        }
        CHECK(found);
    }
}

TEST_CASE("tick generation is deterministic in the seed") {
    const auto specs = n_securities(3);
    const auto rho = equi_corr(3, 0.5);
    const TickSeries a = gen_ticks(specs, rho, Regime::Synchronized, 20, 99);
    const TickSeries b = gen_ticks(specs, rho, Regime::Synchronized, 20, 99);
    CHECK(a == b);
    const TickSeries c = gen_ticks(specs, rho, Regime::Synchronized, 20, 98);
    CHECK(a != c);
}

TEST_CASE("misconception scenario forces sell prints") {
    const auto specs = two_securities();
    const auto rho = equi_corr(2, 0.8);
    const TickSeries ticks =
        gen_ticks(specs, rho, Regime::Unsynchronized, 50, 5, Scenario::misconception(1.0));
    for (const auto& r : ticks)
        if (r.event == EventType::Trade) CHECK(r.side == Side::Sell);
}

TEST_CASE("circuit breaker contains a quote shock") {
    const auto specs = two_securities();
    const auto rho = equi_corr(2, 0.8);
    const std::uint64_t seed = 31;
    const std::int64_t periods = 10;

    const TickSeries baseline = gen_ticks(specs, rho, Regime::Synchronized, periods, seed);
    const TickSeries contained = gen_ticks(specs, rho, Regime::Synchronized, periods, seed,
                                           Scenario::shock(0, 1.0, 0.5));
    const TickSeries spread = gen_ticks(specs, rho, Regime::Synchronized, periods, seed,
                                        Scenario::shock(0, 1.0));

    // theta < implied cross-update: the non-shocked security's records match
    // the no-shock run exactly.
    CHECK(symbol_records(contained, "S2") == symbol_records(baseline, "S2"));
    CHECK(symbol_records(contained, "S1") != symbol_records(baseline, "S1"));

    // Without the breaker the mispricing propagates.
    CHECK(symbol_records(spread, "S2") != symbol_records(baseline, "S2"));
}

TEST_CASE("generation options are validated") {
    const auto specs = two_securities();
    const auto rho = equi_corr(2, 0.5);
    GenOptions bad_coverage;
    bad_coverage.coverage = {0.5};
    CHECK_THROWS_AS(gen_ticks(specs, rho, Regime::Synchronized, 1, 1, Scenario::baseline(),
                              bad_coverage),
                    ValidationError);
    GenOptions bad_timing;
    bad_timing.timing.terminal_offset_ns = 1;
    CHECK_THROWS_AS(
        gen_ticks(specs, rho, Regime::Synchronized, 1, 1, Scenario::baseline(), bad_timing),
        ValidationError);
    CHECK_THROWS_AS(gen_ticks(specs, rho, Regime::Synchronized, 0, 1), ValidationError);
    ArrivalSequence bad_seq{{0, 0}};
    CHECK_THROWS_AS(bad_seq.validate(2), ValidationError);
    CHECK_THROWS_AS(Scenario::misconception(1.5).validate(2), ValidationError);
    CHECK_THROWS_AS(Scenario::shock(5, 1.0).validate(2), ValidationError);
}
