#pragma once

// Single-period trading engines. "Synchronized" means each security's quote
// and transaction price condition on all order flow observed so far across
// the market; "Unsynchronized" means a security's price reflects only its
// own order and its pre-trade midpoint never moves off mid.
//
// exact_metrics enumerates permutations x sign vectors x order sides;
// mc_metrics estimates the same conditional expectations by rejection
// sampling and is the independent stochastic oracle for the exact engine.
// gen_ticks unrolls the model into a multi-period synthetic tick stream.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "model.hpp"
#include "numeric.hpp"
#include "parallel.hpp"
#include "ticks.hpp"

namespace syncmark {

enum class Regime : std::uint8_t { Synchronized, Unsynchronized };

inline constexpr int kMaxExactDim = 6;

// Within-period order arrival sequence; a permutation of 0..n-1.
struct ArrivalSequence {
    std::vector<int> order;

    void validate(int n) const {
        if (static_cast<int>(order.size()) != n)
            throw ValidationError("arrival", "sequence length must equal security count");
        std::vector<bool> seen(n, false);
        for (int idx : order) {
            if (idx < 0 || idx >= n || seen[idx])
                throw ValidationError("arrival", "sequence must be a permutation");
            seen[idx] = true;
        }
    }
};

struct MarketMetrics {
    double cost = 0.0;            // E[p - m_hat | conditioning order], sign-adjusted
    double error = 0.0;           // E[|x - p| | conditioning order]
    double informed_profit = 0.0; // E[x - p | order side matches terminal sign], sign-adjusted
    double cost_se = 0.0;
    double error_se = 0.0;
    double informed_profit_se = 0.0;
};

// Stress variations layered on top of the baseline order flow.
struct Scenario {
    enum class Kind : std::uint8_t { Baseline, Misconception, Shock };

    Kind kind = Kind::Baseline;
    double sell_prob = 0.0;            // Misconception: order becomes a sell with this probability
    int shock_security = 0;            // Shock: displaced security
    double shock_size = 0.0;           // Shock: quoted-midpoint displacement
    std::optional<double> breaker;     // Shock: suppress cross-updates larger than this

    static Scenario baseline() { return {}; }
    static Scenario misconception(double sell_prob) {
        Scenario s;
        s.kind = Kind::Misconception;
        s.sell_prob = sell_prob;
        return s;
    }
    static Scenario shock(int security, double size, std::optional<double> breaker = {}) {
        Scenario s;
        s.kind = Kind::Shock;
        s.shock_security = security;
        s.shock_size = size;
        s.breaker = breaker;
        return s;
    }

    void validate(int n) const {
        if (kind == Kind::Misconception && !(sell_prob >= 0.0 && sell_prob <= 1.0))
            throw ValidationError("scenario.sell_prob", "must lie in [0, 1]");
        if (kind == Kind::Shock) {
            if (shock_security < 0 || shock_security >= n)
                throw ValidationError("scenario.security", "index out of range");
            if (breaker && !(*breaker > 0.0))
                throw ValidationError("scenario.breaker", "threshold must be > 0");
        }
    }
};

namespace detail {

// True generating law of an order given the terminal sign, per security:
// law[i][side][up]. Under a misconception every order is replaced by a sell
// with probability sell_prob irrespective of the terminal value; liquidity
// providers keep pricing with the baseline likelihood.
struct OrderLaw {
    std::vector<double> buy_up, buy_down;

    static OrderLaw make(std::span<const SecuritySpec> specs, const Scenario& scenario) {
        OrderLaw law;
        const std::size_t n = specs.size();
        law.buy_up.resize(n);
        law.buy_down.resize(n);
        const double keep =
            scenario.kind == Scenario::Kind::Misconception ? 1.0 - scenario.sell_prob : 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            law.buy_up[i] = keep * specs[i].phi;
            law.buy_down[i] = keep * (1.0 - specs[i].phi);
        }
        return law;
    }

    double prob(int security, Side side, bool up) const {
        const double buy = up ? buy_up[static_cast<std::size_t>(security)]
                              : buy_down[static_cast<std::size_t>(security)];
        return side == Side::Buy ? buy : 1.0 - buy;
    }
};

// Pre-trade midpoint and transaction price of the target under one fully
// specified arrival sequence and side assignment.
struct TargetPrices {
    double pre_mid = 0.0;
    double trade_price = 0.0;
};

inline TargetPrices target_prices(std::span<const SecuritySpec> specs, const Posterior& prior,
                                  Regime regime, std::span<const int> arrival,
                                  std::span<const Side> sides, int target) {
    const SecuritySpec& spec = specs[static_cast<std::size_t>(target)];
    TargetPrices out;
    if (regime == Regime::Unsynchronized) {
        out.pre_mid = spec.mid;
        Posterior own = posterior_update(prior, Order{target, sides[target]}, specs);
        out.trade_price = fair_price(own, target, specs);
        return out;
    }
    Posterior belief = prior;
    for (int j : arrival) {
        if (j == target) {
            out.pre_mid = fair_price(belief, target, specs);
            belief = posterior_update(belief, Order{target, sides[target]}, specs);
            out.trade_price = fair_price(belief, target, specs);
            return out;
        }
        belief = posterior_update(belief, Order{j, sides[j]}, specs);
    }
    throw ValidationError("arrival", "target security missing from sequence");
}

inline std::vector<std::vector<int>> all_permutations(int n) {
    std::vector<int> p(n);
    for (int i = 0; i < n; ++i) p[i] = i;
    std::vector<std::vector<int>> out;
    do {
        out.push_back(p);
    } while (std::next_permutation(p.begin(), p.end()));
    return out;
}

struct MetricAccum {
    double weight = 0.0, cost = 0.0, error = 0.0;
    double joint_weight = 0.0, profit = 0.0;

    MetricAccum& operator+=(const MetricAccum& o) {
        weight += o.weight;
        cost += o.cost;
        error += o.error;
        joint_weight += o.joint_weight;
        profit += o.profit;
        return *this;
    }
};

} // namespace detail

// Exact conditional expectations for the target security given its order
// side: transaction cost against the prevailing pre-trade midpoint, absolute
// pricing error against the terminal value, and the informed trader's profit
// (conditioning jointly on the side and the matching terminal sign).
inline MarketMetrics exact_metrics(std::span<const SecuritySpec> specs,
                                   const CorrelationMatrix& rho, Regime regime, int target,
                                   Side conditioning,
                                   const Scenario& scenario = Scenario::baseline()) {
    const int n = static_cast<int>(specs.size());
    if (n > kMaxExactDim)
        throw TooLargeForExact("exact enumeration limited to " + std::to_string(kMaxExactDim) +
                               " securities, got " + std::to_string(n));
    validate_specs(specs);
    scenario.validate(n);
    if (scenario.kind == Scenario::Kind::Shock)
        throw ValidationError("scenario", "shock scenarios apply to tick generation only");
    if (target < 0 || target >= n) throw ValidationError("target", "index out of range");

    const JointOutcomePMF pmf = build_joint_pmf(n, rho);
    const Posterior prior = Posterior::from_prior(pmf);
    const detail::OrderLaw law = detail::OrderLaw::make(specs, scenario);
    const auto perms = detail::all_permutations(n);
    const std::size_t side_combos = std::size_t{1} << (n - 1);
    const std::size_t atoms = pmf.prob.size();

    auto run_perm = [&](std::size_t pi) {
        detail::MetricAccum acc;
        std::vector<Side> sides(n);
        std::vector<double> lik_buy(n), lik_sell(n);
        for (std::size_t combo = 0; combo < side_combos; ++combo) {
            std::size_t bits = combo;
            for (int j = 0; j < n; ++j) {
                if (j == target) {
                    sides[j] = conditioning;
                } else {
                    sides[j] = (bits & 1) ? Side::Buy : Side::Sell;
                    bits >>= 1;
                }
            }
            const detail::TargetPrices prices =
                detail::target_prices(specs, prior, regime, perms[pi], sides, target);
            const double signed_cost = conditioning == Side::Buy
                                           ? prices.trade_price - prices.pre_mid
                                           : prices.pre_mid - prices.trade_price;
            for (std::size_t x = 0; x < atoms; ++x) {
                double w = pmf.prob[x];
                if (w == 0.0) continue;
                for (int j = 0; j < n; ++j)
                    w *= law.prob(j, sides[j], (x >> j) & 1);
                const bool target_up = (x >> target) & 1;
                const double terminal =
                    target_up ? specs[static_cast<std::size_t>(target)].up()
                              : specs[static_cast<std::size_t>(target)].down();
                acc.weight += w;
                acc.cost += w * signed_cost;
                acc.error += w * std::abs(terminal - prices.trade_price);
                if (target_up == (conditioning == Side::Buy)) {
                    acc.joint_weight += w;
                    acc.profit += w * (conditioning == Side::Buy
                                           ? terminal - prices.trade_price
                                           : prices.trade_price - terminal);
                }
            }
        }
        return acc;
    };

    const auto partials = par::run_blocks<detail::MetricAccum>(perms.size(), run_perm);
    detail::MetricAccum total;
    for (const auto& part : partials) total += part;

    if (total.weight <= 0.0 || total.joint_weight <= 0.0)
        throw DegenerateBelief("conditioning event has zero probability");
    MarketMetrics out;
    out.cost = total.cost / total.weight;
    out.error = total.error / total.weight;
    out.informed_profit = total.profit / total.joint_weight;
    return out;
}

namespace detail {

struct McAccum {
    std::uint64_t n_cond = 0, n_joint = 0;
    double cost = 0.0, cost2 = 0.0;
    double error = 0.0, error2 = 0.0;
    double profit = 0.0, profit2 = 0.0;

    McAccum& operator+=(const McAccum& o) {
        n_cond += o.n_cond;
        n_joint += o.n_joint;
        cost += o.cost;
        cost2 += o.cost2;
        error += o.error;
        error2 += o.error2;
        profit += o.profit;
        profit2 += o.profit2;
        return *this;
    }
};

inline std::size_t sample_atom(const std::vector<double>& cumulative, double u) {
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const std::size_t idx = static_cast<std::size_t>(it - cumulative.begin());
    return std::min(idx, cumulative.size() - 1);
}

inline void mean_se(double sum, double sumsq, std::uint64_t count, double& mean, double& se) {
    mean = sum / static_cast<double>(count);
    if (count < 2) {
        se = 0.0;
        return;
    }
    const double var =
        std::max(0.0, (sumsq - static_cast<double>(count) * mean * mean) /
                          static_cast<double>(count - 1));
    se = std::sqrt(var / static_cast<double>(count));
}

} // namespace detail

// Monte Carlo estimate of exact_metrics by rejection on the conditioning
// event. Deterministic given the seed: samples are processed in fixed 64k
// blocks with per-block substreams and combined in block order, so results
// are bit-identical for any worker count.
inline MarketMetrics mc_metrics(std::span<const SecuritySpec> specs, const CorrelationMatrix& rho,
                                Regime regime, int target, Side conditioning,
                                std::uint64_t samples, std::uint64_t seed,
                                const Scenario& scenario = Scenario::baseline()) {
    const int n = static_cast<int>(specs.size());
    validate_specs(specs);
    scenario.validate(n);
    if (scenario.kind == Scenario::Kind::Shock)
        throw ValidationError("scenario", "shock scenarios apply to tick generation only");
    if (samples < 1) throw ValidationError("samples", "must be >= 1");
    if (target < 0 || target >= n) throw ValidationError("target", "index out of range");

    const JointOutcomePMF pmf = build_joint_pmf(n, rho);
    const Posterior prior = Posterior::from_prior(pmf);
    const detail::OrderLaw law = detail::OrderLaw::make(specs, scenario);
    std::vector<double> cumulative(pmf.prob.size());
    double run = 0.0;
    for (std::size_t s = 0; s < pmf.prob.size(); ++s) {
        run += pmf.prob[s];
        cumulative[s] = run;
    }

    constexpr std::uint64_t kBlock = 1 << 16;
    const std::size_t blocks = static_cast<std::size_t>((samples + kBlock - 1) / kBlock);

    auto run_block = [&](std::size_t b) {
        detail::McAccum acc;
        const std::uint64_t lo = static_cast<std::uint64_t>(b) * kBlock;
        const std::uint64_t hi = std::min(samples, lo + kBlock);
        num::Rng rng(num::mix_seed({seed, 0x6D63626C6BULL, static_cast<std::uint64_t>(b)}));
        std::vector<Side> sides(n);
        for (std::uint64_t k = lo; k < hi; ++k) {
            const std::size_t x = detail::sample_atom(cumulative, rng.uniform());
            const std::vector<int> arrival = rng.permutation(n);
            for (int j = 0; j < n; ++j)
                sides[j] = rng.bernoulli(law.prob(j, Side::Buy, (x >> j) & 1)) ? Side::Buy
                                                                               : Side::Sell;
            if (sides[target] != conditioning) continue;
            const detail::TargetPrices prices =
                detail::target_prices(specs, prior, regime, arrival, sides, target);
            const double signed_cost = conditioning == Side::Buy
                                           ? prices.trade_price - prices.pre_mid
                                           : prices.pre_mid - prices.trade_price;
            const bool target_up = (x >> target) & 1;
            const double terminal = target_up ? specs[static_cast<std::size_t>(target)].up()
                                              : specs[static_cast<std::size_t>(target)].down();
            const double err = std::abs(terminal - prices.trade_price);
            acc.n_cond += 1;
            acc.cost += signed_cost;
            acc.cost2 += signed_cost * signed_cost;
            acc.error += err;
            acc.error2 += err * err;
            if (target_up == (conditioning == Side::Buy)) {
                const double profit = conditioning == Side::Buy ? terminal - prices.trade_price
                                                                : prices.trade_price - terminal;
                acc.n_joint += 1;
                acc.profit += profit;
                acc.profit2 += profit * profit;
            }
        }
        return acc;
    };

    const auto partials = par::run_blocks<detail::McAccum>(blocks, run_block);
    detail::McAccum total;
    for (const auto& part : partials) total += part;

    if (total.n_cond == 0 || total.n_joint == 0)
        throw InsufficientEvents("no samples matched the conditioning event; raise samples");
    MarketMetrics out;
    detail::mean_se(total.cost, total.cost2, total.n_cond, out.cost, out.cost_se);
    detail::mean_se(total.error, total.error2, total.n_cond, out.error, out.error_se);
    detail::mean_se(total.profit, total.profit2, total.n_joint, out.informed_profit,
                    out.informed_profit_se);
    return out;
}

// -- parameter sweeps -------------------------------------------------------

enum class SweepParam : std::uint8_t { Rho, Phi };

struct SweepRow {
    double value = 0.0;
    Regime regime = Regime::Unsynchronized;
    bool skipped = false;
    std::string note;
    MarketMetrics metrics;
};

// One row per grid value per regime (Unsynchronized first). Rho sweeps set
// every off-diagonal correlation to the grid value; Phi sweeps set every
// security's phi. Infeasible correlation points are kept as skipped rows.
inline std::vector<SweepRow> sweep(std::span<const SecuritySpec> specs,
                                   const CorrelationMatrix& rho_base, SweepParam param,
                                   double from, double to, int steps, int target,
                                   Side conditioning,
                                   const Scenario& scenario = Scenario::baseline()) {
    if (steps < 1) throw ValidationError("steps", "must be >= 1");
    const int n = static_cast<int>(specs.size());
    std::vector<SweepRow> rows;
    for (int k = 0; k < steps; ++k) {
        const double value = steps == 1 ? from : from + (to - from) * k / (steps - 1);
        std::vector<SecuritySpec> grid_specs(specs.begin(), specs.end());
        CorrelationMatrix grid_rho = rho_base;
        if (param == SweepParam::Rho) {
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) grid_rho.set(i, j, value);
        } else {
            for (auto& s : grid_specs) s.phi = value;
        }
        for (Regime regime : {Regime::Unsynchronized, Regime::Synchronized}) {
            SweepRow row;
            row.value = value;
            row.regime = regime;
            try {
                row.metrics = n <= kMaxExactDim
                                  ? exact_metrics(grid_specs, grid_rho, regime, target,
                                                  conditioning, scenario)
                                  : mc_metrics(grid_specs, grid_rho, regime, target, conditioning,
                                               200000, 1, scenario);
            } catch (const InfeasibleCorrelation& e) {
                row.skipped = true;
                row.note = e.what();
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

// -- synthetic tick generation ----------------------------------------------

struct TimingParams {
    std::int64_t period_ns = 60'000'000'000;          // full trading period
    std::int64_t order_spacing_ns = 1'000'000'000;    // gap between arrivals
    std::int64_t sync_lag_ns = 1'000'000;             // order -> cross-quote delay
    std::int64_t jitter_ns = 0;                       // uniform arrival jitter
    std::int64_t terminal_offset_ns = 50'000'000'000; // terminal-quote time in period

    void validate(int n) const {
        if (order_spacing_ns <= 0) throw ValidationError("timing.order_spacing_ns", "must be > 0");
        if (jitter_ns < 0 || jitter_ns > order_spacing_ns / 4)
            throw ValidationError("timing.jitter_ns", "must lie in [0, order_spacing_ns/4]");
        if (sync_lag_ns <= 0 || sync_lag_ns > order_spacing_ns / 4)
            throw ValidationError("timing.sync_lag_ns", "must lie in (0, order_spacing_ns/4]");
        if (terminal_offset_ns < (n + 2) * order_spacing_ns)
            throw ValidationError("timing.terminal_offset_ns",
                                  "must leave room for all arrivals: >= (n+2)*order_spacing_ns");
        if (period_ns <= terminal_offset_ns)
            throw ValidationError("timing.period_ns", "must exceed terminal_offset_ns");
    }
};

struct GenOptions {
    TimingParams timing{};
    // Per-security synchronizer coverage in [0,1]: probability that a cross
    // order is delivered to this security's quote. Empty means full coverage
    // in the synchronized regime. Ignored when unsynchronized.
    std::vector<double> coverage{};
    std::optional<ArrivalSequence> fixed_arrival{};
    std::int64_t trade_size = 100;
};

// Multi-period synthetic tick stream. Each period: quotes reset to mid, one
// order per security arrives in random sequence, the synchronized regime
// propagates each order into other securities' quotes via paired class-H
// trade+quote records, and the terminal value prints as a final quote.
// Deterministic given the seed: every period draws from its own substreams.
inline TickSeries gen_ticks(std::span<const SecuritySpec> specs, const CorrelationMatrix& rho,
                            Regime regime, std::int64_t periods, std::uint64_t seed,
                            const Scenario& scenario = Scenario::baseline(),
                            const GenOptions& options = {}) {
    const int n = static_cast<int>(specs.size());
    validate_specs(specs);
    scenario.validate(n);
    if (periods < 1) throw ValidationError("periods", "must be >= 1");
    options.timing.validate(n);
    if (!options.coverage.empty()) {
        if (static_cast<int>(options.coverage.size()) != n)
            throw ValidationError("coverage", "length must equal security count");
        for (double c : options.coverage)
            if (!(c >= 0.0 && c <= 1.0)) throw ValidationError("coverage", "values must lie in [0, 1]");
    }
    if (options.fixed_arrival) options.fixed_arrival->validate(n);
    if (options.trade_size < 1) throw ValidationError("trade_size", "must be >= 1");

    const JointOutcomePMF pmf = build_joint_pmf(n, rho);
    const Posterior prior = Posterior::from_prior(pmf);
    std::vector<double> cumulative(pmf.prob.size());
    double run = 0.0;
    for (std::size_t s = 0; s < pmf.prob.size(); ++s) {
        run += pmf.prob[s];
        cumulative[s] = run;
    }
    const bool synchronized = regime == Regime::Synchronized;
    std::vector<double> coverage = options.coverage;
    if (coverage.empty()) coverage.assign(n, 1.0);

    const TimingParams& tm = options.timing;
    TickSeries out;
    out.reserve(static_cast<std::size_t>(periods) * (4 * n + 2));

    std::vector<Posterior> belief(n);
    std::vector<double> offset(n);      // forced mispricing carried on quotes
    std::vector<double> quoted(n);      // last published midpoint
    std::vector<Side> sides(n);

    enum StreamId : std::uint64_t {
        kOutcome = 1,
        kArrival = 2,
        kSides = 3,
        kCoverage = 4,
        kJitter = 5,
        kMisconception = 6
    };

    for (std::int64_t p = 0; p < periods; ++p) {
        const std::int64_t t0 = p * tm.period_ns;
        num::Rng r_outcome(num::mix_seed({seed, kOutcome, static_cast<std::uint64_t>(p)}));
        num::Rng r_arrival(num::mix_seed({seed, kArrival, static_cast<std::uint64_t>(p)}));
        num::Rng r_sides(num::mix_seed({seed, kSides, static_cast<std::uint64_t>(p)}));
        num::Rng r_coverage(num::mix_seed({seed, kCoverage, static_cast<std::uint64_t>(p)}));
        num::Rng r_jitter(num::mix_seed({seed, kJitter, static_cast<std::uint64_t>(p)}));
        num::Rng r_misc(num::mix_seed({seed, kMisconception, static_cast<std::uint64_t>(p)}));

        const std::size_t x = detail::sample_atom(cumulative, r_outcome.uniform());
        const std::vector<int> arrival =
            options.fixed_arrival ? options.fixed_arrival->order : r_arrival.permutation(n);
        for (int j = 0; j < n; ++j) {
            const bool up = (x >> j) & 1;
            const double p_buy = up ? specs[j].phi : 1.0 - specs[j].phi;
            sides[j] = r_sides.bernoulli(p_buy) ? Side::Buy : Side::Sell;
        }
        if (scenario.kind == Scenario::Kind::Misconception)
            for (int j = 0; j < n; ++j)
                if (r_misc.bernoulli(scenario.sell_prob)) sides[j] = Side::Sell;

        for (int i = 0; i < n; ++i) {
            belief[i] = prior;
            offset[i] = 0.0;
            quoted[i] = quantize_price(specs[i].mid);
            out.push_back(make_quote(t0, specs[i].symbol, quoted[i], quoted[i]));
        }

        auto publish = [&](std::int64_t ts, int i, bool with_trade,
                           std::optional<TraderClass> cls) {
            const double value = quantize_price(fair_price(belief[i], i, specs) + offset[i]);
            if (value == quoted[i]) return;
            if (with_trade) {
                const Side dir = value > quoted[i] ? Side::Buy : Side::Sell;
                out.push_back(
                    make_trade(ts, specs[i].symbol, dir, value, options.trade_size, cls));
            }
            out.push_back(make_quote(ts, specs[i].symbol, value, value));
            quoted[i] = value;
        };

        // Between the floor(n/2)-th and next arrival.
        const std::int64_t t_shock = t0 + (n / 2) * tm.order_spacing_ns + tm.order_spacing_ns / 2;
        bool shock_pending = scenario.kind == Scenario::Kind::Shock;

        auto fire_shock = [&] {
            const int k = scenario.shock_security;
            offset[k] += scenario.shock_size;
            const double value = quantize_price(fair_price(belief[k], k, specs) + offset[k]);
            out.push_back(make_quote(t_shock, specs[k].symbol, value, value));
            quoted[k] = value;
            if (!synchronized) return;
            for (int i = 0; i < n; ++i) {
                if (i == k || coverage[i] <= 0.0) continue;
                const double implied =
                    rho(i, k) * (specs[i].delta / specs[k].delta) * scenario.shock_size;
                if (implied == 0.0) continue;
                if (scenario.breaker && std::abs(implied) > *scenario.breaker) continue;
                offset[i] += implied;
                publish(t_shock + tm.sync_lag_ns, i, true, TraderClass::Hft);
            }
        };

        for (int k = 0; k < n; ++k) {
            const std::int64_t jitter =
                static_cast<std::int64_t>(r_jitter.below(static_cast<std::uint64_t>(tm.jitter_ns) + 1));
            const std::int64_t ts = t0 + (k + 1) * tm.order_spacing_ns + jitter;
            if (shock_pending && t_shock <= ts) {
                fire_shock();
                shock_pending = false;
            }
            const int j = arrival[k];
            const Order order{j, sides[j]};

            if (synchronized) {
                // The joint belief advances security by security: own orders
                // are always observed; cross orders reach security i only
                // when the synchronizer covers it.
                std::vector<bool> delivered(n, false);
                for (int i = 0; i < n; ++i) {
                    const bool hit = i == j || r_coverage.bernoulli(coverage[i]);
                    if (hit) {
                        belief[i] = posterior_update(belief[i], order, specs);
                        delivered[i] = true;
                    }
                }
                const double trade_px =
                    quantize_price(fair_price(belief[j], j, specs) + offset[j]);
                out.push_back(make_trade(ts, specs[j].symbol, order.side, trade_px,
                                         options.trade_size, TraderClass::Investor));
                out.push_back(make_quote(ts, specs[j].symbol, trade_px, trade_px));
                quoted[j] = trade_px;
                for (int i = 0; i < n; ++i)
                    if (i != j && delivered[i]) publish(ts + tm.sync_lag_ns, i, true, TraderClass::Hft);
            } else {
                belief[j] = posterior_update(belief[j], order, specs);
                const double trade_px =
                    quantize_price(fair_price(belief[j], j, specs) + offset[j]);
                out.push_back(make_trade(ts, specs[j].symbol, order.side, trade_px,
                                         options.trade_size, TraderClass::Investor));
                out.push_back(make_quote(ts, specs[j].symbol, trade_px, trade_px));
                quoted[j] = trade_px;
            }
        }
        if (shock_pending) fire_shock();

        const std::int64_t t_term = t0 + tm.terminal_offset_ns;
        for (int i = 0; i < n; ++i) {
            const bool up = (x >> i) & 1;
            const double terminal = quantize_price(up ? specs[i].up() : specs[i].down());
            out.push_back(make_quote(t_term, specs[i].symbol, terminal, terminal));
            quoted[i] = terminal;
        }
    }
    return out;
}

} // namespace syncmark
