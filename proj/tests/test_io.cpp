#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "syncmark/io.hpp"

using namespace syncmark;

namespace {

const char* kExampleConfig = R"({
  "securities": [
    {"symbol": "S1", "mid": 50.0, "delta": 1.0, "phi": 0.75},
    {"symbol": "S2", "mid": 50.0, "delta": 1.0, "phi": 0.75}
  ],
  "rho": [[1.0, 0.8], [0.8, 1.0]],
  "regime": "synchronized",
  "seed": 42,
  "periods": 100
})";

} // namespace

TEST_CASE("config parsing accepts the two-security example") {
    const ModelConfig cfg = parse_config(kExampleConfig);
    REQUIRE(cfg.securities.size() == 2);
    CHECK(cfg.securities[0].symbol == "S1");
    CHECK(cfg.securities[0].mid == 50.0);
    CHECK(cfg.securities[0].delta == 1.0);
    CHECK(cfg.securities[0].phi == 0.75);
    CHECK(cfg.rho(0, 1) == 0.8);
    CHECK(cfg.regime == Regime::Synchronized);
    CHECK(cfg.seed == 42);
    CHECK(cfg.periods == 100);
    CHECK(cfg.scenario.kind == Scenario::Kind::Baseline);
    CHECK(cfg.gen.coverage.empty());
}

TEST_CASE("config validation names the offending field") {
    SUBCASE("phi at the boundary") {
        std::string text = kExampleConfig;
        const auto pos = text.find("0.75");
        text.replace(pos, 4, "1.00");
        try {
            parse_config(text);
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(e.field() == "securities[0].phi");
        }
    }
    SUBCASE("dimension mismatch between rho and securities") {
        std::string text = R"({
          "securities": [
            {"symbol": "A", "mid": 50.0, "delta": 1.0, "phi": 0.75},
            {"symbol": "B", "mid": 50.0, "delta": 1.0, "phi": 0.75},
            {"symbol": "C", "mid": 50.0, "delta": 1.0, "phi": 0.75}
          ],
          "rho": [[1.0, 0.9], [0.9, 1.0]],
          "regime": "unsynchronized"
        })";
        try {
            parse_config(text);
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(e.field() == "rho");
        }
    }
    SUBCASE("asymmetric rho") {
        std::string text = kExampleConfig;
        const auto pos = text.find("[0.8, 1.0]");
        std::string replaced = text;
        replaced.replace(pos, 10, "[0.7, 1.0]");
        CHECK_THROWS_AS(parse_config(replaced), ValidationError);
    }
    SUBCASE("missing regime") {
        std::string text = R"({
          "securities": [{"symbol": "A", "mid": 50.0, "delta": 1.0, "phi": 0.75}],
          "rho": [[1.0]]
        })";
        try {
            parse_config(text);
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(e.field() == "regime");
        }
    }
    SUBCASE("malformed JSON") { CHECK_THROWS_AS(parse_config("{ not json"), ParseError); }
    SUBCASE("duplicate symbols") {
        std::string text = kExampleConfig;
        const auto pos = text.find("S2");
        text.replace(pos, 2, "S1");
        CHECK_THROWS_AS(parse_config(text), ValidationError);
    }
}

TEST_CASE("config scenarios parse and serialize") {
    std::string text = R"({
      "securities": [
        {"symbol": "S1", "mid": 50.0, "delta": 1.0, "phi": 0.75},
        {"symbol": "S2", "mid": 50.0, "delta": 1.0, "phi": 0.75}
      ],
      "rho": [[1.0, 0.8], [0.8, 1.0]],
      "regime": "synchronized",
      "scenario": {"kind": "shock", "security": "S2", "size": 1.5, "breaker": 0.5},
      "coverage": [1.0, 0.5]
    })";
    const ModelConfig cfg = parse_config(text);
    CHECK(cfg.scenario.kind == Scenario::Kind::Shock);
    CHECK(cfg.scenario.shock_security == 1);
    CHECK(cfg.scenario.shock_size == 1.5);
    REQUIRE(cfg.scenario.breaker.has_value());
    CHECK(*cfg.scenario.breaker == 0.5);
    REQUIRE(cfg.gen.coverage.size() == 2);
    CHECK(cfg.gen.coverage[1] == 0.5);

    const ModelConfig back = parse_config(write_config(cfg));
    CHECK(back.scenario.shock_security == cfg.scenario.shock_security);
    CHECK(back.gen.coverage == cfg.gen.coverage);
}

TEST_CASE("config serialization is a byte-stable round trip") {
    const ModelConfig cfg = parse_config(kExampleConfig);
    const std::string first = write_config(cfg);
    const std::string second = write_config(parse_config(first));
    CHECK(first == second);
}

TEST_CASE("tick CSV round trip is exact") {
    const ModelConfig cfg = parse_config(kExampleConfig);
    const TickSeries ticks =
        gen_ticks(cfg.securities, cfg.rho, cfg.regime, cfg.periods, cfg.seed, cfg.scenario, cfg.gen);
    REQUIRE(ticks.size() > 1000);

    const std::string text = write_ticks_string(ticks);
    const TickSeries parsed = read_ticks_string(text);
    REQUIRE(parsed.size() == ticks.size());
    CHECK(parsed == ticks);
    CHECK(write_ticks_string(parsed) == text);
}

TEST_CASE("tick CSV schema violations carry line numbers") {
    const std::string header = std::string(kTickHeader) + "\n";
    SUBCASE("bid above ask") {
        const std::string text = header + "0,A,Q,,,,,51,50\n";
        try {
            read_ticks_string(text);
            FAIL("expected SchemaError");
        } catch (const SchemaError& e) {
            CHECK(e.line() == 2);
        }
    }
    SUBCASE("wrong field count") {
        CHECK_THROWS_AS(read_ticks_string(header + "0,A,Q,,,\n"), SchemaError);
    }
    SUBCASE("unknown event code") {
        CHECK_THROWS_AS(read_ticks_string(header + "0,A,X,,,,,50,50\n"), SchemaError);
    }
    SUBCASE("trade missing its side") {
        CHECK_THROWS_AS(read_ticks_string(header + "0,A,T,,50,100,N,,\n"), SchemaError);
    }
    SUBCASE("quote carrying trade fields") {
        CHECK_THROWS_AS(read_ticks_string(header + "0,A,Q,B,,,,50,50\n"), SchemaError);
    }
    SUBCASE("timestamps regress within a symbol") {
        const std::string text = header + "10,A,Q,,,,,50,50\n5,A,Q,,,,,50,50\n";
        try {
            read_ticks_string(text);
            FAIL("expected SchemaError");
        } catch (const SchemaError& e) {
            CHECK(e.line() == 3);
        }
    }
    SUBCASE("bad header") { CHECK_THROWS_AS(read_ticks_string("nope\n"), SchemaError); }
}

TEST_CASE("price formatting uses at most six fractional digits") {
    CHECK(format_price(50.0) == "50");
    CHECK(format_price(50.5) == "50.5");
    CHECK(format_price(50.46875) == "50.46875");
    CHECK(format_price(quantize_price(50.1234564)) == "50.123456");
    CHECK(format_price(quantize_price(-0.0000001)) == "0");
}

TEST_CASE("tables serialize with stable columns and 12 significant digits") {
    Table t;
    t.columns = {"name", "value", "count"};
    t.add_row({std::string("a"), 1.0 / 3.0, std::int64_t{7}});
    t.add_row({std::string("b"), std::monostate{}, std::int64_t{0}});
    CHECK(to_csv(t) == "name,value,count\na,0.333333333333,7\nb,,0\n");

    const std::string json = to_json(t);
    CHECK(json.find("\"name\": \"a\"") != std::string::npos);
    CHECK(json.find("\"value\": null") != std::string::npos);

    CHECK_THROWS_AS(t.add_row({std::string("short")}), ValidationError);
}

TEST_CASE("correlation matrix CSV round trip") {
    LabeledCorrelation lc;
    lc.symbols = {"AAA", "BBB", "CCC"};
    lc.corr = CorrelationMatrix(3);
    lc.corr.set(0, 1, 0.25);
    lc.corr.set(0, 2, -0.5);
    lc.corr.set(1, 2, 0.125);
    const std::string text = write_correlation_csv(lc);
    const LabeledCorrelation back = read_correlation_csv_string(text);
    CHECK(back.symbols == lc.symbols);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(back.corr(i, j) == lc.corr(i, j));
    CHECK(write_correlation_csv(back) == text);
}
