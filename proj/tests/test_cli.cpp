#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "syncmark/io.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out, err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path work_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "syncmark_cli_test";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

RunResult run_cli(const std::string& args, const std::string& env_prefix = {}) {
    const fs::path out = work_dir() / "stdout.txt";
    const fs::path err = work_dir() / "stderr.txt";
    std::string cmd = env_prefix + " \"" + SYNCMARK_CLI_PATH + "\" " + args + " > \"" +
                      out.string() + "\" 2> \"" + err.string() + "\"";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

fs::path write_example_config(const std::string& name, const std::string& regime,
                              std::int64_t periods, const std::string& extra = {}) {
    const fs::path path = work_dir() / name;
    std::ofstream f(path);
    f << R"({
  "securities": [
    {"symbol": "S1", "mid": 50.0, "delta": 1.0, "phi": 0.75},
    {"symbol": "S2", "mid": 50.0, "delta": 1.0, "phi": 0.75}
  ],
  "rho": [[1.0, 0.8], [0.8, 1.0]],
  "regime": ")" << regime
      << R"(",
  "seed": 7,
  "periods": )" << periods
      << R"(,
  "timing": {"period_ns": 20000000000, "order_spacing_ns": 1000000000,
             "terminal_offset_ns": 16000000000})"
      << extra << "\n}\n";
    return path;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> fields;
        std::string cur;
        for (char c : line) {
            if (c == ',') {
                fields.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        fields.push_back(cur);
        rows.push_back(std::move(fields));
    }
    return rows;
}

} // namespace

TEST_CASE("bad invocations exit with code 2 and usage on stderr") {
    CHECK(run_cli("metrics").exit_code == 2);
    const RunResult missing = run_cli("metrics --regime sync --method exact --out x.csv");
    CHECK(missing.exit_code == 2);
    CHECK(missing.err.find("--config") != std::string::npos);
    CHECK(missing.out.empty());

    const RunResult unknown = run_cli("frobnicate");
    CHECK(unknown.exit_code == 2);
    CHECK_FALSE(unknown.err.empty());
}

TEST_CASE("config validation failures exit with code 2") {
    const fs::path bad = work_dir() / "bad.json";
    std::ofstream(bad) << R"({
      "securities": [{"symbol": "A", "mid": 50.0, "delta": 1.0, "phi": 1.0}],
      "rho": [[1.0]],
      "regime": "unsynchronized"
    })";
    const RunResult r = run_cli("metrics --config \"" + bad.string() +
                                "\" --regime sync --method exact --out \"" +
                                (work_dir() / "m.csv").string() + "\"");
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("phi") != std::string::npos);
}

TEST_CASE("missing input file exits with code 1") {
    const RunResult r = run_cli("metrics --config /nonexistent.json --regime sync "
                                "--method exact --out \"" +
                                (work_dir() / "m.csv").string() + "\"");
    CHECK(r.exit_code == 1);
}

TEST_CASE("metrics subcommand reproduces the synchronized informed profit") {
    const fs::path cfg = write_example_config("fig_cfg.json", "synchronized", 10);
    const fs::path out = work_dir() / "metrics.csv";
    const RunResult r = run_cli("metrics --config \"" + cfg.string() +
                                "\" --regime sync --method exact --out \"" + out.string() + "\"");
    REQUIRE(r.exit_code == 0);
    const std::string csv = slurp(out);
    CHECK(csv.find("0.46875") != std::string::npos);
    const auto rows = parse_csv(csv);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0][0] == "target");
    CHECK(rows[0][4] == "cost");
}

TEST_CASE("sweep subcommand writes the figure-ready grid") {
    const fs::path cfg = write_example_config("sweep_cfg.json", "synchronized", 10);
    const fs::path out = work_dir() / "sweep.csv";
    const RunResult r = run_cli("sweep --config \"" + cfg.string() +
                                "\" --param rho --from 0.8 --to 0.8 --steps 1 --out \"" +
                                out.string() + "\"");
    REQUIRE(r.exit_code == 0);
    const auto rows = parse_csv(slurp(out));
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == std::vector<std::string>{"rho", "regime", "cost", "error", "informed_profit",
                                              "std_err_cost", "std_err_error",
                                              "std_err_informed_profit", "status"});
    CHECK(rows[1][1] == "unsync");
    CHECK(rows[2][1] == "sync");
    CHECK(rows[2][4] == "0.46875");
    CHECK(rows[2][8] == "ok");
}

TEST_CASE("gen-ticks output is byte-identical across reruns") {
    const fs::path cfg = write_example_config("gen_cfg.json", "synchronized", 50);
    const fs::path a = work_dir() / "ticks_a.csv";
    const fs::path b = work_dir() / "ticks_b.csv";
    REQUIRE(run_cli("gen-ticks --config \"" + cfg.string() + "\" --out \"" + a.string() + "\"")
                .exit_code == 0);
    REQUIRE(run_cli("gen-ticks --config \"" + cfg.string() + "\" --out \"" + b.string() + "\"")
                .exit_code == 0);
    const std::string text_a = slurp(a);
    CHECK_FALSE(text_a.empty());
    CHECK(text_a == slurp(b));
}

TEST_CASE("Monte Carlo metrics are identical for any worker count") {
    const fs::path cfg = write_example_config("mc_cfg.json", "synchronized", 10);
    const fs::path a = work_dir() / "mc_a.csv";
    const fs::path b = work_dir() / "mc_b.csv";
    REQUIRE(run_cli("metrics --config \"" + cfg.string() +
                    "\" --regime sync --method mc --samples 200000 --seed 5 --out \"" +
                    a.string() + "\"",
                    "SYNCMARK_THREADS=1")
                .exit_code == 0);
    REQUIRE(run_cli("metrics --config \"" + cfg.string() +
                    "\" --regime sync --method mc --samples 200000 --seed 5 --out \"" +
                    b.string() + "\"",
                    "SYNCMARK_THREADS=3")
                .exit_code == 0);
    const std::string text_a = slurp(a);
    CHECK_FALSE(text_a.empty());
    CHECK(text_a == slurp(b));
}

TEST_CASE("gen-ticks feeds the analytics subcommands end to end") {
    const fs::path cfg = write_example_config("pipe_cfg.json", "synchronized", 300);
    const fs::path ticks = work_dir() / "pipe_ticks.csv";
    REQUIRE(run_cli("gen-ticks --config \"" + cfg.string() + "\" --out \"" + ticks.string() +
                    "\"")
                .exit_code == 0);

    SUBCASE("decomposed response: the H column dominates the first lag") {
        const fs::path out = work_dir() / "resp.csv";
        const RunResult r = run_cli("response --ticks \"" + ticks.string() +
                                    "\" --i S1 --j S2 --max-lag 3 --grid 0.25 --decompose "
                                    "--window 50 --out \"" +
                                    out.string() + "\"");
        REQUIRE(r.exit_code == 0);
        const auto rows = parse_csv(slurp(out));
        REQUIRE(rows.size() >= 2);
        REQUIRE(rows[0] == std::vector<std::string>{"lag_s", "response", "std_err", "hft",
                                                    "non_hft", "uncategorized"});
        const double response = std::stod(rows[1][1]);
        const double hft = std::stod(rows[1][3]);
        CHECK(hft >= 0.9 * response);
    }
    SUBCASE("cost-error splits per-trade rows and summary") {
        const fs::path out = work_dir() / "ce.csv";
        const RunResult r = run_cli("cost-error --ticks \"" + ticks.string() +
                                    "\" --horizon 14 --out \"" + out.string() + "\"");
        REQUIRE(r.exit_code == 0);
        CHECK(r.out.find("group,n,mean_cost,mean_error") == 0); // summary on stdout
        CHECK(parse_csv(slurp(out)).size() > 300);
    }
    SUBCASE("correlate then mst") {
        const fs::path corr = work_dir() / "corr.csv";
        REQUIRE(run_cli("correlate --ticks \"" + ticks.string() + "\" --dt 5 --out \"" +
                        corr.string() + "\"")
                    .exit_code == 0);
        const fs::path sectors = work_dir() / "sectors.csv";
        std::ofstream(sectors) << "symbol,sector\nS1,tech\nS2,energy\n";
        const fs::path edges = work_dir() / "mst.csv";
        REQUIRE(run_cli("mst --corr \"" + corr.string() + "\" --sectors \"" + sectors.string() +
                        "\" --out \"" + edges.string() + "\"")
                    .exit_code == 0);
        const auto rows = parse_csv(slurp(edges));
        REQUIRE(rows.size() == 2); // header + single edge for two symbols
        CHECK(rows[0] == std::vector<std::string>{"symbol_a", "symbol_b", "distance", "sector_a",
                                                  "sector_b"});
        CHECK(rows[1][3] == "tech");
    }
    SUBCASE("correlate per-symbol table with index and hft columns") {
        const fs::path out = work_dir() / "panel.csv";
        REQUIRE(run_cli("correlate --ticks \"" + ticks.string() +
                        "\" --dt 5 --index --hft-fraction --out \"" + out.string() + "\"")
                    .exit_code == 0);
        const auto rows = parse_csv(slurp(out));
        REQUIRE(rows.size() == 3);
        CHECK(rows[0] ==
              std::vector<std::string>{"symbol", "index_correlation", "hft_fraction"});
    }
    SUBCASE("all-pairs response pools both directions") {
        const fs::path out = work_dir() / "resp_all.csv";
        const RunResult r = run_cli("response --ticks \"" + ticks.string() +
                                    "\" --all-pairs --max-lag 3 --grid 0.25 --out \"" +
                                    out.string() + "\"");
        REQUIRE(r.exit_code == 0);
        CHECK(r.err.find("events=") != std::string::npos);
        CHECK(parse_csv(slurp(out)).size() == 13); // header + 12 lags
    }
    SUBCASE("json output format") {
        const fs::path out = work_dir() / "resp.json";
        const RunResult r =
            run_cli("response --ticks \"" + ticks.string() +
                    "\" --i S1 --j S2 --max-lag 3 --grid 0.25 --format json --out \"" +
                    out.string() + "\"");
        REQUIRE(r.exit_code == 0);
        CHECK(slurp(out).find("\"lag_s\"") != std::string::npos);
    }
}
