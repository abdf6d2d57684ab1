#include "doctest.h"

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "orderiso/cli.hpp"
#include "orderiso/errors.hpp"

using namespace orderiso;
using namespace orderiso::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("orderiso_cli_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

RunConfig config_from(const std::string& text) { return parse_config(json::parse(text)); }

RunConfig shipped(const std::string& name) { return load_config(std::string(ORDERISO_CONFIG_DIR) + "/" + name); }

int run_binary(const std::string& args) {
    const int rc = std::system((std::string(ORDERISO_CLI_PATH) + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::vector<std::vector<double>> csv_rows(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        std::vector<double> row;
        std::istringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

TEST_CASE("config parsing and canonical form") {
    const RunConfig c = shipped("generic.json");
    CHECK(c.mode == Mode::theorem1);
    CHECK(c.N == 10);
    CHECK(c.B.kind == densesets::Kind::affine);
    CHECK(c.B.shift == std::sqrt(2.0));
    const RunConfig again = parse_config(config_json(c));
    CHECK(config_json(again) == config_json(c));
    CHECK(config_hash(again) == config_hash(c));
    CHECK(config_hash(c).size() == 16);
    CHECK(config_hash(c) != config_hash(shipped("identity.json")));

    const RunConfig t2 = shipped("theorem2_small.json");
    REQUIRE(t2.theorem2);
    CHECK(make_chaplet(*t2.theorem2).count() == 1);
    CHECK(config_hash(parse_config(config_json(t2))) == config_hash(t2));
}

TEST_CASE("config schema violations") {
    const std::string base = R"("A": {"kind": "dyadic"}, "B": {"kind": "dyadic"})";
    CHECK_THROWS_AS(config_from("{" + base + R"(, "N": 0})"), SchemaError);
    CHECK_THROWS_AS(config_from("{" + base + R"(, "extra": 1})"), SchemaError);
    CHECK_THROWS_AS(config_from("{" + base + R"(, "budgets": {"base": 0.25, "ratio": 1.5}})"), SchemaError);
    CHECK_THROWS_AS(config_from("{" + base + R"(, "mode": "theorem2"})"), SchemaError);
    CHECK_THROWS_AS(config_from("{" + base + R"(, "mode": "theorem2", "window": 8, "theorem2": {"chaplet": {"K": 1}}})"), SchemaError);
    CHECK_THROWS_AS(config_from(R"({"A": {"kind": "affine", "base": {"kind": "dyadic"}, "scale": 0}, "B": {"kind": "dyadic"}})"), SchemaError);
    CHECK_THROWS_AS(config_from(R"({"A": {"kind": "rational"}, "B": {"kind": "dyadic"}})"), SchemaError);
    CHECK_THROWS_AS(config_from("{" + base + R"(, "N": "ten"})"), SchemaError);
    CHECK_THROWS_AS(config_from("{" + base + R"(, "outputs": {"trace": "../t.jsonl"}})"), SchemaError);
    CHECK_NOTHROW(parse_config(json::parse("{" + base + R"(, "record_timing": true})")));
    CHECK_THROWS_AS(parse_config(json::parse("{" + base + R"(, "record_timing": true})"), true), SchemaError);
}

TEST_CASE("lossless numbers and polynomials") {
    const double inf = std::numeric_limits<double>::infinity();
    for (double v : {0.1, -1e-300, 5e-324, inf, -inf}) CHECK(to_double(json::parse(number(v).dump())) == v);
    CHECK(std::isnan(to_double(number(std::numeric_limits<double>::quiet_NaN()))));
    CHECK_THROWS_AS(to_double(json("x")), SchemaError);

    const RealPoly mono({0.1, -2.0 / 3.0, 1e-17}, 3.0);
    const RealPoly back = poly_from_json(json::parse(poly_json(mono).dump()));
    CHECK(back.coeffs() == mono.coeffs());
    CHECK(back.scale() == mono.scale());

    auto b = std::make_shared<RecurrenceBasis>();
    b->scale = 2.0;
    b->h = {{0.1, 0.9}, {0.3, 0.2, 1.1}};
    const RealPoly rec({1.0 / 3.0, 0.25, -0.7}, BasisPtr(b));
    const RealPoly rec_back = poly_from_json(json::parse(poly_json(rec).dump()));
    for (cplx z : {cplx(0.3, 0.1), cplx(-2.0, 1.5)}) CHECK(poly_eval(rec_back, z) == poly_eval(rec, z));
}

TEST_CASE("identity run writes passing report, exact samples and a replayable trace") {
    const fs::path dir = scratch("identity");
    std::ostringstream log;
    CHECK(cmd_run(shipped("identity.json"), dir.string(), log) == exit_pass);
    const json report = json::parse(slurp(dir / "report.json"));
    CHECK(report["status"] == "pass");
    CHECK(report["steps"] == 40);
    for (const auto& row : csv_rows(slurp(dir / "samples.csv"))) {
        CHECK(row[1] == row[0]);
        CHECK(row[2] == 1.0);
    }
    const ParsedTrace t = read_trace((dir / "trace.jsonl").string());
    CHECK(t.steps.size() == 40);
    for (const auto& s : t.steps) CHECK(s.lambda == 0.0);
    CHECK(cmd_verify((dir / "trace.jsonl").string(), false, log) == exit_pass);

    const fs::path small = dir / "small.csv";
    CHECK(cmd_export_samples((dir / "trace.jsonl").string(), 1.0, 3, small.string(), log) == exit_pass);
    CHECK(slurp(small) == "x,f,f_prime\n-1,-1,1\n0,0,1\n1,1,1\n");
}

TEST_CASE("shift run reproduces x + 1 in the exported samples") {
    const fs::path dir = scratch("shift");
    std::ostringstream log;
    CHECK(cmd_run(shipped("shift.json"), dir.string(), log) == exit_pass);
    const auto rows = csv_rows(slurp(dir / "samples.csv"));
    CHECK(rows.size() == 1001);
    double worst = 0.0;
    for (const auto& row : rows) worst = std::max(worst, std::abs(row[1] - (row[0] + 1.0)));
    CHECK(worst <= 1e-12);
}

TEST_CASE("generic run is deterministic and monotone") {
    const RunConfig c = shipped("generic.json");
    const fs::path d1 = scratch("generic1"), d2 = scratch("generic2");
    std::ostringstream log;
    CHECK(cmd_run(c, d1.string(), log) == exit_pass);
    CHECK(cmd_run(c, d2.string(), log) == exit_pass);
    CHECK(slurp(d1 / "trace.jsonl") == slurp(d2 / "trace.jsonl"));
    CHECK(slurp(d1 / "samples.csv") == slurp(d2 / "samples.csv"));
    CHECK(slurp(d1 / "report.json") == slurp(d2 / "report.json"));
    for (const auto& row : csv_rows(slurp(d1 / "samples.csv"))) CHECK(row[2] > 0.0);

    const fs::path e1 = d1 / "again1.csv", e2 = d1 / "again2.csv";
    cmd_export_samples((d1 / "trace.jsonl").string(), std::nullopt, 257, e1.string(), log);
    cmd_export_samples((d1 / "trace.jsonl").string(), std::nullopt, 257, e2.string(), log);
    CHECK(slurp(e1) == slurp(e2));
}

TEST_CASE("exhausted explicit list is a construction error") {
    const RunConfig c =
        config_from(R"({"A": {"kind": "explicit", "values": [0, 1, 2]}, "B": {"kind": "dyadic"}, "N": 10})");
    const fs::path dir = scratch("exhausted");
    std::ostringstream log;
    CHECK(cmd_run(c, dir.string(), log) == exit_construction);
    const json report = json::parse(slurp(dir / "report.json"));
    CHECK(report["status"] == "construction-error");
    const ParsedTrace t = read_trace((dir / "trace.jsonl").string());
    CHECK(t.status == "construction-error");
    CHECK(cmd_verify((dir / "trace.jsonl").string(), false, log) == exit_construction);
}

TEST_CASE("verify rejects edited and truncated traces") {
    const fs::path dir = scratch("tamper");
    std::ostringstream log;
    REQUIRE(cmd_run(shipped("generic.json"), dir.string(), log) == exit_pass);
    std::vector<std::string> lines;
    {
        std::istringstream in(slurp(dir / "trace.jsonl"));
        for (std::string l; std::getline(in, l);) lines.push_back(l);
    }
    REQUIRE(lines.size() == 12);

    // an even step whose lambda exceeds its cap
    json step = json::parse(lines[4]);
    REQUIRE(step["kind"] == "even");
    step["lambda"] = 0.5;
    std::string edited;
    for (std::size_t i = 0; i < lines.size(); ++i) edited += (i == 4 ? step.dump() : lines[i]) + "\n";
    std::ofstream(dir / "edited.jsonl") << edited;
    CHECK(cmd_verify((dir / "edited.jsonl").string(), false, log) == exit_verification);

    std::string truncated;
    for (std::size_t i = 0; i < 6; ++i) truncated += lines[i] + "\n";
    std::ofstream(dir / "cut.jsonl") << truncated;
    CHECK_THROWS_AS(read_trace((dir / "cut.jsonl").string()), SchemaError);
    std::ofstream(dir / "half.jsonl") << truncated << lines[6].substr(0, 30);
    CHECK_THROWS_AS(read_trace((dir / "half.jsonl").string()), SchemaError);

    json head = json::parse(lines[0]);
    head["config"]["N"] = 11;
    std::string rehashed = head.dump() + "\n";
    for (std::size_t i = 1; i < lines.size(); ++i) rehashed += lines[i] + "\n";
    std::ofstream(dir / "hash.jsonl") << rehashed;
    CHECK_THROWS_AS(read_trace((dir / "hash.jsonl").string()), SchemaError);
}

TEST_CASE("binary exit statuses") {
    const fs::path dir = scratch("binary");
    const std::string cfg = std::string(ORDERISO_CONFIG_DIR);
    CHECK(run_binary("run --config " + cfg + "/identity.json --out " + dir.string()) == exit_pass);
    CHECK(run_binary("verify --trace " + (dir / "trace.jsonl").string()) == exit_pass);
    CHECK(run_binary("export-samples --trace " + (dir / "trace.jsonl").string() + " --out " + (dir / "x.csv").string() +
                     " --count 5") == exit_pass);
    CHECK(csv_rows(slurp(dir / "x.csv")).size() == 5);
    CHECK(run_binary("run --config " + cfg + "/missing.json --out " + dir.string()) == exit_schema);
    CHECK(run_binary("verify") == exit_schema);
    CHECK(run_binary("") == exit_schema);

    std::ofstream(dir / "timed.json") << R"({"A": {"kind": "dyadic"}, "B": {"kind": "dyadic"}, "N": 2, "record_timing": true})";
    CHECK(run_binary("run --seedless --config " + (dir / "timed.json").string() + " --out " + dir.string()) == exit_schema);
    CHECK(run_binary("run --config " + (dir / "timed.json").string() + " --out " + dir.string() + " --trace timed.jsonl") ==
          exit_pass);
    CHECK(fs::exists(dir / "timed.jsonl"));
}

TEST_CASE("every shipped config round-trips through verify") {
    for (const auto& entry : fs::directory_iterator(ORDERISO_CONFIG_DIR)) {
        if (entry.path().extension() != ".json") continue;
        INFO(entry.path().filename().string());
        const fs::path dir = scratch("shipped_" + entry.path().stem().string());
        std::ostringstream log;
        CHECK(cmd_run(load_config(entry.path().string(), true), dir.string(), log) == exit_pass);
        CHECK(cmd_verify((dir / "trace.jsonl").string(), true, log) == exit_pass);
    }
}
