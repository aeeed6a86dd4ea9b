#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "frobcount/cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

using namespace fc;
using namespace fc::cli;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result run_cmd(const std::string& command, const Json& config, const std::string& out_dir = "", int threads = 1) {
    RunConfig rc;
    rc.command = command;
    rc.config = config;
    rc.out_dir = out_dir;
    rc.threads = threads;
    std::ostringstream out, err;
    int code = run(rc, out, err);
    capacity() = Capacity{};
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("frobcount_cli_" + std::to_string(::getpid()) + "_" + name);
    fs::remove_all(p);
    return p;
}

Json error_of(const Result& r) {
    auto nl = r.err.rfind('\n', r.err.size() - 2);
    return Json::parse(r.err.substr(nl == std::string::npos ? 0 : nl + 1));
}

}  // namespace

TEST_CASE("unknown command and malformed configs") {
    auto r = run_cmd("plot", Json::object());
    CHECK(r.code == 2);
    CHECK(error_of(r)["error"]["kind"] == "config");
    CHECK(r.out.empty());

    CHECK(run_cmd("count", {{"family", {{"kind", "conic"}, {"a", 4}, {"forms", {{0, 1}}}}}, {"B", {10}}}).code == 2);
    CHECK(run_cmd("count", {{"family", {{"kind", "conic"}, {"library", "a5_t"}}}, {"B", {20, 10}}}).code == 2);
    CHECK(run_cmd("count", {{"family", {{"kind", "elliptic"}}}, {"B", {10}}}).code == 2);
    CHECK(run_cmd("count", {{"family", {{"kind", "conic"}, {"library", "a5_t"}}}}).code == 2);
    CHECK(run_cmd("sum", {{"forms", {{1, 0}}}, {"spec", {{"library", "nope"}}}, {"B", 10}}).code == 2);

    auto big = run_cmd("count", {{"family", {{"kind", "conic"}, {"library", "a5_t"}}}, {"B", {100}},
                                 {"capacity", "table_bound=50"}});
    CHECK(big.code == 1);
    CHECK(error_of(big)["error"]["kind"] == "capacity");
}

TEST_CASE("argument parsing") {
    std::ostringstream out, err;
    CHECK(main_entry({"count", "--threads", "0"}, out, err) == 2);
    CHECK(main_entry({"count", "--config", "/nonexistent/config.json"}, out, err) == 2);
    CHECK(main_entry({}, out, err) == 2);
    fs::path dir = scratch("args");
    fs::create_directories(dir);
    {
        std::ofstream f(dir / "bad.json");
        f << "{not json";
    }
    CHECK(main_entry({"search", "--config", (dir / "bad.json").string()}, out, err) == 2);
    {
        std::ofstream f(dir / "search.cfg");
        f << R"({"P": 30})";
    }
    std::ostringstream o2, e2;
    CHECK(main_entry({"search", "--config", (dir / "search.cfg").string(), "--seed", "3"}, o2, e2) == 0);
    CHECK(Json::parse(o2.str())["witnesses"].size() == 2);
    fs::remove_all(dir);
}

TEST_CASE("count command matches the library and is reproducible") {
    fs::path dir = scratch("count");
    Json cfg = {{"family", {{"kind", "conic"}, {"library", "a5_t"}}}, {"grid", {{"min", 100}, {"max", 1000}, {"points", 5}}}};
    auto r = run_cmd("count", cfg, dir.string());
    REQUIRE(r.code == 0);
    auto grid = geometric_grid(100, 1000, 5);
    auto rows = count_conic_bundle(conic_family_library()[0].family, grid);
    std::string expect = "B,N,undetermined,degenerate,points\n";
    for (const auto& row : rows)
        expect += std::to_string(row.B) + "," + std::to_string(row.N) + "," + std::to_string(row.undetermined) + "," +
                  std::to_string(row.degenerate) + "," + std::to_string(row.points) + "\n";
    std::string csv = slurp(dir / "count.csv");
    CHECK(csv == expect);
    std::string json = slurp(dir / "count.json");
    auto j = Json::parse(json);
    CHECK(j["delta"]["total"] == "1");
    CHECK(j["delta"]["per_divisor"].size() == 2);
    CHECK(j["rows"].size() == 5);
    std::vector<std::string> keys;
    for (const auto& [k, v] : j.items()) keys.push_back(k);
    CHECK(keys == std::vector<std::string>{"command", "family", "kind", "delta", "rows"});

    REQUIRE(run_cmd("count", cfg, dir.string()).code == 0);
    CHECK(slurp(dir / "count.csv") == csv);
    CHECK(slurp(dir / "count.json") == json);
    REQUIRE(run_cmd("count", cfg, dir.string(), 3).code == 0);
    CHECK(slurp(dir / "count.csv") == csv);
    for (const auto& e : fs::directory_iterator(dir)) CHECK(e.path().string().find(".tmp.") == std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("multinorm and brauer counts through the command line") {
    Json mn = {{"family", {{"kind", "multinorm"}, {"fields", {{1, 0, 1}}}, {"forms", {{0, 1}}}}}, {"B", {50}}};
    auto r = run_cmd("count", mn);
    REQUIRE(r.code == 0);
    auto j = Json::parse(r.out);
    CHECK(j["kind"] == "multinorm");
    CHECK(j["delta"]["total"] == "1");
    CHECK(j["rows"][0]["undetermined"] == 0);
    Json br = {{"family",
                {{"kind", "brauer"}, {"n", 1}, {"hyperplanes", {{1, 0}, {0, 1}}}, {"classes", {{{"a", 2}, {"m", {-1, 1}}}, {{"a", 3}, {"m", {-1, 1}}}}}}},
               {"B", {20}}};
    auto b = run_cmd("count", br);
    REQUIRE(b.code == 0);
    CHECK(Json::parse(b.out)["delta"]["total"] == "3/2");
}

TEST_CASE("sum command") {
    Json cfg = {{"forms", {{{"coeffs", {1, 0}}, {"constant", 0}}, {{"coeffs", {1, 1}}, {"constant", 1}}}},
                {"specs", {{{"library", "tau"}}, {{"residue_indicator", {{"q", 4}, {"residues", {1}}}}, {"rule", "indicator"}}}},
                {"box", "unit_cube"},
                {"B", {30, 60}}};
    auto r = run_cmd("sum", cfg);
    REQUIRE(r.code == 0);
    auto j = Json::parse(r.out);
    LinearFormSystem sys(2, {{{1, 0}, 0}, {{1, 1}, 1}});
    auto base = FrobenianSpec::residue_indicator(4, {1});
    std::vector<FrobMultSpec> specs = {FrobMultSpec::divisor_function(), indicator_from_prime_set(base)};
    for (int i = 0; i < 2; ++i) {
        uint64_t B = i ? 60 : 30;
        auto v = correlation_sum(LatticeBox::unit_cube(2, Rational(B)), sys, specs);
        CHECK(j["rows"][i]["value"]["value"] == to_string(v.value.exact));
        CHECK(j["rows"][i]["points"] == v.points);
    }
    Json cons = cfg;
    cons["specs"] = {{{"library", "one"}}, {{"library", "one"}}};
    cons["box"] = "cube";
    cons["constraints"] = {{"anchor", {3, 1}}, {"S", {7}}, {"delta", "1/7"}, {"path", "encoding"}};
    cons["specs"] = {{{"residue_indicator", {{"q", 4}, {"residues", {1}}}}, {"rule", "indicator"}},
                     {{"character_combo", {{{"character", {{"principal", 1}}}, {"coeff", 1}}}}, {"rule", "indicator"}}};
    auto rc = run_cmd("sum", cons);
    CHECK(rc.code == 0);
}

TEST_CASE("fit command") {
    Json cfg = {{"samples", Json::array()}, {"delta", 1}, {"dimension", 2}};
    for (double B : {1e3, 2e3, 4e3, 8e3, 16e3, 32e3}) cfg["samples"].push_back({{"B", B}, {"N", 0.5 * B * B / std::log(B)}});
    fs::path dir = scratch("fit");
    auto r = run_cmd("fit", cfg, dir.string());
    REQUIRE(r.code == 0);
    auto j = Json::parse(slurp(dir / "fit.json"));
    for (const char* k : {"c_est", "spread", "delta_est", "drift", "monotone", "ratios"}) CHECK(j.contains(k));
    CHECK(j["c_est"].get<double>() == doctest::Approx(0.5));
    CHECK(j["delta_est"].get<double>() == doctest::Approx(1).epsilon(1e-6));
    CHECK(run_cmd("fit", {{"samples", {{{"B", 10}, {"N", 3}}}}, {"delta", 1}}).code == 2);

    Json fam = {{"family", {{"kind", "conic"}, {"library", "a5_t"}}}, {"grid", {{"min", 100}, {"max", 2000}, {"points", 6}}}};
    auto f = run_cmd("fit", fam);
    REQUIRE(f.code == 0);
    CHECK(Json::parse(f.out)["delta_used"] == 1.0);

    Json sd = {{"spec", {{"library", "tau"}}}, {"grid", {{"min", 1e3}, {"max", 1e5}, {"points", 6}}}};
    auto s = run_cmd("fit", sd);
    REQUIRE(s.code == 0);
    CHECK(Json::parse(s.out)["c_est"].get<double>() == doctest::Approx(1).epsilon(0.1));
    fs::remove_all(dir);
}

TEST_CASE("densities command") {
    auto r = run_cmd("densities", {{"identity_grid", {{"primes", {2, 3, 5, 7}}, {"r_max", 2}, {"c_max", 2}, {"a_max", 2}}}});
    REQUIRE(r.code == 0);
    auto j = Json::parse(r.out);
    CHECK(j["all_passed"] == true);
    CHECK(j["checks"].get<int>() > 100);
    CHECK(j["alpha_bounds"]["failures"] == 0);
    CHECK(run_cmd("densities", {{"identity_grid", {{"primes", {4}}}}}).code == 2);
}

TEST_CASE("detect and search commands") {
    Json cfg = {{"family", {{"kind", "conic"}, {"library", "a5_t_t-1"}}}, {"B", {100, 300}}};
    auto r = run_cmd("detect", cfg);
    REQUIRE(r.code == 0);
    auto j = Json::parse(r.out);
    for (const auto& row : j["rows"]) {
        long long d = std::stoll(row["detector"]["value"].get<std::string>());
        CHECK(d > 0);
        CHECK(d <= row["window_count"].get<long long>());
    }
    CHECK(run_cmd("detect", {{"family", {{"kind", "multinorm"}, {"fields", {{1, 0, 1}}}, {"forms", {{0, 1}}}}}, {"B", 10}}).code == 2);

    fs::path dir = scratch("search");
    auto s = run_cmd("search", {{"P", 5}}, dir.string());
    REQUIRE(s.code == 0);
    CHECK(slurp(dir / "search.csv") == "p,t0,t1,soluble_plus,soluble_minus\n");
    auto p = run_cmd("search", {{"P", 100}, {"pencil", {{"kind", "dp4"}, {"B", {0, 20}}}}});
    CHECK(p.code == 2);
    p = run_cmd("search", {{"P", 100}, {"pencil", {{"kind", "dp4"}, {"B", {1, 20}}}}});
    REQUIRE(p.code == 0);
    CHECK(Json::parse(p.out)["witnesses"].size() >= 3);
    fs::remove_all(dir);
}

TEST_CASE("csv quoting and config scalars") {
    Table t{{"a", "b"}, {{"x,y", "say \"hi\""}, {"plain", "line\nbreak"}}};
    CHECK(to_csv(t) == "a,b\n\"x,y\",\"say \"\"hi\"\"\"\nplain,\"line\nbreak\"\n");
    CHECK(to_csv(Table{{"only"}, {}}) == "only\n");
    CHECK(parse_rational_json(Json("-3/6")) == Rational(-1, 2));
    CHECK(parse_rational_json(Json(7)) == 7);
    CHECK(parse_integer(Json("170141183460469231731687303715884105727")) > 0);
    CHECK_THROWS_AS(parse_integer(Json(1.5)), ConfigError);
    CHECK(parse_scalar(Json{{"re", "1/2"}, {"im", -1}}) == Scalar(Rational(1, 2), Rational(-1)));
    auto spec = parse_spec({{"character_combo",
                             {{{"character", {{"principal", 4}}}, {"coeff", "1/2"}}, {{"character", {{"kronecker", -4}}}, {"coeff", "1/2"}}}},
                            {"rule", "indicator"}});
    CHECK(evaluate(spec, factor_integer(65)) == Scalar(1));
    CHECK(evaluate(spec, factor_integer(21)) == Scalar(0));
    CHECK(parse_grid({{"B", 1e5}}) == std::vector<uint64_t>{100000});
}
