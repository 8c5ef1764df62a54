#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "oracle_values.hpp"

namespace {

struct Outcome {
    int code;
    std::string out, err;
};

Outcome invoke(std::initializer_list<std::string> args) {
    const std::vector<std::string> v(args);
    std::ostringstream out, err;
    const int code = fracpois::cli::run(v, out, err);
    return {code, out.str(), err.str()};
}

nlohmann::json invoke_json(std::initializer_list<std::string> args) {
    std::vector<std::string> v{"--format", "json"};
    v.insert(v.end(), args);
    std::ostringstream out, err;
    EXPECT_EQ(fracpois::cli::run(v, out, err), 0) << err.str();
    return nlohmann::json::parse(out.str());
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(std::move(cells));
    }
    return rows;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(CliEval, MittagLefflerAtZero) {
    const auto j = invoke_json({"eval", "ml", "--alpha", "1", "--beta", "1", "--x", "0"});
    ASSERT_EQ(j.size(), 1u);
    EXPECT_EQ(j[0]["y"].get<double>(), 1.0);
    EXPECT_TRUE(j[0]["meta"].contains("route"));
}

TEST(CliEval, ThreeParameterReduction) {
    const auto j = invoke_json({"eval", "gml", "--alpha", "1", "--beta", "3", "--gamma", "3", "--x", "-1"});
    // E^3_{1,3}(-1) = e^{-1} / 2
    EXPECT_NEAR(j[0]["y"].get<double>(), std::exp(-1.0) / 2.0, 1e-13);
    EXPECT_NEAR(j[0]["y"].get<double>(), 0.18393972, 5e-9);
}

TEST(CliEval, WrightHalfGaussian) {
    const auto j = invoke_json({"eval", "wright", "--lam", "-0.5", "--beta", "0.5", "--x", "-1"});
    EXPECT_NEAR(j[0]["y"].get<double>(), oracle::wright_m05_05_m1, 1e-13);
    EXPECT_NEAR(j[0]["y"].get<double>(), 0.43939129, 5e-9);
}

TEST(CliEval, GridAndRoutes) {
    const auto j = invoke_json({"eval", "ml", "--alpha", "0.5", "--beta", "1", "--x-from", "-10", "--x-to", "-1",
                                "--points", "4", "--route", "integral"});
    ASSERT_EQ(j.size(), 4u);
    EXPECT_EQ(j[0]["x"].get<double>(), -10.0);
    EXPECT_EQ(j[3]["x"].get<double>(), -1.0);
    EXPECT_NEAR(j[0]["y"].get<double>(), oracle::ml_05_1_m10, 1e-10);
    EXPECT_NEAR(j[3]["y"].get<double>(), oracle::ml_05_1_m1, 1e-10);
    for (const auto& r : j) EXPECT_EQ(r["meta"]["provenance"], "integral");
    const auto w = invoke_json({"eval", "wright", "--lam", "-0.3", "--beta", "0.7", "--x", "-2,-10"});
    EXPECT_NEAR(w[0]["y"].get<double>(), oracle::wright_m03_07_m2, 1e-10);
    EXPECT_NEAR(w[1]["y"].get<double>(), oracle::wright_m03_07_m10, 1e-15);
}

TEST(CliDist, PoissonTable) {
    const auto j = invoke_json({"dist", "--n", "1", "--nu", "1", "--lambda", "1", "pmf", "--t", "1", "--k-max", "3"});
    ASSERT_EQ(j.size(), 4u);
    const double expected[] = {0.36788, 0.36788, 0.18394, 0.06131};
    for (int k = 0; k < 4; ++k) {
        EXPECT_EQ(j[k]["x"].get<double>(), k);
        EXPECT_NEAR(j[k]["y"].get<double>(), expected[k], 5e-6);
        EXPECT_EQ(j[k]["meta"]["provenance"], "series");
    }
}

TEST(CliDist, SecondOrderRenewal) {
    const auto j = invoke_json({"dist", "--n", "2", "--nu", "1", "--lambda", "1", "renewal", "--t", "1"});
    // lambda t / 2 - (1 - e^{-2 lambda t}) / 4
    EXPECT_NEAR(j[0]["y"].get<double>(), 0.5 - (1.0 - std::exp(-2.0)) / 4.0, 1e-12);
    EXPECT_NEAR(j[0]["y"].get<double>(), 0.28383382, 5e-9);
}

TEST(CliDist, FractionalSurvival) {
    const auto j = invoke_json({"dist", "--n", "1", "--nu", "0.5", "--lambda", "1", "pmf", "--t", "1", "--k", "0"});
    EXPECT_NEAR(j[0]["y"].get<double>(), oracle::pmf_half_k0_t1, 1e-13);
}

TEST(CliDist, OtherQuantities) {
    const std::string base[] = {"dist", "--n", "1", "--nu", "0.7", "--lambda", "1.5"};
    auto with = [&](std::initializer_list<std::string> tail) {
        std::vector<std::string> v{"--format", "json"};
        v.insert(v.end(), std::begin(base), std::end(base));
        v.insert(v.end(), tail);
        std::ostringstream out, err;
        EXPECT_EQ(fracpois::cli::run(v, out, err), 0) << err.str();
        return nlohmann::json::parse(out.str());
    };
    // density grids starting at 0 are moved off the origin
    const auto ia = with({"iapdf", "--t-from", "0", "--t-to", "2", "--points", "5"});
    ASSERT_EQ(ia.size(), 5u);
    EXPECT_GT(ia[0]["x"].get<double>(), 0.0);
    EXPECT_TRUE(ia[0]["y"].is_number());
    const auto cdf = with({"wtcdf", "--k", "1", "--t", "1"});
    const auto surv = with({"pmf", "--k", "0", "--t", "1"});
    EXPECT_NEAR(cdf[0]["y"].get<double>() + surv[0]["y"].get<double>(), 1.0, 1e-12);
    const auto pdf = with({"wtpdf", "--k", "2", "--t-from", "0.5", "--t-to", "5", "--points", "3", "--log"});
    ASSERT_EQ(pdf.size(), 3u);
    EXPECT_NEAR(pdf[2]["x"].get<double>(), 5.0, 1e-12);
    const auto g = with({"pgf", "--t", "1", "--u", "1,0.5"});
    EXPECT_NEAR(g[0]["y"].get<double>(), 1.0, 1e-12);
    EXPECT_LT(g[1]["y"].get<double>(), 1.0);
    const auto m = with({"moments", "--r", "1", "--t", "2"});
    const auto ren = with({"renewal", "--t", "2"});
    EXPECT_NEAR(m[0]["y"].get<double>(), ren[0]["y"].get<double>(), 1e-10);
}

TEST(CliSimulate, PoissonMeanWithinReportedError) {
    const auto j = invoke_json({"simulate", "--n", "1", "--nu", "1", "--lambda", "1", "--horizon", "10", "--paths",
                                "10000", "--threads", "2"});
    ASSERT_FALSE(j.empty());
    const auto& mean = j[0];
    EXPECT_EQ(mean["meta"]["record"], "mean");
    const double se = mean["meta"]["std_error"].get<double>();
    EXPECT_NEAR(se, std::sqrt(10.0 / 10000.0), 0.005);
    EXPECT_LT(std::abs(mean["y"].get<double>() - 10.0), 4.0 * se);
    EXPECT_EQ(mean["meta"]["analytic"].get<double>(), 10.0);
}

TEST(CliSimulate, PmfColumnsAlongsideAnalytic) {
    const auto j = invoke_json({"simulate", "--n", "2", "--nu", "0.6", "--lambda", "1", "--horizon", "2", "--paths",
                                "20000", "--probe", "1,2"});
    int pmf_rows = 0;
    for (const auto& r : j) {
        if (r["meta"]["record"] != "pmf") continue;
        ++pmf_rows;
        const double se = std::sqrt(r["meta"]["analytic"].get<double>() * (1 - r["meta"]["analytic"].get<double>()) /
                                    20000.0);
        EXPECT_LT(std::abs(r["y"].get<double>() - r["meta"]["analytic"].get<double>()), 5.0 * se + 1e-12)
            << r.dump();
    }
    EXPECT_GE(pmf_rows, 4);
}

TEST(CliSimulate, SameSeedSameFiles) {
    const auto dir = std::filesystem::temp_directory_path();
    const auto a = dir / "fracpois_cli_a.jsonl", b = dir / "fracpois_cli_b.jsonl";
    const auto ra = invoke({"--seed", "11", "simulate", "--n", "2", "--nu", "0.7", "--lambda", "1", "--horizon", "5",
                            "--paths", "500", "--threads", "1", "--out", a.string()});
    const auto rb = invoke({"--seed", "11", "simulate", "--n", "2", "--nu", "0.7", "--lambda", "1", "--horizon", "5",
                            "--paths", "500", "--threads", "4", "--out", b.string()});
    ASSERT_EQ(ra.code, 0) << ra.err;
    ASSERT_EQ(rb.code, 0) << rb.err;
    EXPECT_EQ(ra.out, rb.out);
    const std::string fa = slurp(a);
    EXPECT_FALSE(fa.empty());
    EXPECT_EQ(fa, slurp(b));
    std::istringstream lines(fa);
    std::string first;
    std::getline(lines, first);
    const auto obj = nlohmann::json::parse(first);
    EXPECT_EQ(obj["seed_stream"], 0);
    EXPECT_TRUE(obj["events"].is_array());
    const auto rc = invoke({"--seed", "12", "simulate", "--n", "2", "--nu", "0.7", "--lambda", "1", "--horizon", "5",
                            "--paths", "500", "--out", a.string()});
    EXPECT_NE(slurp(a), fa);
    std::filesystem::remove(a);
    std::filesystem::remove(b);
}

TEST(CliVerify, NamedSubsets) {
    for (const char* name : {"gen-identity", "fk8"}) {
        const auto r = invoke({"verify", "--only", name});
        ASSERT_EQ(r.code, 0) << r.err;
        const auto j = nlohmann::json::parse(r.out);
        ASSERT_TRUE(j.is_array());
        ASSERT_FALSE(j.empty());
        for (const auto& rep : j) EXPECT_TRUE(rep["pass"].get<bool>()) << rep.dump();
    }
    const auto tele = nlohmann::json::parse(invoke({"verify", "--only", "fk8"}).out);
    EXPECT_EQ(tele[0]["name"].get<std::string>().rfind("telescoping/", 0), 0u);
}

TEST(CliVerify, ListsGroups) {
    const auto r = invoke({"verify", "--list"});
    ASSERT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_GE(j.size(), 10u);
}

TEST(CliExitCodes, Contract) {
    EXPECT_EQ(invoke({"eval", "ml", "--alpha", "1", "--beta", "1", "--x", "0"}).code, 0);
    // a tolerance nothing can meet makes the suite fail
    EXPECT_EQ(invoke({"--tol", "1e-300", "verify", "--only", "reductions"}).code, 1);
    // usage errors
    EXPECT_EQ(invoke({}).code, 2);
    EXPECT_EQ(invoke({"frobnicate"}).code, 2);
    EXPECT_EQ(invoke({"eval", "ml", "--alpha", "1", "--x", "0"}).code, 2);
    EXPECT_EQ(invoke({"--format", "xml", "eval", "ml", "--alpha", "1", "--beta", "1", "--x", "0"}).code, 2);
    EXPECT_EQ(invoke({"dist", "--n", "1", "--nu", "1.5", "--lambda", "1", "pmf", "--t", "1", "--k", "0"}).code, 2);
    EXPECT_EQ(invoke({"dist", "--n", "1", "--nu", "0.5", "--lambda", "-1", "renewal", "--t", "1"}).code, 2);
    EXPECT_EQ(invoke({"eval", "ml", "--alpha", "0", "--beta", "1", "--x", "1"}).code, 2);
    EXPECT_EQ(invoke({"verify", "--only", "nonsense"}).code, 2);
    EXPECT_EQ(invoke({"simulate", "--n", "1", "--nu", "0.5", "--lambda", "1", "--horizon", "-1"}).code, 2);
    // numerical failure: the series budget is too small to converge
    {
        const std::vector<std::string> v{"eval", "ml", "--alpha", "0.5", "--beta", "1", "--x", "5", "--route", "series"};
        ::setenv("FRACPOIS_MAX_TERMS", "3", 1);
        std::ostringstream out, err;
        const int code = fracpois::cli::run(v, out, err);
        ::unsetenv("FRACPOIS_MAX_TERMS");
        EXPECT_EQ(code, 3) << err.str();
        EXPECT_FALSE(err.str().empty());
    }
    // ill-conditioned Wright series with no integral route to fall back on
    EXPECT_EQ(invoke({"eval", "wright", "--lam", "0.5", "--beta", "0.5", "--x", "-400", "--route", "series"}).code, 3);
}

TEST(CliFormat, CsvAndJsonAgree) {
    const auto csv = invoke({"dist", "--n", "2", "--nu", "0.6", "--lambda", "1", "pmf", "--k", "0,1", "--t", "0.5,1,2"});
    ASSERT_EQ(csv.code, 0) << csv.err;
    const auto j =
        invoke_json({"dist", "--n", "2", "--nu", "0.6", "--lambda", "1", "pmf", "--k", "0,1", "--t", "0.5,1,2"});
    const auto rows = parse_csv(csv.out);
    ASSERT_EQ(rows.size(), j.size() + 1);
    ASSERT_GE(rows[0].size(), 2u);
    EXPECT_EQ(rows[0][0], "x");
    EXPECT_EQ(rows[0][1], "y");
    for (std::size_t i = 0; i < j.size(); ++i) {
        ASSERT_EQ(rows[i + 1].size(), rows[0].size());
        // shortest round-trip formatting parses back to the identical double
        EXPECT_EQ(std::stod(rows[i + 1][0]), j[i]["x"].get<double>());
        EXPECT_EQ(std::stod(rows[i + 1][1]), j[i]["y"].get<double>());
        for (std::size_t c = 2; c < rows[0].size(); ++c) {
            const auto& v = j[i]["meta"][rows[0][c]];
            if (v.is_string()) EXPECT_EQ(rows[i + 1][c], v.get<std::string>());
            else EXPECT_EQ(std::stod(rows[i + 1][c]), v.get<double>());
        }
    }
}

TEST(CliFormat, SchemaIdenticalAcrossCommands) {
    const std::vector<nlohmann::json> outputs = {
        invoke_json({"eval", "ml", "--alpha", "0.5", "--beta", "1", "--x", "-1"}),
        invoke_json({"dist", "--n", "1", "--nu", "0.5", "--lambda", "1", "renewal", "--t", "1"}),
        invoke_json({"simulate", "--n", "1", "--nu", "0.5", "--lambda", "1", "--horizon", "1", "--paths", "50"}),
    };
    for (const auto& j : outputs) {
        ASSERT_FALSE(j.empty());
        for (const auto& r : j) {
            std::vector<std::string> keys;
            for (const auto& [k, _] : r.items()) keys.push_back(k);
            EXPECT_EQ(keys, (std::vector<std::string>{"meta", "x", "y"}));  // parsed keys come back sorted
            EXPECT_TRUE(r["meta"].contains("command"));
            EXPECT_TRUE(r["meta"].contains("provenance"));
            // round trip through text
            EXPECT_EQ(nlohmann::json::parse(r.dump()), r);
        }
    }
}
