#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mured/cli.hpp"

namespace fs = std::filesystem;
using mured::json;

namespace {

struct result {
    int code;
    std::string out;
    std::string err;
};

result run(std::vector<std::string> args) {
    args.insert(args.begin(), "mured");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = mured::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string fixture(const std::string& name) { return std::string(MURED_FIXTURE_DIR) + "/" + name; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

class CliFiles : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("mured_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
                                            ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string write(const std::string& name, const std::string& text) {
        const auto p = dir_ / name;
        std::ofstream(p, std::ios::binary) << text;
        return p.string();
    }

    fs::path dir_;
};

std::string xor_then_copy_log() {
    std::string s = "t,x,y,z\n";
    int t = 0;
    for (int r = 0; r < 5; ++r)
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                s += std::to_string(t++) + "," + std::to_string(a) + "," + std::to_string(b) + "," + std::to_string(a ^ b) + "\n";
    for (int r = 0; r < 10; ++r)
        for (int a = 0; a < 2; ++a) s += std::to_string(t++) + "," + std::to_string(a) + "," + std::to_string(a) + "," + std::to_string(a) + "\n";
    return s;
}

}  // namespace

TEST(Cli, PearsonOnTheFirmMatrix) {
    const auto r = run({"vspace", "pearson", fixture("appendix_firms.csv"), "--rows", "Firm A,Firm B"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = json::parse(r.out);
    EXPECT_NEAR(j.at("value").get<double>(), 0.1667, 1e-4);
    EXPECT_NEAR(j.at("value").get<double>(), 1.0 / 6.0, 1e-15);
}

TEST(Cli, CosineOnTheFirmMatrix) {
    const auto r = run({"vspace", "cosine", fixture("appendix_firms.csv"), "--rows", "Firm A,Firm B", "--format", "csv"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, "axis,kind,labels,value\nrows,cosine,Firm A;Firm B,0.6666666667\n");
}

TEST(Cli, XorTransmission) {
    const auto r = run({"mi", fixture("xor.json"), "--vars", "x1,x2,x3"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = json::parse(r.out);
    EXPECT_DOUBLE_EQ(j.at("transmission").get<double>(), -1.0);
    EXPECT_EQ(j.at("base"), "bits");
}

TEST(Cli, IndependentDecompositionIsAllZero) {
    const auto r = run({"decompose", fixture("independent3.json"), "--vars", "a,b,c"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = json::parse(r.out);
    EXPECT_EQ(j.at("regime"), "balanced");
    EXPECT_EQ(j.at("negative_term").get<double>(), 0.0);
    EXPECT_EQ(j.at("config_term").get<double>(), 0.0);
    EXPECT_EQ(j.at("redundancy").get<double>(), 0.0);
    for (const auto& [k, v] : j.at("transmissions").items()) EXPECT_EQ(v.get<double>(), 0.0) << k;
    EXPECT_EQ(j.at("base"), "bits");
}

TEST(Cli, RedundancyQAndEntropy) {
    auto r = run({"redundancy", fixture("copy3.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NEAR(json::parse(r.out).at("redundancy").get<double>(), 1.0, 1e-12);
    EXPECT_EQ(json::parse(r.out).at("regime"), "organization");

    r = run({"q", fixture("xor.json"), "--base", "nats"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NEAR(json::parse(r.out).at("q").get<double>(), std::log(2.0), 1e-12);
    EXPECT_EQ(json::parse(r.out).at("base"), "nats");

    r = run({"entropy", fixture("skewed3.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = json::parse(r.out);
    EXPECT_NEAR(j.at("h").get<double>(), 1.5, 1e-12);
    EXPECT_NEAR(j.at("redundancy").get<double>(), 0.0536, 1e-4);
}

TEST(Cli, EntropyOfASingleOutcomeReportsNullRedundancy) {
    const auto r = run({"entropy", fixture("deterministic8.json"), "--support", "observed"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(json::parse(r.out).at("redundancy").is_null());
}

TEST(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"frobnicate", "x"}).code, 2);
    EXPECT_EQ(run({"mi"}).code, 2);
    EXPECT_EQ(run({"mi", fixture("xor.json"), "--base", "decibels"}).code, 2);
    EXPECT_EQ(run({"series", "nope.csv"}).code, 2);
    EXPECT_EQ(run({"series", "nope.csv", "--window", "4", "--span", "1h", "--time-col", "t"}).code, 2);
    EXPECT_EQ(run({"series", "nope.csv", "--span", "1h"}).code, 2);
    EXPECT_EQ(run({"series", "nope.csv", "--window", "4", "--step", "8"}).code, 2);
    EXPECT_EQ(run({"vspace", "pearson", "nope.csv", "--rows", "a"}).code, 2);
    EXPECT_EQ(run({"vspace", "pearson", "nope.csv", "--rows", "a,b", "--cols", "c,d"}).code, 2);
    EXPECT_EQ(run({"capacity", "nope.csv", "--step", "2", "--support", "alphabet"}).code, 2);
    EXPECT_EQ(run({"vspace", "cosine", "nope.csv", "--rows", "a,b", "--base", "nats"}).code, 2);
    const auto r = run({"mi", fixture("xor.json"), "--alpha", "-1"});
    EXPECT_EQ(r.code, 2);
    EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
}

TEST(Cli, ComputationErrorsExitOne) {
    auto r = run({"mi", "/nonexistent/file.json"});
    EXPECT_EQ(r.code, 1);
    EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
    EXPECT_EQ(run({"mi", fixture("xor.json"), "--vars", "x1,nope"}).code, 1);
    EXPECT_EQ(run({"redundancy", fixture("xor.json"), "--vars", "x1"}).code, 1);
    EXPECT_EQ(run({"vspace", "pearson", fixture("appendix_firms.csv"), "--cols", "C2,C3"}).code, 1);
    EXPECT_EQ(run({"mi", fixture("xor.json"), "--out", "/nonexistent/dir/out.json"}).code, 1);
}

TEST(Cli, HelpExitsZero) {
    const auto r = run({"--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("decompose"), std::string::npos);
}

TEST_F(CliFiles, OutputIsByteIdenticalAcrossRuns) {
    const auto log = write("events.csv", xor_then_copy_log());
    const auto a = (dir_ / "a.jsonl").string();
    const auto b = (dir_ / "b.jsonl").string();
    ASSERT_EQ(run({"series", log, "--window", "20", "--decompose", "--time-col", "t", "--out", a}).code, 0);
    ASSERT_EQ(run({"series", log, "--window", "20", "--decompose", "--time-col", "t", "--out", b}).code, 0);
    EXPECT_EQ(slurp(a), slurp(b));
    EXPECT_FALSE(slurp(a).empty());
}

TEST_F(CliFiles, InputsAreNotModified) {
    const auto text = xor_then_copy_log();
    const auto log = write("events.csv", text);
    const auto before = fs::last_write_time(log);
    ASSERT_EQ(run({"series", log, "--window", "20", "--time-col", "t", "--format", "csv"}).code, 0);
    ASSERT_EQ(run({"capacity", log, "--step", "10", "--time-col", "t"}).code, 0);
    ASSERT_EQ(run({"entropy", log, "--vars", "x,y"}).code, 0);
    EXPECT_EQ(slurp(log), text);
    EXPECT_EQ(fs::last_write_time(log), before);
}

TEST_F(CliFiles, SeriesSegmentsAndJsonRoundTrip) {
    const auto log = write("events.csv", xor_then_copy_log());
    const auto r = run({"series", log, "--window", "20", "--vars", "x,y,z", "--time-col", "t", "--decompose"});
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream lines(r.out);
    std::vector<json> points;
    for (std::string line; std::getline(lines, line);) points.push_back(json::parse(line));
    ASSERT_EQ(points.size(), 2u);
    EXPECT_NEAR(points[0].at("r_n").get<double>(), -1.0, 1e-9);
    EXPECT_NEAR(points[1].at("r_n").get<double>(), 1.0, 1e-9);
    EXPECT_EQ(points[0].at("base"), "bits");
    EXPECT_EQ(points[1].at("decomposition").at("regime"), "organization");

    // reload: the printed doubles reproduce the computed values exactly
    std::ifstream in(log);
    const auto events = mured::load_events(in, mured::delimited_format::csv, mured::missing_policy::keep, "t");
    mured::series_options opts;
    opts.decompose = true;
    const auto direct = mured::window_series(events, {"x", "y", "z"}, mured::window_spec::by_count(20, 20), opts);
    for (std::size_t i = 0; i < points.size(); ++i) {
        EXPECT_EQ(points[i].at("h_obs").get<double>(), direct[i].h_obs);
        EXPECT_EQ(points[i].at("r_n").get<double>(), direct[i].r_n);
        EXPECT_EQ(points[i].at("decomposition").at("config_term").get<double>(), direct[i].decomposition->config_term);
    }
}

TEST_F(CliFiles, SeriesCsvHeader) {
    const auto log = write("events.csv", xor_then_copy_log());
    const auto r = run({"series", log, "--window", "20", "--time-col", "t", "--format", "csv"});
    ASSERT_EQ(r.code, 0) << r.err;
    const std::string header = r.out.substr(0, r.out.find('\n'));
    EXPECT_EQ(header, "window,start,end,count,h_obs,h_max,redundancy,T_x_y,T_x_z,T_y_z,r_n,regime");
    EXPECT_NE(r.out.find(",-1,self-organization\n"), std::string::npos);
}

TEST_F(CliFiles, CapacityCsvHeaderAndTimeSpans) {
    const auto log = write("events.csv", "t,x\n0,a\n60,b\n120,a\n3600,c\n");
    auto r = run({"capacity", log, "--step", "2", "--time-col", "t", "--format", "csv"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "window,end,count,h_obs,h_max,redundancy");
    r = run({"series", log, "--span", "1h", "--step", "30m", "--time-col", "t"});
    ASSERT_EQ(r.code, 0) << r.err;
    // [0, 1h) holds three events, [30m, 90m) the last one
    std::istringstream lines(r.out);
    std::vector<json> points;
    for (std::string line; std::getline(lines, line);) points.push_back(json::parse(line));
    ASSERT_EQ(points.size(), 2u);
    EXPECT_EQ(points[0].at("count"), 3);
    EXPECT_EQ(points[1].at("count"), 1);
    EXPECT_EQ(points[1].at("start"), "1800");
}

TEST_F(CliFiles, JsonTableRoundTrip) {
    const auto r = run({"entropy", fixture("uniform8.json"), "--base", "hartleys"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = json::parse(r.out);
    EXPECT_EQ(j.at("h").get<double>(), mured::entropy(mured::table_from_json(json::parse(slurp(fixture("uniform8.json")))),
                                                      mured::log_base::hartleys)
                                           .value);
    EXPECT_EQ(j.at("base"), "hartleys");
}

TEST_F(CliFiles, MalformedInputsExitOne) {
    EXPECT_EQ(run({"mi", write("bad.json", "{\"variables\": 3}")}).code, 1);
    EXPECT_EQ(run({"mi", write("trunc.json", "{")}).code, 1);
    EXPECT_EQ(run({"entropy", write("ragged.csv", "a,b\n1\n")}).code, 1);
    EXPECT_EQ(run({"entropy", write("strict.csv", "a,b\n1,\n"), "--missing", "strict"}).code, 1);
}

TEST_F(CliFiles, EigenOnTheFirmCosineMatrix) {
    const auto r = run({"vspace", "eigen", fixture("appendix_firms.csv"), "--kind", "cosine", "--k", "2"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = json::parse(r.out);
    EXPECT_NEAR(j.at("eigenpairs")[0].at("eigenvalue").get<double>(), 5.0 / 3.0, 1e-9);
    EXPECT_NEAR(j.at("eigenpairs")[1].at("eigenvalue").get<double>(), 1.0 / 3.0, 1e-9);
    for (const auto& p : j.at("eigenpairs")) EXPECT_LE(p.at("residual").get<double>(), 1e-10);

    const auto m = write("w.csv", ",a,b\na,2,1\nb,1,2\n");
    const auto r2 = run({"vspace", "eigen", m, "--matrix"});
    ASSERT_EQ(r2.code, 0) << r2.err;
    EXPECT_NEAR(json::parse(r2.out).at("eigenpairs")[0].at("eigenvalue").get<double>(), 3.0, 1e-9);
}

TEST(Cli, CheckPassesOnACleanBuild) {
    const auto r = run({"check", "--tables", "10"});
    ASSERT_EQ(r.code, 0) << r.out << r.err;
    EXPECT_TRUE(json::parse(r.out).at("passed").get<bool>());
}
