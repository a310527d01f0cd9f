#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "mdcycles/bundled.hpp"
#include "mdcycles/cli.hpp"

using namespace mdcycles;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result call(std::vector<std::string> args) {
    args.insert(args.begin(), "mdcycles");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("mdcycles_cli_") + info->name() + "_" +
                                            std::to_string(std::random_device{}()));
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    std::string write(const std::string& name, std::string_view text) const {
        std::ofstream(path(name), std::ios::binary) << text;
        return path(name);
    }

    static std::string slurp(const std::string& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    fs::path dir_;
};

} // namespace

TEST_F(CliTest, UsageErrors) {
    EXPECT_EQ(call({}).code, cli::kUsageError);
    EXPECT_EQ(call({"frobnicate"}).code, cli::kUsageError);
    auto r = call({"ingest", "--out", path("x.csv")});
    EXPECT_EQ(r.code, cli::kUsageError);
    EXPECT_NE(r.err.find("--pmn or --pma"), std::string::npos);
    EXPECT_EQ(call({"analyze", "--input", "@bundled"}).code, cli::kUsageError);
    EXPECT_EQ(call({"analyze", "--input", "@bundled", "--column", "X510kr", "--mode", "sideways"}).code,
              cli::kUsageError);
    EXPECT_EQ(call({"analyze", "--input", "@bundled", "--column", "nope"}).code, cli::kUsageError);
}

TEST_F(CliTest, IngestFixtureSatisfiesCompositeIdentity) {
    const auto pmn = write("pmn.txt", "KNUMBER|APPLICANT|DATERECEIVED|DECISIONDATE\n"
                                      "K800001|A|01/15/1980|03/02/1980\n"
                                      "K800002|A|02/01/1980|03/20/1980\n"
                                      "K800003|B|02/20/1980|\n"
                                      "K800004|B|12/31/1979|01/04/1980\n");
    const auto pma = write("pma.txt", "PMANUMBER|DATERECEIVED|DECISIONDATE\n"
                                      "P800001|02/11/1980|03/30/1980\n"
                                      "P800002|03/01/1980|\n");
    const auto out = path("counts.csv");
    auto r = call({"ingest", "--pmn", pmn, "--pma", pma, "--start", "1980-01", "--out", out});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    EXPECT_NE(r.out.find("read=4 kept=4"), std::string::npos) << r.out;
    EXPECT_EQ(slurp(out), "date,X510kr,X510kc,PMAr,PMAa,X510krPMAr,X510kcPMAa\n"
                          "1980-01,1,1,0,0,1,1\n"
                          "1980-02,2,0,1,0,3,0\n"
                          "1980-03,0,2,1,1,1,3\n");
    // the written table reloads, which re-checks the identity on every row
    EXPECT_NO_THROW(load_counts_table(slurp(out)));
}

TEST_F(CliTest, IngestSingleDateField) {
    const auto pmn = write("pmn.txt", "KNUMBER|DATERECEIVED|DECISIONDATE\nK1|01/15/1980|03/02/1980\n");
    auto r = call({"ingest", "--pmn", pmn, "--date-field", "decision", "--start", "1980-01", "--end", "1980-03",
                   "--out", path("c.csv")});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    EXPECT_EQ(slurp(path("c.csv")), "date,X510kc,PMAa,X510kcPMAa\n1980-01,0,0,0\n1980-02,0,0,0\n1980-03,1,0,1\n");
    EXPECT_EQ(call({"ingest", "--pmn", pmn, "--date-field", "sideways", "--out", path("d.csv")}).code,
              cli::kUsageError);
}

TEST_F(CliTest, IngestSchemaErrorIsDataError) {
    const auto bad = write("bad.txt", "KNUMBER|APPLICANT\nK1|x\n");
    auto r = call({"ingest", "--pmn", bad, "--out", path("c.csv")});
    EXPECT_EQ(r.code, cli::kDataError);
    EXPECT_FALSE(r.err.empty());
    EXPECT_EQ(call({"ingest", "--pmn", path("missing.txt"), "--out", path("c.csv")}).code, cli::kDataError);
}

TEST_F(CliTest, FromCountsIsByteStable) {
    ASSERT_EQ(call({"ingest", "--from-counts", "@bundled", "--out", path("a.csv")}).code, cli::kOk);
    ASSERT_EQ(call({"ingest", "--from-counts", path("a.csv"), "--out", path("b.csv")}).code, cli::kOk);
    const auto a = slurp(path("a.csv"));
    EXPECT_EQ(a, slurp(path("b.csv")));
    EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 537);
}

TEST_F(CliTest, AnalyzeBundledApplications) {
    auto r = call({"analyze", "--input", "@bundled", "--column", "X510krPMAr", "--report", path("a.json"), "--decomp",
                   path("a.csv")});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    EXPECT_EQ(r.out.rfind("X510krPMAr: P1=1992-04[", 0), 0u) << r.out;
    auto j = nlohmann::json::parse(slurp(path("a.json")));
    EXPECT_NEAR(j["period_years"].get<double>(), 20.5, 0.25);
    EXPECT_NEAR(j["rpd_percent"].get<double>(), 24, 1.5);
    EXPECT_NE(r.err.find("forced"), std::string::npos);
    EXPECT_EQ(slurp(path("a.csv")).substr(0, 33), "date,data,trend,seasonal,residual");
}

TEST_F(CliTest, AnalyzeBundledRegistrations) {
    auto r = call({"analyze", "--input", "@bundled", "--column", "X510kcPMAa"});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    EXPECT_NE(r.out.find("P1=1992-09"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("P2=2019-03"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("period=26.5000y"), std::string::npos) << r.out;
    EXPECT_TRUE(r.err.empty()) << r.err;
}

TEST_F(CliTest, FlagsOverrideConfig) {
    // plain first-two selection on the applications trend takes the two early-1990s peaks
    auto r = call({"analyze", "--input", "@bundled", "--column", "X510krPMAr", "--mode", "auto_first_two",
                   "--threshold", "0", "--report", path("r.json")});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    auto j = nlohmann::json::parse(slurp(path("r.json")));
    EXPECT_EQ(j["selection"]["mode"], "auto_first_two");
    EXPECT_TRUE(j["selection"]["explicit"].is_null());
    EXPECT_EQ(j["selection"]["peak_options"]["threshold"], 0.0);
}

TEST_F(CliTest, ConstantColumnIsInsufficient) {
    std::string csv = "X510kr,X510kc,PMAr,PMAa,X510krPMAr,X510kcPMAa\n";
    for (int i = 0; i < 48; ++i) csv += "5,5,5,5,10,10\n";
    const auto in = write("flat.csv", csv);
    const auto cfg = write("plain.ini", "[peaks]\nthreshold = 0\n");
    auto r = call({"analyze", "--input", in, "--column", "X510kcPMAa", "--config", cfg});
    EXPECT_EQ(r.code, cli::kDataError);
    EXPECT_NE(r.err.find("found 0 peak(s)"), std::string::npos) << r.err;
    EXPECT_NE(r.err.find("no candidates"), std::string::npos) << r.err;
}

TEST_F(CliTest, BadConfigIsUsageError) {
    const auto cfg = write("bad.ini", "[peaks]\nthreshold = lots\n");
    EXPECT_EQ(call({"analyze", "--input", "@bundled", "--column", "X510kr", "--config", cfg}).code, cli::kUsageError);
    const auto garbage = write("garbage.ini", "this is not a key value line\n");
    EXPECT_EQ(call({"analyze", "--input", "@bundled", "--column", "X510kr", "--config", garbage}).code,
              cli::kUsageError);
}

TEST_F(CliTest, PlotFromAnalyzeOutputs) {
    for (const char* col : {"X510krPMAr", "X510kcPMAa"}) {
        ASSERT_EQ(call({"analyze", "--input", "@bundled", "--column", col, "--report", path(std::string(col) + ".json"),
                        "--decomp", path(std::string(col) + ".csv")})
                      .code,
                  cli::kOk);
    }
    const auto decomps = path("X510krPMAr.csv") + "," + path("X510kcPMAa.csv");
    const auto reports = path("X510krPMAr.json") + "," + path("X510kcPMAa.json");
    ASSERT_EQ(call({"plot", "--decomp", decomps, "--report", reports, "--colors", "red,blue", "--out", path("f.svg")}).code,
              cli::kOk);
    ASSERT_EQ(call({"plot", "--decomp", decomps, "--report", reports, "--colors", "red,blue", "--out", path("g.svg")}).code,
              cli::kOk);
    const auto svg = slurp(path("f.svg"));
    EXPECT_EQ(svg, slurp(path("g.svg")));
    auto count = [&](const std::string& needle) {
        std::size_t n = 0;
        for (auto p = svg.find(needle); p != std::string::npos; p = svg.find(needle, p + 1)) ++n;
        return n;
    };
    EXPECT_EQ(count("<polyline"), 2u);
    EXPECT_EQ(count("class=\"vrule\""), 6u);
    EXPECT_EQ(count("class=\"hrule\""), 6u);

    ASSERT_EQ(call({"plot", "--decomp", path("X510krPMAr.csv"), "--out", path("h.svg")}).code, cli::kOk);
    EXPECT_EQ(slurp(path("h.svg")).find("vrule"), std::string::npos);
    EXPECT_EQ(call({"plot", "--decomp", path("nothing.csv"), "--out", path("i.svg")}).code, cli::kDataError);
}

TEST_F(CliTest, ReproduceWritesAllArtifacts) {
    auto r = call({"reproduce-paper", "--out-dir", path("rp")});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    for (const char* f : {"X510krPMAr.report.json", "X510krPMAr.decomp.csv", "X510kcPMAa.report.json",
                          "X510kcPMAa.decomp.csv", "figure2.svg"}) {
        EXPECT_TRUE(fs::exists(path("rp/") + f)) << f;
    }
    // summary lines come out in configured column order
    EXPECT_LT(r.out.find("X510krPMAr:"), r.out.find("X510kcPMAa:"));
}
