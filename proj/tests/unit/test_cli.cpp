#include "gse/model_io.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

using gse::io::Json;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run run(const std::string& args) {
    const std::string cmd = std::string(GSE_CLI_PATH) + " " + args + " 2>&1";
    Run r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    std::array<char, 4096> buf{};
    std::size_t got;
    while ((got = std::fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), got);
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

class TempModel {
public:
    explicit TempModel(const std::string& text) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("gse_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++) + ".json");
        std::ofstream(path_) << text;
    }
    ~TempModel() { std::filesystem::remove(path_); }
    std::string path() const { return path_.string(); }

private:
    std::filesystem::path path_;
};

const char* kExample = R"({"family": "normal", "mu": [3, 4], "sigma": [[0.9, 0.5], [0.5, 0.7]],
                           "gamma": [1, 2], "skew": "normal_cdf"})";

}  // namespace

TEST(Cli, MomentsOnExample) {
    TempModel m(kExample);
    const auto r = run("moments " + m.path() + " --lower 2,2 --upper 6,7");
    ASSERT_EQ(r.code, 0) << r.out;
    const Json j = Json::parse(r.out);
    EXPECT_EQ(j["schema_version"], 1);
    EXPECT_EQ(j["command"], "moments");
    EXPECT_EQ(j["model"]["root"], "cholesky");
    EXPECT_NEAR(j["results"]["mdte"][0].get<double>(), 3.443302, 1e-5);
    EXPECT_NEAR(j["results"]["mdte"][1].get<double>(), 4.601220, 1e-5);
    EXPECT_TRUE(j["diagnostics"].contains("kernels"));
}

TEST(Cli, FullSpaceSymmetric) {
    TempModel m(R"({"family": "logistic", "mu": [1, -1], "sigma": [[2, 0.3], [0.3, 1]], "skew": "constant_half"})");
    const auto r = run("moments " + m.path() + " --lower -inf,-inf --upper inf,inf");
    ASSERT_EQ(r.code, 0) << r.out;
    const Json j = Json::parse(r.out);
    EXPECT_EQ(j["request"]["lower"][0], "-inf");
    EXPECT_NEAR(j["results"]["prob"].get<double>(), 1.0, 1e-6);
    EXPECT_NEAR(j["results"]["mdte"][0].get<double>(), 1.0, 1e-6);
    EXPECT_NEAR(j["results"]["mdte"][1].get<double>(), -1.0, 1e-6);
}

TEST(Cli, InvalidSigmaExitsTwo) {
    TempModel m(R"({"family": "normal", "mu": [0, 0], "sigma": [[1, 0.5], [0.4, 1]], "gamma": [1, 1], "skew": "normal_cdf"})");
    const auto r = run("validate " + m.path());
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.out.find("symmetric"), std::string::npos) << r.out;
}

TEST(Cli, BadArgumentsExitTwo) {
    TempModel m(R"({"family": "normal", "mu": [0], "sigma": [[1]], "skew": "constant_half"})");
    EXPECT_EQ(run("risk " + m.path() + " --q 1.0").code, 2);
    EXPECT_EQ(run("risk " + m.path() + " --q 0.5,0.5").code, 2);
    EXPECT_EQ(run("moments " + m.path() + " --lower 1 --upper 0").code, 2);
    EXPECT_EQ(run("moments " + m.path()).code, 2);
    EXPECT_EQ(run("frobnicate").code, 2);
    EXPECT_EQ(run("validate /nonexistent.json").code, 2);
}

TEST(Cli, RiskMedianOfSymmetricLaw) {
    TempModel m(R"({"family": "normal", "mu": [1.25], "sigma": [[4]], "skew": "constant_half"})");
    const auto r = run("risk " + m.path() + " --q 0.5 --measure var");
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_NEAR(Json::parse(r.out)["results"]["var"][0].get<double>(), 1.25, 1e-8);
    const auto t = run("risk " + m.path() + " --q 0.5 --measure mtcov");
    ASSERT_EQ(t.code, 0) << t.out;
    const Json j = Json::parse(t.out);
    EXPECT_TRUE(j["results"].contains("mtcov"));
    EXPECT_NEAR(j["results"]["mtce"][0].get<double>(), 1.25 + 2.0 * 2.0 * 0.3989422804014327, 1e-6);
}

TEST(Cli, CheckAgreesWithOracle) {
    TempModel m(kExample);
    const auto r = run("check " + m.path() + " --lower 2,2 --upper 6,7 --samples 1000000");
    ASSERT_EQ(r.code, 0) << r.out;
    const Json j = Json::parse(r.out);
    EXPECT_TRUE(j["passed"].get<bool>());
    EXPECT_LT(j["max_abs_z"].get<double>(), 4.0);
    EXPECT_FALSE(j.contains("elliptical"));
}

TEST(Cli, CheckSymmetricIncludesEllipticalPath) {
    TempModel m(R"({"family": "student_t", "df": 6, "mu": [0, 0], "sigma": [[1, 0.2], [0.2, 1]], "skew": "constant_half"})");
    const auto r = run("check " + m.path() + " --lower -1,0 --upper 1.5,inf --samples 200000");
    ASSERT_EQ(r.code, 0) << r.out;
    const Json j = Json::parse(r.out);
    ASSERT_TRUE(j.contains("elliptical"));
    EXPECT_LT(j["elliptical"]["max_abs_diff"].get<double>(), 1e-8);
}

TEST(Cli, OutputIsByteIdentical) {
    TempModel m(kExample);
    const std::string args = "moments " + m.path() + " --lower 2,-inf --upper 6,7";
    const auto a = run(args), b = run(args);
    ASSERT_EQ(a.code, 0) << a.out;
    EXPECT_EQ(a.out, b.out);
    const std::string s = "sample " + m.path() + " --count 50 --seed 3";
    const auto c = run(s), d = run(s);
    ASSERT_EQ(c.code, 0) << c.out;
    EXPECT_EQ(c.out, d.out);
    EXPECT_EQ(Json::parse(c.out)["draws"].size(), 50u);
}

TEST(Cli, ValidateEchoesResolvedModel) {
    TempModel m(R"({"family": "laplace", "mu": [0, 1], "sigma": [[1, 0], [0, 2]], "skew": "constant_half"})");
    const auto r = run("validate " + m.path());
    ASSERT_EQ(r.code, 0) << r.out;
    const Json j = Json::parse(r.out);
    EXPECT_TRUE(j["valid"].get<bool>());
    EXPECT_EQ(j["model"]["gamma"].size(), 2u);
    EXPECT_EQ(j["model"]["root"], "cholesky");
}
