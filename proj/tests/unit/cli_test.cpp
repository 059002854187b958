#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

#include "oracles.hpp"
#include "oucd/data/image_io.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
    int code = -1;
    std::string out;
};

Result run(const std::string& args, const fs::path& capture) {
    const std::string cmd = std::string(OUCD_CLI) + " " + args + " > " + capture.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream is(capture);
    std::stringstream ss;
    ss << is.rdbuf();
    r.out = ss.str();
    return r;
}

class Cli : public ::testing::Test {
protected:
    oracle::TempDir dir{"cli"};
    Result cli(const std::string& args) { return run(args, dir / "capture.txt"); }
    std::string p(const std::string& rel) const { return (dir / rel).string(); }
};

} // namespace

TEST_F(Cli, HelpAndUsageErrors) {
    EXPECT_EQ(cli("--help").code, 0);
    EXPECT_EQ(cli("frobnicate").code, 2);
    EXPECT_EQ(cli("").code, 2);
    EXPECT_EQ(cli("rf-report -s model.no_such_key=1").code, 2);
    EXPECT_EQ(cli("rf-report --kernel 0").code, 2);
}

TEST_F(Cli, BadCheckpointIsIntegrityError) {
    std::ofstream(p("bad.oucd")) << "garbage";
    oucd::save_image(oucd::Tensor<float>(oucd::Shape{1, 3, 32, 32}, 0.5F), p("in.png"));
    const auto r = cli("infer --checkpoint " + p("bad.oucd") + " --input " + p("in.png") + " -o " +
                       p("out"));
    EXPECT_EQ(r.code, 3) << r.out;
}

TEST_F(Cli, RfReportAndSingleGradcheckRow) {
    const auto rf = cli("rf-report -k 3 -L 3");
    EXPECT_EQ(rf.code, 0);
    EXPECT_NE(rf.out.find("12"), std::string::npos);
    const auto g = cli("gradcheck --ops relu --precision single --cases 5");
    EXPECT_EQ(g.code, 0) << g.out;
    int rows = 0;
    std::istringstream is(g.out);
    for (std::string line; std::getline(is, line);) rows += line.rfind("relu", 0) == 0;
    EXPECT_EQ(rows, 1) << g.out;
}

TEST_F(Cli, SynthTrainInferEval) {
    const std::string synth = "synth --generate-clean 4 --size 32 --seed 5 -o ";
    ASSERT_EQ(cli(synth + p("a")).code, 0);
    ASSERT_EQ(cli(synth + p("b")).code, 0);
    for (const auto& e : fs::recursive_directory_iterator(dir / "a")) {
        if (!e.is_regular_file() || e.path().filename() == "effective_config.ini") continue;
        const auto rel = fs::relative(e.path(), dir / "a");
        EXPECT_EQ(oracle::read_bytes(e.path()), oracle::read_bytes(dir / "b" / rel)) << rel;
    }

    const auto t = cli("train --data " + p("a") + " -o " + p("run") +
                       " -s train.max_steps=2 --seed 1");
    ASSERT_EQ(t.code, 0) << t.out;
    ASSERT_TRUE(fs::exists(dir / "run" / "checkpoint.oucd"));

    oucd::save_image(oucd::Tensor<float>(oucd::Shape{1, 3, 33, 47}, 0.4F), p("odd.png"));
    const auto i = cli("infer --checkpoint " + p("run/checkpoint.oucd") + " --input " +
                       p("odd.png") + " -o " + p("inf"));
    ASSERT_EQ(i.code, 0) << i.out;
    EXPECT_EQ(oucd::load_image(dir / "inf" / "odd.png").shape(), (oucd::Shape{1, 3, 33, 47}));

    const auto e = cli("eval --checkpoint " + p("run/checkpoint.oucd") + " --data " + p("a") +
                       " --split train -o " + p("ev"));
    ASSERT_EQ(e.code, 0) << e.out;
    EXPECT_TRUE(fs::exists(dir / "ev" / "report.txt"));
    const auto j = nlohmann::json::parse(std::ifstream(dir / "ev" / "report.json"));
    EXPECT_FALSE(j["images"].empty());
}
