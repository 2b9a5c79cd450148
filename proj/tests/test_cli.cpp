// End-to-end checks of the command-line binary: exit codes, determinism and
// the file artifacts each subcommand promises. The binary path comes from
// the build system.

#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "padnet/image_io.hpp"
#include "padnet/network.hpp"

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args) {
    std::string cmd = std::string(PADNET_CLI_PATH) + " " + args + " 2>&1";
    std::array<char, 4096> buf{};
    RunResult res;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return res;
    while (std::fgets(buf.data(), int(buf.size()), pipe)) res.output += buf.data();
    int status = pclose(pipe);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string tmp_dir(const std::string& name) {
    std::string d = testing::TempDir() + name;
    std::filesystem::create_directories(d);
    return d;
}

}  // namespace

TEST(Cli, HelpListsSubcommandsAndFlags) {
    RunResult top = run_cli("--help");
    EXPECT_EQ(top.exit_code, 0);
    for (const char* sub : {"synthesize", "train", "dehaze", "eval", "gradcheck", "sweep"})
        EXPECT_NE(top.output.find(sub), std::string::npos) << sub;

    RunResult synth = run_cli("synthesize --help");
    EXPECT_EQ(synth.exit_code, 0);
    for (const char* flag : {"--seed", "--threads", "--out", "--n-train", "--beta-lo"})
        EXPECT_NE(synth.output.find(flag), std::string::npos) << flag;
    EXPECT_NE(synth.output.find("default"), std::string::npos);
}

TEST(Cli, SynthesizeCreatesManifestsAndIsDeterministic) {
    std::string out1 = tmp_dir("cli_synth1");
    std::string out2 = tmp_dir("cli_synth2");
    std::string args = "synthesize --seed 7 --n-train 3 --n-val 1 --n-test 1 --patch-size 24";
    RunResult r1 = run_cli(args + " --out " + out1);
    ASSERT_EQ(r1.exit_code, 0) << r1.output;
    EXPECT_NE(r1.output.find(out1 + "/train.txt"), std::string::npos);
    EXPECT_TRUE(std::filesystem::exists(out1 + "/train.txt"));
    EXPECT_TRUE(std::filesystem::exists(out1 + "/val.txt"));
    EXPECT_TRUE(std::filesystem::exists(out1 + "/test.txt"));

    RunResult r2 = run_cli(args + " --out " + out2);
    ASSERT_EQ(r2.exit_code, 0);
    EXPECT_EQ(slurp(out1 + "/train.txt"), slurp(out2 + "/train.txt"));
    EXPECT_EQ(slurp(out1 + "/images/train_0000_hazy.png"),
              slurp(out2 + "/images/train_0000_hazy.png"));
}

TEST(Cli, SynthesizeRejectsBadRangeNamingKey) {
    RunResult r = run_cli("synthesize --beta-lo 2.0 --beta-hi 0.5 --out " + tmp_dir("cli_bad"));
    EXPECT_NE(r.exit_code, 0);
    EXPECT_NE(r.output.find("beta"), std::string::npos);
}

TEST(Cli, TrainDehazeEvalPipeline) {
    std::string data = tmp_dir("cli_data");
    ASSERT_EQ(run_cli("synthesize --seed 3 --n-train 4 --n-val 2 --n-test 2 --patch-size 32 "
                      "--out " + data)
                  .exit_code,
              0);

    std::string run = tmp_dir("cli_run");
    RunResult tr = run_cli("train --loss L2 --epochs 2 --batch-size 4 --seed 3"
                           " --train-manifest " + data + "/train.txt"
                           " --val-manifest " + data + "/val.txt"
                           " --out " + run);
    ASSERT_EQ(tr.exit_code, 0) << tr.output;
    EXPECT_NE(tr.output.find("final validation"), std::string::npos);
    EXPECT_TRUE(std::filesystem::exists(run + "/final.ckpt"));
    EXPECT_TRUE(std::filesystem::exists(run + "/best.ckpt"));
    EXPECT_TRUE(std::filesystem::exists(run + "/history.csv"));
    EXPECT_TRUE(std::filesystem::exists(run + "/val_history.csv"));

    std::string restored = run + "/restored.png";
    RunResult dh = run_cli("dehaze " + run + "/final.ckpt " + data +
                           "/images/test_0000_hazy.png " + restored);
    ASSERT_EQ(dh.exit_code, 0) << dh.output;
    EXPECT_EQ(dh.output, "");  // silent on success
    padnet::Image in = padnet::load_image(data + "/images/test_0000_hazy.png");
    padnet::Image out = padnet::load_image(restored);
    EXPECT_EQ(out.height, in.height);
    EXPECT_EQ(out.width, in.width);
    EXPECT_EQ(out.channels, 3);

    RunResult ev = run_cli("eval --checkpoint " + run + "/final.ckpt --manifest " + data +
                           "/test.txt --out " + run);
    ASSERT_EQ(ev.exit_code, 0) << ev.output;
    EXPECT_TRUE(std::filesystem::exists(run + "/eval.csv"));
    EXPECT_NE(ev.output.find("mean"), std::string::npos);
}

TEST(Cli, TrainWithoutManifestFailsBeforeTraining) {
    RunResult r = run_cli("train --loss L2 --epochs 1 --out " + tmp_dir("cli_nomanifest"));
    EXPECT_NE(r.exit_code, 0);
    EXPECT_NE(r.output.find("manifest"), std::string::npos);
}

TEST(Cli, DehazeRejectsCorruptCheckpoint) {
    std::string dir = tmp_dir("cli_corrupt");
    std::ofstream(dir + "/bad.ckpt", std::ios::binary) << "PADNETv1 then junk bytes";
    std::string img = dir + "/in.png";
    padnet::save_image(padnet::Image(16, 16, 3, 0.5), img);
    RunResult r = run_cli("dehaze " + dir + "/bad.ckpt " + img + " " + dir + "/out.png");
    EXPECT_NE(r.exit_code, 0);
    EXPECT_NE(r.output.find("checkpoint"), std::string::npos);
}

TEST(Cli, GradcheckPassesForPixelLosses) {
    RunResult r = run_cli("gradcheck L2 --size 13 --pairs 2");
    EXPECT_EQ(r.exit_code, 0) << r.output;
    EXPECT_NE(r.output.find("PASS"), std::string::npos);
    EXPECT_NE(r.output.find("max rel err"), std::string::npos);
}

TEST(Cli, GradcheckUnknownLossListsValidKinds) {
    RunResult r = run_cli("gradcheck HUBER");
    EXPECT_NE(r.exit_code, 0);
    for (const char* kind : {"L2", "L1", "SSIM", "MSSSIM", "MSSSIM_L2", "MSSSIM_L1"})
        EXPECT_NE(r.output.find(kind), std::string::npos) << kind;
}

TEST(Cli, RequiresSubcommand) {
    RunResult r = run_cli("");
    EXPECT_NE(r.exit_code, 0);
}
