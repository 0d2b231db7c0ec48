#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "fixtures.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + (env.empty() ? "" : " ") + TRACEFORGE_CLI + " " + args + " 2>/dev/null";
    Run r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
    const int status = ::pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

/// Relative path -> contents, for whole-archive comparison.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = read_file(e.path());
    }
    return out;
}

constexpr const char* kFast = " --trees 10 --repetitions 2 --jobs 1";

}  // namespace

TEST(Cli, ExitCodes) {
    EXPECT_EQ(run("").code, 1);
    EXPECT_EQ(run("frobnicate").code, 1);
    EXPECT_EQ(run("synth").code, 1);
    EXPECT_EQ(run("stats --project /nonexistent/archive").code, 2);
    EXPECT_EQ(run("train --project /nonexistent/archive --classifier svm").code, 1);
    EXPECT_EQ(run("train --project /nonexistent/archive --classifier rf").code, 2);
    EXPECT_EQ(run("--help").code, 0);
    fixtures::TempDir dir("cli-codes");
    EXPECT_EQ(run("synth --n-issues 0 --out " + dir.path.string()).code, 1);
}

TEST(Cli, SeedFromEnvironment) {
    fixtures::TempDir a("cli-env"), b("cli-env"), c("cli-env");
    const std::string small = " --n-issues 40 --n-commits 80";
    const auto ra = run("synth --seed 3" + small + " --out " + a.path.string());
    ASSERT_EQ(ra.code, 0);
    EXPECT_EQ(nlohmann::json::parse(ra.out)["seed"], 3);
    ASSERT_EQ(run("synth" + small + " --out " + b.path.string(), "TRACE_FORGE_SEED=3").code, 0);
    ASSERT_EQ(run("synth" + small + " --out " + c.path.string(), "TRACE_FORGE_SEED=4").code, 0);
    const auto sa = snapshot(a.path);
    EXPECT_EQ(sa, snapshot(b.path));
    EXPECT_NE(sa.at("commits.jsonl"), snapshot(c.path).at("commits.jsonl"));
}

TEST(Cli, SynthTrainRecommendAugment) {
    fixtures::TempDir dir("cli-flow");
    const auto archive = dir.path.string();
    ASSERT_EQ(run("synth --seed 7 --out " + archive).code, 0);
    ASSERT_EQ(run("train --project " + archive + kFast).code, 0);

    std::ifstream truth(dir.path / "ground_truth.jsonl");
    std::string line;
    ASSERT_TRUE(std::getline(truth, line));
    const std::string hash = nlohmann::json::parse(line)["commit_hash"];
    const auto rec = run("recommend --project " + archive + " --commit " + hash + " -k 2");
    ASSERT_EQ(rec.code, 0);
    const auto j = nlohmann::json::parse(rec.out);
    EXPECT_EQ(j["recommendations"].size(), 2u);
    EXPECT_EQ(run("recommend --project " + archive + " --commit nosuchhash").code, 2);

    const auto before = snapshot(dir.path);
    const auto dry = run("augment --dry-run --stats --project " + archive);
    ASSERT_EQ(dry.code, 0);
    EXPECT_TRUE(nlohmann::json::accept(dry.out));
    EXPECT_EQ(snapshot(dir.path), before);

    ASSERT_EQ(run("augment --project " + archive).code, 0);
    EXPECT_NE(read_file(dir.path / "links.jsonl"), before.at("links.jsonl"));
    EXPECT_EQ(read_file(dir.path / "links.jsonl").find("\"HumanAccepted\""), std::string::npos);
}

TEST(Cli, EvaluateIsByteIdentical) {
    fixtures::TempDir dir("cli-eval");
    const auto archive = dir.path.string();
    ASSERT_EQ(run("synth --seed 7 --out " + archive).code, 0);
    const std::string args = "evaluate --project " + archive + " --ground-truth " +
                             (dir.path / "ground_truth.jsonl").string() + kFast;
    const auto a = run(args);
    const auto b = run(args);
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    const auto j = nlohmann::json::parse(a.out);
    ASSERT_EQ(j["results"].size(), 2u);
    EXPECT_EQ(j["results"][0]["truth_source"], "ground-truth-withheld");
    EXPECT_EQ(run("evaluate --project " + archive + " --format xml" + kFast).code, 1);
}
