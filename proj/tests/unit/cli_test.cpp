// Copyright 2026 The CVBM Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "cvbm/cvbm.hpp"
#include "stats.hpp"

namespace {

using namespace cvbm;
namespace fs = std::filesystem;

std::string env_or(const char *name, const char *fallback) {
    const char *v = std::getenv(name);
    return (v == nullptr || *v == '\0') ? std::string(fallback) : std::string(v);
}

class CliTest : public ::testing::Test {
  protected:
    void SetUp() override {
        tool_ = env_or("CVBM_TOOL", CVBM_DEFAULT_TOOL);
        source_ = env_or("CVBM_SOURCE_DIR", CVBM_DEFAULT_SOURCE_DIR);
        ASSERT_TRUE(fs::exists(tool_)) << "cvbm tool not found at " << tool_;
        const auto *info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / "cvbm_cli_test" / info->name();
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }

    int run(const std::string &args) const {
        const std::string cmd = "'" + tool_ + "' " + args + " > '" + (dir_ / "stdout.txt").string() + "' 2> '" +
                                (dir_ / "stderr.txt").string() + "'";
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    [[nodiscard]] std::string config(const std::string &name) const { return source_ + "/configs/" + name; }

    /// Copy of a shipped config with edits applied, written into the test directory.
    std::string edited(const std::string &name, const std::function<void(json &)> &edit) const {
        json j = io::parse_file(config(name));
        edit(j);
        const fs::path out = dir_ / ("edited_" + name);
        io::write_file(out.string(), j);
        return out.string();
    }

    [[nodiscard]] std::string read(const fs::path &p) const {
        std::ifstream in(p);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    std::string tool_;
    std::string source_;
    fs::path dir_;
};

/// loss.csv without the wall-clock column.
std::vector<std::string> loss_rows_without_time(const std::string &text) {
    std::vector<std::string> rows;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        std::stringstream ls(line);
        std::string cell;
        std::string kept;
        int col = 0;
        while (std::getline(ls, cell, ',')) {
            if (col++ != 2) kept += cell + ",";
        }
        rows.push_back(kept);
    }
    return rows;
}

TEST_F(CliTest, TrainWritesArtifactsAndImproves) {
    const fs::path out = dir_ / "run";
    ASSERT_EQ(run("train '" + config("gaussian_state.json") + "' --output-dir '" + out.string() + "'"), 0)
        << read(dir_ / "stderr.txt");
    for (const char *f : {"loss.csv", "checkpoint.json", "checkpoint.meta.json", "final_samples.csv", "summary.json"}) {
        EXPECT_TRUE(fs::exists(out / f)) << f;
    }
    const auto rows = loss_rows_without_time(read(out / "loss.csv"));
    EXPECT_EQ(rows.front(), "iteration,loss,p0,p1,p2,");
    EXPECT_LE(rows.size() - 1, 50u);
    const json summary = io::parse_file((out / "summary.json").string());
    const double first = std::stod(rows[1].substr(rows[1].find(',') + 1));
    EXPECT_LT(summary.at("final_loss").get<double>(), first);
    EXPECT_EQ(datasets::load_csv((out / "final_samples.csv").string()).rows(), 10000);
    const json meta = io::parse_file((out / "checkpoint.meta.json").string());
    EXPECT_EQ(meta.at("iteration").get<std::size_t>(), rows.size() - 1);
    EXPECT_TRUE(meta.at("config").contains("train"));
    EXPECT_NO_THROW((void)io::load_circuit((out / "checkpoint.json").string()));
}

TEST_F(CliTest, TrainRerunIsIdentical) {
    const fs::path a = dir_ / "a";
    const fs::path b = dir_ / "b";
    ASSERT_EQ(run("train '" + config("gaussian_n01.json") + "' --seed 4 --output-dir '" + a.string() + "'"), 0);
    ASSERT_EQ(run("train '" + config("gaussian_n01.json") + "' --seed 4 --output-dir '" + b.string() + "'"), 0);
    for (const char *f : {"checkpoint.json", "checkpoint.meta.json", "final_samples.csv", "summary.json"}) {
        EXPECT_EQ(read(a / f), read(b / f)) << f;
    }
    EXPECT_EQ(loss_rows_without_time(read(a / "loss.csv")), loss_rows_without_time(read(b / "loss.csv")));
}

TEST_F(CliTest, InvalidConfigExitsTwoWithoutFiles) {
    const fs::path out = dir_ / "never";
    const std::string cfg = edited("gaussian_n01.json", [&](json &j) {
        j["train"]["learning_rate"] = 0.0;
        j["output_dir"] = out.string();
    });
    EXPECT_EQ(run("train '" + cfg + "'"), 2);
    EXPECT_FALSE(fs::exists(out));
    const std::string unknown = edited("gaussian_n01.json", [](json &j) { j["train"]["momentum"] = 0.9; });
    EXPECT_EQ(run("train '" + unknown + "'"), 2);
    EXPECT_EQ(run("train /nonexistent/config.json"), 2);
    EXPECT_EQ(run("frobnicate"), 2);
}

TEST_F(CliTest, GradCheckGaussianPasses) {
    ASSERT_EQ(run("grad-check '" + config("grad_check_gaussian.json") + "' --output-dir '" + dir_.string() + "'"), 0)
        << read(dir_ / "stdout.txt");
    const std::string csv = read(dir_ / "grad_check.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "param,shift_grad,fd_grad,abs_err");
}

TEST_F(CliTest, GradCheckNonGaussian) {
    ASSERT_EQ(run("grad-check '" + config("grad_check_cubic.json") + "' --output-dir '" + dir_.string() + "'"), 0)
        << read(dir_ / "stdout.txt");
    std::stringstream ss(read(dir_ / "grad_check.csv"));
    std::string line;
    std::getline(ss, line);
    int checked = 0;
    while (std::getline(ss, line)) {
        if (line.find("CubicPhase") == std::string::npos && line.find("Kerr") == std::string::npos) continue;
        EXPECT_LT(std::stod(line.substr(line.rfind(',') + 1)), 1e-3) << line;
        ++checked;
    }
    EXPECT_EQ(checked, 2);
    const std::string coarse = edited("grad_check_cubic.json", [](json &j) { j["train"]["shifts"]["nongaussian"] = 0.5; });
    EXPECT_NE(run("grad-check '" + coarse + "' --output-dir '" + dir_.string() + "'"), 0);
}

TEST_F(CliTest, NoiseSweepUnitTransmissionMatchesNoiseFree) {
    const std::string cfg = edited("gaussian_state.json", [](json &j) { j["train"]["max_iterations"] = 8; });
    const fs::path sweep = dir_ / "sweep";
    ASSERT_EQ(run("noise-sweep '" + cfg + "' --T 1.0 --seeds 1 --output-dir '" + sweep.string() + "'"), 0)
        << read(dir_ / "stderr.txt");
    // same config (its explicit M, N, R, S take precedence over the sweep defaults), no noise field
    const std::string plain = cfg;
    const fs::path train_dir = dir_ / "train";
    ASSERT_EQ(run("train '" + plain + "' --output-dir '" + train_dir.string() + "'"), 0);
    const json seed = io::parse_file(plain).at("train").at("seed");
    const fs::path curve = sweep / ("loss_T1_seed" + std::to_string(seed.get<std::uint64_t>()) + ".csv");
    ASSERT_TRUE(fs::exists(curve));
    EXPECT_EQ(loss_rows_without_time(read(curve)), loss_rows_without_time(read(train_dir / "loss.csv")));
    const std::string table = read(sweep / "noise_sweep.csv");
    EXPECT_EQ(table.substr(0, table.find('\n')), "T,seed,final_loss,mean_final_loss,std_final_loss");
}

TEST_F(CliTest, NoiseSweepRejectsBadTransmissivity) {
    EXPECT_EQ(run("noise-sweep '" + config("noise_gaussian.json") + "' --T 1.5 --output-dir '" + dir_.string() + "'"), 2);
    EXPECT_FALSE(fs::exists(dir_ / "noise_sweep.csv"));
}

TEST_F(CliTest, SampleVacuumCheckpoint) {
    const fs::path ckpt = dir_ / "vacuum.json";
    io::write_file(ckpt.string(), io::to_json(Circuit{1, {}}));
    const fs::path out = dir_ / "samples.csv";
    ASSERT_EQ(run("sample '" + ckpt.string() + "' --count 5000 --seed 3 --output '" + out.string() + "'"), 0);
    const Samples x = datasets::load_csv(out.string());
    ASSERT_EQ(x.rows(), 5000);
    const auto ks = stats::ks_one_sample(stats::to_vector(x.col(0)), [](double v) { return stats::normal_cdf(v); });
    EXPECT_GT(ks.pvalue, 0.01);
    EXPECT_EQ(run("sample /nonexistent.json --output '" + out.string() + "'"), 2);
}

TEST_F(CliTest, MmdShuffleSplitAndTwoFiles) {
    TargetSpec spec;
    spec.count = 2000;
    const fs::path a = dir_ / "a.csv";
    datasets::save_csv(a.string(), datasets::generate(spec));
    ASSERT_EQ(run("mmd '" + a.string() + "' --shuffle-split --seed 1"), 0);
    EXPECT_LT(std::abs(std::stod(read(dir_ / "stdout.txt"))), 0.01);
    spec.mu = {2.0};
    const fs::path b = dir_ / "b.csv";
    datasets::save_csv(b.string(), datasets::generate(spec));
    ASSERT_EQ(run("mmd '" + a.string() + "' '" + b.string() + "'"), 0);
    EXPECT_GT(std::stod(read(dir_ / "stdout.txt")), 0.1);
    const fs::path ragged = dir_ / "ragged.csv";
    std::ofstream(ragged) << "x0,x1\n1,2\n3\n";
    EXPECT_EQ(run("mmd '" + ragged.string() + "' --shuffle-split"), 2);
    EXPECT_EQ(run("mmd '" + a.string() + "'"), 2);
}

TEST_F(CliTest, KernelGramThreePoints) {
    const fs::path in = dir_ / "pts.csv";
    std::ofstream(in) << "x0\n0\n1\n2.5\n";
    const fs::path kernel = dir_ / "kernel.json";
    std::ofstream(kernel) << R"({"kind": "GaussianRBF", "sigma": 1.0})";
    const fs::path out = dir_ / "gram.csv";
    ASSERT_EQ(run("kernel-gram '" + in.string() + "' --output '" + out.string() + "' --kernel '" + kernel.string() + "'"),
              0);
    std::stringstream ss(read(out));
    std::vector<std::vector<double>> g;
    std::string line;
    while (std::getline(ss, line)) {
        std::vector<double> row;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        g.push_back(row);
    }
    ASSERT_EQ(g.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        ASSERT_EQ(g[i].size(), 3u);
        EXPECT_EQ(g[i][i], 1.0);
        for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(g[i][j], g[j][i]);
    }
    EXPECT_NEAR(g[0][1], std::exp(-0.5), 1e-15);
}

} // namespace
