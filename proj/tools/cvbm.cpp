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

// cvbm: command-line front end.
//
// Exit codes: 0 success, 1 runtime error, 2 invalid configuration, arguments
// or input files. Every command is deterministic under its seed.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "cvbm/cvbm.hpp"

namespace {

namespace fs = std::filesystem;
using namespace cvbm;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr std::size_t kFinalSamples = 10000;

/// Any problem detected before computation starts: bad config, arguments or input files.
class UsageError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

template <class F> auto validated(F &&load) -> decltype(load()) {
    try {
        return load();
    } catch (const cvbm::Error &e) {
        throw UsageError("[" + e.module() + "] " + e.what());
    }
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::FILE *open_out(const fs::path &path) {
    std::FILE *f = std::fopen(path.string().c_str(), "w");
    if (f == nullptr) throw IoError("cli", "cannot open '" + path.string() + "' for writing");
    return f;
}

void close_out(std::FILE *f, const fs::path &path) {
    const bool failed = std::ferror(f) != 0;
    if (std::fclose(f) != 0 || failed) throw IoError("cli", "write to '" + path.string() + "' failed");
}

void ensure_dir(const fs::path &dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cli", "cannot create directory '" + dir.string() + "': " + ec.message());
}

void write_loss_csv(const fs::path &path, const TrainResult &result, std::size_t params) {
    std::FILE *f = open_out(path);
    std::fprintf(f, "iteration,loss,wall_time_ms");
    for (std::size_t k = 0; k < params; ++k) std::fprintf(f, ",p%zu", k);
    std::fputc('\n', f);
    for (const auto &e : result.log) {
        std::fprintf(f, "%zu,%s,%lld", e.iteration, fmt(e.loss).c_str(), static_cast<long long>(e.wall_time_ms));
        for (double p : e.params) std::fprintf(f, ",%s", fmt(p).c_str());
        std::fputc('\n', f);
    }
    close_out(f, path);
}

/// Worker count from CVBM_THREADS (0 or unset: hardware concurrency).
std::size_t thread_budget() {
    std::size_t n = 0;
    if (const char *env = std::getenv("CVBM_THREADS"); env != nullptr && *env != '\0') {
        char *end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (*end != '\0' || v < 0) throw UsageError("CVBM_THREADS must be a non-negative integer");
        n = static_cast<std::size_t>(v);
    }
    if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
    return n;
}

// --- train ---------------------------------------------------------------

struct TrainArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output_dir;
};

RunConfig load_run(const std::string &path, const std::optional<std::uint64_t> &seed,
                   const std::optional<std::string> &output_dir) {
    return validated([&] {
        RunConfig rc = io::load_run_config(path);
        if (seed) rc.train.seed = *seed;
        if (output_dir) rc.output_dir = *output_dir;
        return rc;
    });
}

int cmd_train(const TrainArgs &args) {
    const RunConfig rc = load_run(args.config, args.seed, args.output_dir);
    const Samples data = datasets::generate(rc.target, rc.train.backend);
    const TrainResult result = train(rc.circuit, data, rc.train);

    const fs::path dir(rc.output_dir);
    ensure_dir(dir);
    write_loss_csv(dir / "loss.csv", result, rc.circuit.parameter_count());
    io::write_file((dir / "checkpoint.json").string(), io::to_json(result.circuit));
    json effective = rc.raw;
    effective["train"] = io::to_json(rc.train);
    io::write_file((dir / "checkpoint.meta.json").string(),
                   json{{"iteration", result.log.size()}, {"seed", rc.train.seed}, {"config", effective}});
    Rng rng = derive_rng(rc.train.seed, {6});
    const NoiseModel noise = trainer::noise_for(result.circuit, rc.train);
    datasets::save_csv((dir / "final_samples.csv").string(),
                       sample(result.circuit, kFinalSamples, rng, noise, rc.train.backend));
    const trainer::PlateauReport trend = trainer::plateau_report(result.log, rc.train.convergence_window);
    io::write_file((dir / "summary.json").string(),
                   json{{"final_loss", result.final_loss(rc.train.convergence_window)},
                        {"iterations", result.log.size()},
                        {"seed", rc.train.seed},
                        {"converged", result.converged},
                        {"plateau", trend.plateau},
                        {"improved", trend.improved},
                        {"kernel_sigma", result.kernel.sigma}});
    std::printf("trained %zu iterations, final loss %s\n", result.log.size(),
                fmt(result.final_loss(rc.train.convergence_window)).c_str());
    return 0;
}

// --- sample --------------------------------------------------------------

struct SampleArgs {
    std::string checkpoint;
    std::size_t count{10000};
    std::uint64_t seed{0};
    std::string output;
    std::size_t cutoff{FockConfig{}.cutoff};
};

int cmd_sample(const SampleArgs &args) {
    const Circuit circuit = validated([&] { return io::load_circuit(args.checkpoint); });
    if (args.count < 1) throw UsageError("--count must be at least 1");
    BackendConfig backend;
    backend.fock.cutoff = args.cutoff;
    Rng rng = derive_rng(args.seed, {7});
    datasets::save_csv(args.output, sample(circuit, args.count, rng, {}, backend));
    return 0;
}

// --- mmd -----------------------------------------------------------------

struct MmdArgs {
    std::string a;
    std::optional<std::string> b;
    std::optional<std::string> kernel;
    bool shuffle_split{false};
    std::uint64_t seed{0};
};

KernelSpec load_kernel(const std::optional<std::string> &path) {
    if (!path) return KernelSpec{};
    return validated([&] { return io::kernel_from_json(io::parse_file(*path)); });
}

int cmd_mmd(const MmdArgs &args) {
    const KernelSpec spec = load_kernel(args.kernel);
    Samples x = validated([&] { return datasets::load_csv(args.a); });
    Samples y;
    if (args.b) {
        if (args.shuffle_split) throw UsageError("--shuffle-split takes a single input file");
        y = validated([&] { return datasets::load_csv(*args.b); });
    } else {
        if (!args.shuffle_split) throw UsageError("a second file or --shuffle-split is required");
        Rng rng = derive_rng(args.seed, {8});
        std::vector<Eigen::Index> order(static_cast<std::size_t>(x.rows()));
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        std::shuffle(order.begin(), order.end(), rng);
        const Eigen::Index half = x.rows() / 2;
        Samples left(half, x.cols());
        Samples right(x.rows() - half, x.cols());
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            if (i < half) {
                left.row(i) = x.row(order[static_cast<std::size_t>(i)]);
            } else {
                right.row(i - half) = x.row(order[static_cast<std::size_t>(i)]);
            }
        }
        x = std::move(left);
        y = std::move(right);
    }
    const MmdEstimate e = validated([&] { return mmd(spec, x, y); });
    std::printf("%s\n", fmt(e.value).c_str());
    return 0;
}

// --- kernel-gram ---------------------------------------------------------

struct GramArgs {
    std::string input;
    std::string output;
    std::optional<std::string> kernel;
};

int cmd_kernel_gram(const GramArgs &args) {
    const KernelSpec spec = load_kernel(args.kernel);
    const Samples x = validated([&] { return datasets::load_csv(args.input); });
    if (x.rows() < 1) throw UsageError("input '" + args.input + "' has no samples");
    const Kernel kernel(kernels::resolve_bandwidth(spec, x, x));
    const Matrix g = kernel.gram(x, x);
    const fs::path path(args.output);
    std::FILE *f = open_out(path);
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
        for (Eigen::Index j = 0; j < g.cols(); ++j) {
            std::fprintf(f, j == 0 ? "%s" : ",%s", fmt(g(i, j)).c_str());
        }
        std::fputc('\n', f);
    }
    close_out(f, path);
    return 0;
}

// --- grad-check ----------------------------------------------------------

struct GradCheckArgs {
    std::string config;
    std::optional<std::string> output_dir;
};

/// Shift magnitudes used when the config does not set them: finite-difference-grade steps.
ShiftSettings grad_check_shifts(const RunConfig &rc) {
    if (rc.raw.contains("train") && rc.raw.at("train").contains("shifts")) return rc.train.shifts;
    return ShiftSettings{0.01, 0.01, 0.01};
}

int cmd_grad_check(const GradCheckArgs &args) {
    const RunConfig rc = load_run(args.config, std::nullopt, args.output_dir);
    if (rc.train.kernel.kind != KernelKind::GaussianRBF) {
        throw UsageError("grad-check supports the GaussianRBF kernel only");
    }
    Circuit circuit = rc.circuit;
    if (rc.train.randomize_init) {
        Rng init = derive_rng(rc.train.seed, {trainer::kInit});
        randomize_parameters(circuit, init);
    }
    const ShiftSettings shifts = grad_check_shifts(rc);

    exact::Problem problem;
    problem.backend = rc.train.backend;
    problem.noise = trainer::noise_for(circuit, rc.train);
    if (rc.target.kind == TargetKind::ClassicalGaussian) {
        problem.target = exact::product_normal(rc.target.mu, rc.target.sigma);
    } else {
        const Circuit &tc = *rc.target.circuit;
        const GridSpec grid = tc.is_gaussian() ? GridSpec{} : exact::nominal_grid(tc, rc.train.backend);
        problem.target = exact::distribution(tc, rc.train.backend, {}, grid);
    }
    problem.sigma = rc.train.kernel.sigma;
    if (problem.sigma <= 0.0) {
        // same median heuristic as training, on a pooled model/data draw
        const Samples data = datasets::generate(rc.target, rc.train.backend);
        Rng rng = derive_rng(rc.train.seed, {9});
        const Samples x = sample(circuit, rc.train.m_model, rng, problem.noise, rc.train.backend);
        const Eigen::Index rows = std::min<Eigen::Index>(data.rows(), static_cast<Eigen::Index>(rc.train.n_data));
        problem.sigma = kernels::median_bandwidth(kernels::stack(x, data.topRows(rows)));
    }

    const fs::path dir(rc.output_dir);
    ensure_dir(dir);
    const fs::path path = dir / "grad_check.csv";
    std::FILE *f = open_out(path);
    std::fprintf(f, "param,shift_grad,fd_grad,abs_err\n");
    bool ok = true;
    // the tolerance is pinned at the reference step t = 0.01, so a coarse configured t cannot loosen it
    constexpr double kReferenceT = 0.01;
    const double nongaussian_tol = std::max(1e-3, 10.0 * kReferenceT * kReferenceT);
    for (std::size_t k = 0; k < circuit.parameter_count(); ++k) {
        const auto [g, s] = circuit.locate(k);
        const Gate &gate = circuit.gates[g];
        const double shift = exact::shift_gradient(circuit, k, problem, shifts);
        const double fd = exact::finite_difference(circuit, k, problem);
        const double err = std::abs(shift - fd);
        const double tol = is_gaussian(gate.kind) ? 1e-4 : nongaussian_tol;
        const std::string label =
            "p" + std::to_string(k) + ":" + std::string(to_string(gate.kind)) + "." + std::string(param_names(gate.kind)[s]);
        std::fprintf(f, "%s,%s,%s,%s\n", label.c_str(), fmt(shift).c_str(), fmt(fd).c_str(), fmt(err).c_str());
        const bool pass = err < tol;
        ok = ok && pass;
        std::printf("%-28s shift=% .10f fd=% .10f err=%.3e %s\n", label.c_str(), shift, fd, err, pass ? "ok" : "EXCEEDS");
    }
    close_out(f, path);
    return ok ? 0 : kExitRuntime;
}

// --- noise-sweep ---------------------------------------------------------

struct SweepArgs {
    std::string config;
    std::vector<double> transmissivities;
    std::size_t seeds{5};
    std::optional<std::string> output_dir;
};

int cmd_noise_sweep(const SweepArgs &args) {
    RunConfig rc = load_run(args.config, std::nullopt, args.output_dir);
    if (args.transmissivities.empty()) throw UsageError("--T needs at least one value");
    for (double t : args.transmissivities) {
        if (!(t >= 0.0 && t <= 1.0)) throw UsageError("transmissivity " + fmt(t) + " is outside [0, 1]");
    }
    if (args.seeds < 1) throw UsageError("--seeds must be at least 1");
    // sweep defaults (100 data samples, 50 shifted-circuit samples) unless the config sets them
    const json train_raw = rc.raw.contains("train") ? rc.raw.at("train") : json::object();
    if (!train_raw.contains("m_model")) rc.train.m_model = 100;
    if (!train_raw.contains("n_data")) rc.train.n_data = 100;
    if (!train_raw.contains("r_shift")) rc.train.r_shift = 50;
    if (!train_raw.contains("s_shift")) rc.train.s_shift = 50;
    const std::size_t workers = thread_budget();

    const Samples data = datasets::generate(rc.target, rc.train.backend);
    const fs::path dir(rc.output_dir);
    ensure_dir(dir);

    struct Cell {
        double t;
        std::uint64_t seed;
        double final_loss{0.0};
    };
    std::vector<Cell> cells;
    for (double t : args.transmissivities) {
        for (std::size_t s = 0; s < args.seeds; ++s) cells.push_back({t, rc.train.seed + s});
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            try {
                TrainConfig config = rc.train;
                config.seed = cells[i].seed;
                config.transmissivity = cells[i].t;
                const TrainResult r = train(rc.circuit, data, config);
                cells[i].final_loss = r.final_loss(config.convergence_window);
                char name[96];
                std::snprintf(name, sizeof name, "loss_T%g_seed%llu.csv", cells[i].t,
                              static_cast<unsigned long long>(cells[i].seed));
                write_loss_csv(dir / name, r, rc.circuit.parameter_count());
            } catch (...) {
                const std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < std::min(workers, cells.size()); ++w) pool.emplace_back(work);
    work();
    for (auto &th : pool) th.join();
    if (failure) std::rethrow_exception(failure);

    const fs::path path = dir / "noise_sweep.csv";
    std::FILE *f = open_out(path);
    std::fprintf(f, "T,seed,final_loss,mean_final_loss,std_final_loss\n");
    for (double t : args.transmissivities) {
        std::vector<double> losses;
        for (const auto &c : cells) {
            if (c.t == t) losses.push_back(c.final_loss);
        }
        const double mean = std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(losses.size());
        double var = 0.0;
        for (double l : losses) var += (l - mean) * (l - mean);
        const double sd = losses.size() > 1 ? std::sqrt(var / static_cast<double>(losses.size() - 1)) : 0.0;
        for (const auto &c : cells) {
            if (c.t != t) continue;
            std::fprintf(f, "%s,%llu,%s,%s,%s\n", fmt(c.t).c_str(), static_cast<unsigned long long>(c.seed),
                         fmt(c.final_loss).c_str(), fmt(mean).c_str(), fmt(sd).c_str());
        }
        std::printf("T=%g mean final loss %s (sd %s)\n", t, fmt(mean).c_str(), fmt(sd).c_str());
    }
    close_out(f, path);
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Continuous-variable Born machine toolkit"};
    app.require_subcommand(1);

    TrainArgs train_args;
    auto *train_cmd = app.add_subcommand("train", "Train a circuit from a run config");
    train_cmd->add_option("config", train_args.config, "Run config JSON")->required();
    train_cmd->add_option("--seed", train_args.seed, "Override the training seed");
    train_cmd->add_option("--output-dir", train_args.output_dir, "Override the output directory");

    SampleArgs sample_args;
    auto *sample_cmd = app.add_subcommand("sample", "Sample a checkpointed circuit");
    sample_cmd->add_option("checkpoint", sample_args.checkpoint, "Circuit JSON")->required();
    sample_cmd->add_option("--count", sample_args.count, "Number of samples");
    sample_cmd->add_option("--seed", sample_args.seed, "Random seed");
    sample_cmd->add_option("--output", sample_args.output, "Output CSV")->required();
    sample_cmd->add_option("--cutoff", sample_args.cutoff, "Fock cutoff for non-Gaussian circuits");

    MmdArgs mmd_args;
    auto *mmd_cmd = app.add_subcommand("mmd", "Unbiased MMD^2 between two sample files");
    mmd_cmd->add_option("a", mmd_args.a, "First samples CSV")->required();
    mmd_cmd->add_option("b", mmd_args.b, "Second samples CSV");
    mmd_cmd->add_option("--kernel", mmd_args.kernel, "Kernel JSON (default: RBF, median bandwidth)");
    mmd_cmd->add_flag("--shuffle-split", mmd_args.shuffle_split, "Compare two random halves of the first file");
    mmd_cmd->add_option("--seed", mmd_args.seed, "Seed for --shuffle-split");

    GramArgs gram_args;
    auto *gram_cmd = app.add_subcommand("kernel-gram", "Write the Gram matrix of a sample file");
    gram_cmd->add_option("input", gram_args.input, "Samples CSV")->required();
    gram_cmd->add_option("--output", gram_args.output, "Output CSV")->required();
    gram_cmd->add_option("--kernel", gram_args.kernel, "Kernel JSON (default: RBF, median bandwidth)");

    GradCheckArgs grad_args;
    auto *grad_cmd = app.add_subcommand("grad-check", "Compare shift-rule and finite-difference gradients");
    grad_cmd->add_option("config", grad_args.config, "Run config JSON")->required();
    grad_cmd->add_option("--output-dir", grad_args.output_dir, "Override the output directory");

    SweepArgs sweep_args;
    auto *sweep_cmd = app.add_subcommand("noise-sweep", "Train under several loss transmissivities");
    sweep_cmd->add_option("config", sweep_args.config, "Run config JSON")->required();
    sweep_cmd->add_option("--T", sweep_args.transmissivities, "Transmissivities")->required()->delimiter(',');
    sweep_cmd->add_option("--seeds", sweep_args.seeds, "Seeds per transmissivity");
    sweep_cmd->add_option("--output-dir", sweep_args.output_dir, "Override the output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*train_cmd) return cmd_train(train_args);
        if (*sample_cmd) return cmd_sample(sample_args);
        if (*mmd_cmd) return cmd_mmd(mmd_args);
        if (*gram_cmd) return cmd_kernel_gram(gram_args);
        if (*grad_cmd) return cmd_grad_check(grad_args);
        if (*sweep_cmd) return cmd_noise_sweep(sweep_args);
    } catch (const UsageError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const IoError &e) {
        std::cerr << "error [" << e.module() << "]: " << e.what() << '\n';
        return kExitUsage;
    } catch (const FormatError &e) {
        std::cerr << "error [" << e.module() << "]: " << e.what() << '\n';
        return kExitUsage;
    } catch (const cvbm::Error &e) {
        std::cerr << "error [" << e.module() << "]: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitRuntime;
}
