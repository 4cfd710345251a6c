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

/**
 * @file trainer.hpp
 * Batch gradient descent on the MMD loss.
 *
 * Each iteration draws M model samples and N data samples, logs the loss of
 * the current parameters, and then updates the parameters one at a time with
 * theta_k <- theta_k - mu * dL/dtheta_k. In the default sequential mode the
 * model is re-sampled after every single-parameter update so that each
 * gradient component sees the latest circuit.
 *
 * Random streams are derived from the seed and a (purpose, iteration, k) tag,
 * so runs are bitwise reproducible and independent of evaluation order.
 */
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

#include "circuit.hpp"
#include "errors.hpp"
#include "kernels.hpp"
#include "mmd.hpp"
#include "types.hpp"

namespace cvbm {

struct TrainConfig {
    double learning_rate{0.05};
    std::size_t max_iterations{60};
    std::size_t m_model{50};
    std::size_t n_data{50};
    std::size_t r_shift{30};
    std::size_t s_shift{30};
    std::uint64_t seed{0};
    /// Per-mode loss transmissivity; absent means no noise channel at all.
    std::optional<double> transmissivity{};
    KernelSpec kernel{};
    std::size_t convergence_window{10};
    double convergence_tol{1e-3};
    /// One joint step per iteration instead of coordinate-wise updates.
    bool simultaneous{false};
    /// Sequential mode only: keep the iteration's model samples instead of re-sampling after each update.
    bool reuse_model_samples{false};
    /// Draw the initial parameters from the seed before training.
    bool randomize_init{false};
    ShiftSettings shifts{};
    BackendConfig backend{};

    void validate() const {
        // mu = 0 is accepted here as a frozen-parameter diagnostic; run configs require mu > 0
        if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
            throw InvalidArgument("trainer", "learning_rate must be non-negative");
        }
        if (max_iterations < 1) throw InvalidArgument("trainer", "max_iterations must be at least 1");
        if (m_model < 2 || n_data < 2) throw InvalidArgument("trainer", "M and N must be at least 2");
        if (r_shift < 1 || s_shift < 1) throw InvalidArgument("trainer", "R and S must be at least 1");
        if (convergence_window < 1) throw InvalidArgument("trainer", "convergence_window must be at least 1");
        if (!(convergence_tol >= 0.0)) throw InvalidArgument("trainer", "convergence_tol must be non-negative");
        if (transmissivity && !(*transmissivity >= 0.0 && *transmissivity <= 1.0)) {
            throw InvalidArgument("trainer", "transmissivity must lie in [0, 1]");
        }
        kernel.validate();
        shifts.validate();
    }
};

struct TrainLogEntry {
    std::size_t iteration{0};
    double loss{0.0};
    /// Parameters at which `loss` was measured (before this iteration's update).
    std::vector<double> params;
    std::int64_t wall_time_ms{0};
};

struct TrainResult {
    Circuit circuit;
    std::vector<TrainLogEntry> log;
    /// Kernel actually used, with the median-heuristic bandwidth filled in.
    KernelSpec kernel;
    bool converged{false};

    /// Mean loss over the last min(W, iterations) logged iterations.
    [[nodiscard]] double final_loss(std::size_t window = 10) const {
        if (log.empty()) return 0.0;
        const std::size_t n = std::min(window, log.size());
        double s = 0.0;
        for (std::size_t i = log.size() - n; i < log.size(); ++i) s += log[i].loss;
        return s / static_cast<double>(n);
    }
};

namespace trainer {

enum Stream : std::uint64_t { kInit = 1, kData = 2, kModel = 3, kGradient = 4, kEvaluate = 5 };

/// N rows of `data`: uniform without replacement, or with replacement when N exceeds the dataset.
inline Samples subsample(const Samples &data, std::size_t n, Rng &rng) {
    const auto total = static_cast<std::size_t>(data.rows());
    Samples out(static_cast<Eigen::Index>(n), data.cols());
    if (n <= total) {
        std::vector<std::size_t> index(total);
        std::iota(index.begin(), index.end(), std::size_t{0});
        // partial Fisher-Yates: only the first n positions are needed
        for (std::size_t i = 0; i < n; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, total - 1);
            std::swap(index[i], index[pick(rng)]);
            out.row(static_cast<Eigen::Index>(i)) = data.row(static_cast<Eigen::Index>(index[i]));
        }
    } else {
        std::uniform_int_distribution<std::size_t> pick(0, total - 1);
        for (std::size_t i = 0; i < n; ++i) {
            out.row(static_cast<Eigen::Index>(i)) = data.row(static_cast<Eigen::Index>(pick(rng)));
        }
    }
    return out;
}

inline NoiseModel noise_for(const Circuit &circuit, const TrainConfig &config) {
    return config.transmissivity ? uniform_loss(circuit.n_modes, *config.transmissivity) : NoiseModel{};
}

inline bool plateaued(const std::vector<TrainLogEntry> &log, std::size_t window, double tol) {
    if (log.size() < window) return false;
    double lo = log.back().loss;
    double hi = lo;
    for (std::size_t i = log.size() - window; i < log.size(); ++i) {
        lo = std::min(lo, log[i].loss);
        hi = std::max(hi, log[i].loss);
    }
    return hi - lo < tol;
}

/// Trend diagnostics of a loss curve whose values carry estimator noise.
struct PlateauReport {
    /// Least-squares slope of the last `window` losses and its standard error.
    double slope{0.0};
    double slope_se{0.0};
    /// Median loss over the first and the last `window` iterations.
    double head_median{0.0};
    double tail_median{0.0};
    /// No statistically significant trend (|slope| <= 2 se) over the tail.
    bool plateau{false};
    /// Tail median not above the head median.
    bool improved{false};
};

inline double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline PlateauReport plateau_report(const std::vector<TrainLogEntry> &log, std::size_t window = 10) {
    PlateauReport r;
    if (log.size() < 3 || window < 3) return r;
    const std::size_t w = std::min(window, log.size());
    std::vector<double> head;
    std::vector<double> tail;
    for (std::size_t i = 0; i < w; ++i) head.push_back(log[i].loss);
    for (std::size_t i = log.size() - w; i < log.size(); ++i) tail.push_back(log[i].loss);
    r.head_median = median(head);
    r.tail_median = median(tail);
    r.improved = r.tail_median <= r.head_median;
    const double n = static_cast<double>(w);
    const double tbar = (n - 1.0) / 2.0;
    const double ybar = std::accumulate(tail.begin(), tail.end(), 0.0) / n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < w; ++i) {
        const double dt = static_cast<double>(i) - tbar;
        sxx += dt * dt;
        sxy += dt * (tail[i] - ybar);
    }
    r.slope = sxy / sxx;
    double rss = 0.0;
    for (std::size_t i = 0; i < w; ++i) {
        const double fit = ybar + r.slope * (static_cast<double>(i) - tbar);
        rss += (tail[i] - fit) * (tail[i] - fit);
    }
    r.slope_se = std::sqrt(rss / (n - 2.0) / sxx);
    r.plateau = std::abs(r.slope) <= 2.0 * r.slope_se;
    return r;
}

} // namespace trainer

/// Trains `circuit` on `data`. Throws NonFinite (with the iteration) if a loss or gradient is not finite.
inline TrainResult train(Circuit circuit, const Samples &data, const TrainConfig &config) {
    config.validate();
    circuit.validate();
    if (data.rows() < 1) throw InsufficientSamples("trainer", "dataset is empty");
    if (static_cast<std::size_t>(data.cols()) != circuit.n_modes) {
        throw DimensionMismatch("trainer", "dataset has " + std::to_string(data.cols()) + " columns but the circuit has " +
                                               std::to_string(circuit.n_modes) + " modes");
    }
    const std::size_t count = circuit.parameter_count();
    if (count < 1) throw InvalidArgument("trainer", "circuit has no trainable parameters");

    if (config.randomize_init) {
        Rng init = derive_rng(config.seed, {trainer::kInit});
        randomize_parameters(circuit, init);
    }

    const NoiseModel noise = trainer::noise_for(circuit, config);
    GradientOptions grad;
    grad.r_shift = config.r_shift;
    grad.s_shift = config.s_shift;
    grad.shifts = config.shifts;

    TrainResult result;
    std::optional<Kernel> kernel;
    const auto start = std::chrono::steady_clock::now();

    auto model_samples = [&](std::size_t t, std::size_t k) {
        Rng rng = derive_rng(config.seed, {trainer::kModel, t, k});
        return sample(circuit, config.m_model, rng, noise, config.backend);
    };

    for (std::size_t t = 1; t <= config.max_iterations; ++t) {
        Rng data_rng = derive_rng(config.seed, {trainer::kData, t});
        const Samples y = trainer::subsample(data, config.n_data, data_rng);
        Samples x = model_samples(t, 0);
        if (!kernel) {
            // bandwidth is fixed from the first iteration's pooled samples
            result.kernel = kernels::resolve_bandwidth(config.kernel, x, y);
            kernel.emplace(result.kernel);
        }

        TrainLogEntry entry;
        entry.iteration = t;
        entry.loss = mmd(*kernel, x, y).value;
        entry.params = circuit.parameters();
        if (!std::isfinite(entry.loss)) throw NonFinite("trainer", "loss is not finite", t);

        std::vector<double> gradient(count);
        for (std::size_t k = 0; k < count; ++k) {
            if (k > 0 && !config.simultaneous && !config.reuse_model_samples) x = model_samples(t, k);
            Rng rng = derive_rng(config.seed, {trainer::kGradient, t, k});
            gradient[k] = mmd_gradient_component(circuit, k, *kernel, x, y, grad, rng, noise, config.backend);
            if (!std::isfinite(gradient[k])) {
                throw NonFinite("trainer", "gradient of parameter " + std::to_string(k) + " is not finite", t);
            }
            if (!config.simultaneous) {
                circuit.set_parameter(k, circuit.parameter(k) - config.learning_rate * gradient[k]);
            }
        }
        if (config.simultaneous) {
            for (std::size_t k = 0; k < count; ++k) {
                circuit.set_parameter(k, circuit.parameter(k) - config.learning_rate * gradient[k]);
            }
        }

        entry.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
        result.log.push_back(std::move(entry));
        if (trainer::plateaued(result.log, config.convergence_window, config.convergence_tol)) {
            result.converged = true;
            break;
        }
    }
    result.circuit = std::move(circuit);
    return result;
}

/// Held-out MMD between m_eval fresh model samples and (at most `cap` rows of) the dataset.
inline MmdEstimate evaluate(const Circuit &circuit, const Samples &data, const KernelSpec &spec, std::size_t m_eval,
                            std::uint64_t seed, const NoiseModel &noise = {}, const BackendConfig &backend = {},
                            std::size_t cap = 10000) {
    if (m_eval < 2) throw InvalidArgument("trainer", "m_eval must be at least 2");
    Rng rng = derive_rng(seed, {trainer::kEvaluate});
    const Samples x = sample(circuit, m_eval, rng, noise, backend);
    const Eigen::Index rows = std::min<Eigen::Index>(data.rows(), static_cast<Eigen::Index>(cap));
    const Samples y = data.topRows(rows);
    return mmd(kernels::resolve_bandwidth(spec, x, y), x, y);
}

} // namespace cvbm
