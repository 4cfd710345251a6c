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
 * @file exact.hpp
 * Exact-density MMD for gradient verification.
 *
 * Sampling is replaced by the simulated output distributions themselves:
 * Gaussian circuits give multivariate normals (closed-form RBF expectations),
 * single-mode non-Gaussian circuits give a density tabulated on a fixed grid.
 * Only the Gaussian RBF kernel is supported. The training path never uses
 * this module.
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "circuit.hpp"
#include "errors.hpp"
#include "sampler.hpp"
#include "types.hpp"

namespace cvbm {

/// Either a multivariate normal over x-quadratures or a 1-D tabulated density.
struct ExactDistribution {
    enum class Kind { Normal, Grid };

    Kind kind{Kind::Normal};
    Vector mean;
    Matrix cov;
    /// Grid nodes and cell weights p(x_i) dx (Grid kind).
    std::vector<double> nodes;
    Vector weights;

    [[nodiscard]] std::size_t dimension() const {
        return kind == Kind::Normal ? static_cast<std::size_t>(mean.size()) : 1;
    }

    static ExactDistribution normal(Vector mean, Matrix cov) {
        ExactDistribution d;
        d.mean = std::move(mean);
        d.cov = std::move(cov);
        return d;
    }
};

namespace exact {

/// Fixed quadrature grid for a single-mode non-Gaussian circuit, sized from its nominal state.
inline GridSpec nominal_grid(const Circuit &circuit, const BackendConfig &config, std::size_t points = 1024,
                             double width_sigmas = 8.0) {
    BackendConfig forced = config;
    forced.force_fock = true;
    const FockState state = std::get<FockState>(run(circuit, forced).state);
    const CMatrix rho = fock::reduced_density(state, 0);
    return sampler::default_grid(rho, state.config().hbar, points, width_sigmas);
}

/// Output distribution of `circuit` after `noise`. Non-Gaussian circuits must be single-mode.
inline ExactDistribution distribution(const Circuit &circuit, const BackendConfig &config, const NoiseModel &noise,
                                      const GridSpec &grid) {
    RunResult result = run(circuit, config);
    if (result.backend == Backend::Gaussian) {
        GaussianState state = std::get<GaussianState>(std::move(result.state));
        for (const auto &channel : noise) {
            state = gaussian::apply_loss(state, channel);
        }
        return ExactDistribution::normal(state.x_mean(), state.x_cov());
    }
    if (circuit.n_modes != 1) {
        throw InvalidArgument("mmd-loss", "exact densities of non-Gaussian circuits are single-mode only");
    }
    FockEnsemble ensemble = FockEnsemble::pure(std::get<FockState>(std::move(result.state)));
    for (const auto &channel : noise) {
        ensemble = fock::apply_loss(ensemble, channel.transmissivity, channel.mode);
    }
    ExactDistribution d;
    d.kind = ExactDistribution::Kind::Grid;
    d.nodes = grid.nodes();
    d.weights = Vector::Zero(static_cast<Eigen::Index>(d.nodes.size()));
    for (std::size_t b = 0; b < ensemble.size(); ++b) {
        d.weights += ensemble.weights[b] * fock::position_density(ensemble.states[b], 0, d.nodes);
    }
    d.weights *= grid.spacing();
    return d;
}

/// E[k(a, b)] for independent a ~ p, b ~ q under the RBF kernel of bandwidth sigma.
inline double expected_kernel(const ExactDistribution &p, const ExactDistribution &q, double sigma) {
    if (p.dimension() != q.dimension()) {
        throw DimensionMismatch("mmd-loss", "distributions have different dimensions");
    }
    const double s2 = sigma * sigma;
    using Kind = ExactDistribution::Kind;
    if (p.kind == Kind::Normal && q.kind == Kind::Normal) {
        const auto n = p.mean.size();
        const Matrix c = p.cov + q.cov;
        const Vector d = p.mean - q.mean;
        const Matrix shifted = s2 * Matrix::Identity(n, n) + c;
        const Eigen::LLT<Matrix> llt(shifted);
        const double quad = d.dot(llt.solve(d));
        const double det = (Matrix::Identity(n, n) + c / s2).determinant();
        return std::exp(-0.5 * quad) / std::sqrt(det);
    }
    if (p.kind == Kind::Grid && q.kind == Kind::Grid) {
        double total = 0.0;
        for (std::size_t i = 0; i < p.nodes.size(); ++i) {
            const double wi = p.weights(static_cast<Eigen::Index>(i));
            if (wi == 0.0) continue;
            double row = 0.0;
            for (std::size_t j = 0; j < q.nodes.size(); ++j) {
                const double dx = p.nodes[i] - q.nodes[j];
                row += q.weights(static_cast<Eigen::Index>(j)) * std::exp(-dx * dx / (2.0 * s2));
            }
            total += wi * row;
        }
        return total;
    }
    const ExactDistribution &grid = p.kind == Kind::Grid ? p : q;
    const ExactDistribution &normal = p.kind == Kind::Grid ? q : p;
    const double var = s2 + normal.cov(0, 0);
    const double norm = std::sqrt(s2 / var);
    double total = 0.0;
    for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
        const double dx = grid.nodes[i] - normal.mean(0);
        total += grid.weights(static_cast<Eigen::Index>(i)) * norm * std::exp(-dx * dx / (2.0 * var));
    }
    return total;
}

/// Population MMD^2 between the two distributions.
inline double mmd(const ExactDistribution &p, const ExactDistribution &q, double sigma) {
    return expected_kernel(p, p, sigma) - 2.0 * expected_kernel(p, q, sigma) + expected_kernel(q, q, sigma);
}

/// Everything needed to evaluate the exact loss of one circuit family against a fixed target.
struct Problem {
    ExactDistribution target;
    double sigma{1.0};
    BackendConfig backend{};
    NoiseModel noise{};
    /// Quadrature grid for non-Gaussian circuits; sized from the nominal circuit when absent.
    std::optional<GridSpec> grid{};
};

inline GridSpec grid_for(const Circuit &circuit, const Problem &problem) {
    if (problem.grid) return *problem.grid;
    if (circuit.is_gaussian() && !problem.backend.force_fock) return GridSpec{};
    return nominal_grid(circuit, problem.backend);
}

inline double loss(const Circuit &circuit, const Problem &problem, const GridSpec &grid) {
    return mmd(distribution(circuit, problem.backend, problem.noise, grid), problem.target, problem.sigma);
}

/// Parameter-shift gradient of the exact loss for trainable parameter k.
inline double shift_gradient(const Circuit &circuit, std::size_t k, const Problem &problem,
                             const ShiftSettings &settings = {}) {
    const GridSpec grid = grid_for(circuit, problem);
    const ShiftedCircuits shifted = shifted_circuits(circuit, k, settings);
    const ExactDistribution p = distribution(circuit, problem.backend, problem.noise, grid);
    const ExactDistribution plus = distribution(shifted.plus, problem.backend, problem.noise, grid);
    const ExactDistribution minus = distribution(shifted.minus, problem.backend, problem.noise, grid);
    const double s = problem.sigma;
    return shifted.scale * (expected_kernel(plus, p, s) - expected_kernel(minus, p, s) -
                            expected_kernel(plus, problem.target, s) + expected_kernel(minus, problem.target, s));
}

/// Central finite difference of the exact loss for trainable parameter k.
inline double finite_difference(const Circuit &circuit, std::size_t k, const Problem &problem, double step = 1e-5) {
    const GridSpec grid = grid_for(circuit, problem);
    Circuit plus = circuit;
    Circuit minus = circuit;
    plus.set_parameter(k, circuit.parameter(k) + step);
    minus.set_parameter(k, circuit.parameter(k) - step);
    return (loss(plus, problem, grid) - loss(minus, problem, grid)) / (2.0 * step);
}

/// Product normal target N(mu_i, sd_i^2).
inline ExactDistribution product_normal(const std::vector<double> &mu, const std::vector<double> &sd) {
    if (mu.size() != sd.size() || mu.empty()) {
        throw DimensionMismatch("mmd-loss", "target mean and sd must have the same nonzero length");
    }
    const auto n = static_cast<Eigen::Index>(mu.size());
    Vector mean(n);
    Matrix cov = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        mean(i) = mu[static_cast<std::size_t>(i)];
        cov(i, i) = sd[static_cast<std::size_t>(i)] * sd[static_cast<std::size_t>(i)];
    }
    return ExactDistribution::normal(mean, cov);
}

} // namespace exact
} // namespace cvbm
