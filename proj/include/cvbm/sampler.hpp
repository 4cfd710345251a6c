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
 * @file sampler.hpp
 * Position-quadrature sampling from truncated Fock states.
 *
 * The marginal density of a mode is tabulated on a symmetric grid and
 * inverted through its piecewise-linear CDF. Multi-mode states are sampled
 * mode by mode: after drawing x for one mode the remaining modes are
 * conditioned by projecting onto a narrow Gaussian wavepacket (width one grid
 * cell) centred on the outcome.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "errors.hpp"
#include "fock.hpp"
#include "types.hpp"

namespace cvbm {

struct GridSpec {
    double x_max{8.0};
    std::size_t points{4096};

    void validate() const {
        if (points < 256) {
            throw InvalidArgument("homodyne-sampler", "grid needs at least 256 points");
        }
        if (!(x_max > 0.0)) {
            throw InvalidArgument("homodyne-sampler", "grid half-width must be positive");
        }
    }

    [[nodiscard]] double spacing() const { return 2.0 * x_max / static_cast<double>(points - 1); }

    [[nodiscard]] std::vector<double> nodes() const {
        std::vector<double> grid(points);
        const double dx = spacing();
        for (std::size_t k = 0; k < points; ++k) {
            grid[k] = -x_max + dx * static_cast<double>(k);
        }
        return grid;
    }
};

struct SamplerOptions {
    /// Resolution of the first-mode (or single-mode) grid.
    std::size_t points{4096};
    /// Resolution of the per-shot conditional grids of later modes.
    std::size_t conditional_points{512};
    /// Half-width in standard deviations beyond |<x>|.
    double width_sigmas{6.0};
    double mass_tolerance{1e-3};
};

namespace sampler {

/// x_max = width * sigma + |<x>| from the mode's reduced density matrix.
inline GridSpec default_grid(const CMatrix &rho, double hbar, std::size_t points, double width_sigmas = 6.0) {
    const auto [mean, var] = fock::quadrature_moments(rho, hbar);
    return GridSpec{width_sigmas * std::sqrt(var) + std::abs(mean), points};
}

/// Tabulated marginal with its cumulative distribution (trapezoid rule).
class MarginalTable {
  public:
    MarginalTable(std::vector<double> grid, const Vector &density) : grid_(std::move(grid)) {
        cdf_.resize(grid_.size());
        cdf_[0] = 0.0;
        for (std::size_t k = 1; k < grid_.size(); ++k) {
            const double lo = std::max(density(static_cast<Eigen::Index>(k - 1)), 0.0);
            const double hi = std::max(density(static_cast<Eigen::Index>(k)), 0.0);
            cdf_[k] = cdf_[k - 1] + 0.5 * (lo + hi) * (grid_[k] - grid_[k - 1]);
        }
    }

    [[nodiscard]] double mass() const { return cdf_.back(); }
    [[nodiscard]] const std::vector<double> &cdf() const noexcept { return cdf_; }
    [[nodiscard]] const std::vector<double> &grid() const noexcept { return grid_; }

    /// Inverse CDF with linear interpolation inside the cell.
    [[nodiscard]] double invert(double u01) const {
        const double target = u01 * mass();
        auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
        if (it == cdf_.begin()) return grid_.front();
        if (it == cdf_.end()) return grid_.back();
        const auto k = static_cast<std::size_t>(it - cdf_.begin());
        const double width = cdf_[k] - cdf_[k - 1];
        const double frac = width > 0.0 ? (target - cdf_[k - 1]) / width : 0.5;
        return grid_[k - 1] + frac * (grid_[k] - grid_[k - 1]);
    }

    [[nodiscard]] double draw(Rng &rng) const { return invert(uniform01(rng)); }

  private:
    std::vector<double> grid_;
    std::vector<double> cdf_;
};

/// Builds the marginal table of a reduced density matrix and enforces the mass check.
inline MarginalTable marginal_table(const CMatrix &rho, double hbar, const GridSpec &spec, double tolerance) {
    spec.validate();
    std::vector<double> grid = spec.nodes();
    const Matrix table = fock::hermite_table(grid, static_cast<std::size_t>(rho.rows()), hbar);
    MarginalTable marginal(std::move(grid), fock::density_from_table(rho, table));
    const double norm = rho.trace().real();
    if (marginal.mass() < norm - tolerance * norm) {
        throw GridMassDeficit("homodyne-sampler", "grid captures mass " + std::to_string(marginal.mass()) +
                                                      " of " + std::to_string(norm));
    }
    return marginal;
}

namespace detail {

/// Coefficients c_m = sum_j w_j h_m(x_j) of a Gaussian wavepacket of width one cell centred at x.
inline std::vector<double> projector_coefficients(double x, double cell, std::size_t cutoff, double hbar) {
    std::vector<double> coeff(cutoff, 0.0);
    std::vector<double> h(cutoff);
    for (int j = -4; j <= 4; ++j) {
        const double xj = x + static_cast<double>(j) * cell;
        const double w = std::exp(-0.5 * static_cast<double>(j * j));
        fock::hermite_functions(xj, hbar, h);
        for (std::size_t m = 0; m < cutoff; ++m) {
            coeff[m] += w * h[m];
        }
    }
    return coeff;
}

/// Contracts the leading mode of `amps` (n modes) with `coeff`, leaving n - 1 modes.
inline CVector condition_leading(const CVector &amps, std::size_t cutoff, const std::vector<double> &coeff) {
    const auto rest = amps.size() / static_cast<Eigen::Index>(cutoff);
    CVector out = CVector::Zero(rest);
    for (std::size_t m = 0; m < cutoff; ++m) {
        if (coeff[m] == 0.0) continue;
        out += coeff[m] * amps.segment(static_cast<Eigen::Index>(m) * rest, rest);
    }
    return out;
}

inline Samples sample_pure(const FockState &state, Rng &rng, std::size_t count, const SamplerOptions &opts) {
    const std::size_t n = state.n_modes();
    const std::size_t d = state.cutoff();
    const double hbar = state.config().hbar;
    Samples out(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(n));

    const CMatrix rho0 = fock::reduced_density(state, 0);
    const GridSpec first = default_grid(rho0, hbar, opts.points, opts.width_sigmas);
    const MarginalTable table0 = marginal_table(rho0, hbar, first, opts.mass_tolerance);

    for (std::size_t shot = 0; shot < count; ++shot) {
        double x = table0.draw(rng);
        out(static_cast<Eigen::Index>(shot), 0) = x;
        if (n == 1) continue;
        CVector amps = condition_leading(state.amplitudes(), d, projector_coefficients(x, first.spacing(), d, hbar));
        for (std::size_t mode = 1; mode < n; ++mode) {
            const std::size_t remaining = n - mode;
            const CMatrix rho = fock::reduced_density(amps, remaining, d, 0);
            if (!(rho.trace().real() > 0.0)) {
                throw GridMassDeficit("homodyne-sampler", "conditional state has zero weight");
            }
            const GridSpec spec = default_grid(rho, hbar, opts.conditional_points, opts.width_sigmas);
            const MarginalTable table = marginal_table(rho, hbar, spec, opts.mass_tolerance);
            x = table.draw(rng);
            out(static_cast<Eigen::Index>(shot), static_cast<Eigen::Index>(mode)) = x;
            if (remaining > 1) {
                amps = condition_leading(amps, d, projector_coefficients(x, spec.spacing(), d, hbar));
            }
        }
    }
    return out;
}

} // namespace detail

/// Draws `count` joint x-quadrature samples from a pure Fock state.
inline Samples sample_fock(const FockState &state, Rng &rng, std::size_t count, const SamplerOptions &opts = {}) {
    if (count < 1) {
        throw InvalidArgument("homodyne-sampler", "sample count must be at least 1");
    }
    return detail::sample_pure(state, rng, count, opts);
}

/// Draws from a weighted ensemble: a branch per shot, then the branch state.
/// Single-branch ensembles consume no extra randomness.
inline Samples sample_fock(const FockEnsemble &ensemble, Rng &rng, std::size_t count,
                           const SamplerOptions &opts = {}) {
    if (ensemble.size() == 0) {
        throw InvalidArgument("homodyne-sampler", "empty ensemble");
    }
    if (ensemble.size() == 1) {
        return sample_fock(ensemble.states[0], rng, count, opts);
    }
    if (count < 1) {
        throw InvalidArgument("homodyne-sampler", "sample count must be at least 1");
    }
    std::vector<double> cumulative(ensemble.size());
    std::partial_sum(ensemble.weights.begin(), ensemble.weights.end(), cumulative.begin());
    std::vector<std::size_t> branch(count);
    std::vector<std::size_t> per_branch(ensemble.size(), 0);
    for (std::size_t shot = 0; shot < count; ++shot) {
        const double u = uniform01(rng) * cumulative.back();
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        const auto b = std::min(static_cast<std::size_t>(it - cumulative.begin()), ensemble.size() - 1);
        branch[shot] = b;
        ++per_branch[b];
    }
    const auto n = static_cast<Eigen::Index>(ensemble.states[0].n_modes());
    Samples out(static_cast<Eigen::Index>(count), n);
    for (std::size_t b = 0; b < ensemble.size(); ++b) {
        if (per_branch[b] == 0) continue;
        const Samples draws = detail::sample_pure(ensemble.states[b], rng, per_branch[b], opts);
        Eigen::Index next = 0;
        for (std::size_t shot = 0; shot < count; ++shot) {
            if (branch[shot] == b) {
                out.row(static_cast<Eigen::Index>(shot)) = draws.row(next++);
            }
        }
    }
    return out;
}

} // namespace sampler
} // namespace cvbm
