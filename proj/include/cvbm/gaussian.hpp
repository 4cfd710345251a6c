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
 * @file gaussian.hpp
 * Phase-space simulation of Gaussian states.
 *
 * Quadratures are ordered (x_1..x_n, p_1..p_n) everywhere. A gate with
 * symplectic matrix M and displacement beta maps mean -> M mean + beta and
 * cov -> M cov M^T.
 */
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "errors.hpp"
#include "gate.hpp"
#include "types.hpp"

namespace cvbm {

struct GaussianState {
    Vector mean;
    Matrix cov;
    std::size_t n_modes{1};
    double hbar{kDefaultHbar};

    /// x-quadrature block of the mean (length n).
    [[nodiscard]] Vector x_mean() const { return mean.head(static_cast<Eigen::Index>(n_modes)); }

    /// x-quadrature block of the covariance (n x n).
    [[nodiscard]] Matrix x_cov() const {
        const auto n = static_cast<Eigen::Index>(n_modes);
        return cov.topLeftCorner(n, n);
    }
};

struct LossChannel {
    double transmissivity{1.0};
    std::size_t mode{0};

    void validate() const {
        if (!(transmissivity >= 0.0 && transmissivity <= 1.0)) {
            throw InvalidArgument("gaussian-backend", "transmissivity must lie in [0, 1]");
        }
    }
};

namespace gaussian {

/// Standard symplectic form for xxpp ordering: [[0, I], [-I, 0]].
inline Matrix symplectic_form(std::size_t n_modes) {
    const auto n = static_cast<Eigen::Index>(n_modes);
    Matrix omega = Matrix::Zero(2 * n, 2 * n);
    omega.topRightCorner(n, n) = Matrix::Identity(n, n);
    omega.bottomLeftCorner(n, n) = -Matrix::Identity(n, n);
    return omega;
}

inline GaussianState vacuum(std::size_t n_modes, double hbar = kDefaultHbar) {
    if (n_modes < 1) {
        throw InvalidArgument("gaussian-backend", "a state needs at least one mode");
    }
    const auto dim = static_cast<Eigen::Index>(2 * n_modes);
    return {Vector::Zero(dim), (hbar / 2.0) * Matrix::Identity(dim, dim), n_modes, hbar};
}

/// Symplectic matrix and displacement of a Gaussian gate embedded in n modes.
struct SymplecticAction {
    Matrix m;
    Vector beta;
};

inline SymplecticAction symplectic_action(const Gate &gate, std::size_t n_modes, double hbar) {
    gate.validate();
    if (!is_gaussian(gate.kind)) {
        throw NonGaussianGate("gaussian-backend",
                              std::string(to_string(gate.kind)) + " has no symplectic representation");
    }
    for (auto mode : gate.modes) {
        if (mode >= n_modes) {
            throw IndexError("gaussian-backend", "mode index " + std::to_string(mode) + " out of range");
        }
    }
    const auto n = static_cast<Eigen::Index>(n_modes);
    SymplecticAction act{Matrix::Identity(2 * n, 2 * n), Vector::Zero(2 * n)};
    const auto x = [](std::size_t mode) { return static_cast<Eigen::Index>(mode); };
    const auto p = [n](std::size_t mode) { return n + static_cast<Eigen::Index>(mode); };
    switch (gate.kind) {
    case GateKind::Rotation: {
        const std::size_t k = gate.modes[0];
        const double c = std::cos(gate.params[0]);
        const double s = std::sin(gate.params[0]);
        act.m(x(k), x(k)) = c;
        act.m(x(k), p(k)) = -s;
        act.m(p(k), x(k)) = s;
        act.m(p(k), p(k)) = c;
        break;
    }
    case GateKind::Displacement: {
        const std::size_t k = gate.modes[0];
        const double scale = std::sqrt(2.0 * hbar);
        act.beta(x(k)) = scale * gate.params[0];
        act.beta(p(k)) = scale * gate.params[1];
        break;
    }
    case GateKind::Squeezing: {
        const std::size_t k = gate.modes[0];
        const double r = gate.params[0];
        const double phi = gate.params[1];
        const double ch = std::cosh(r);
        const double sh = std::sinh(r);
        act.m(x(k), x(k)) = ch - std::cos(phi) * sh;
        act.m(x(k), p(k)) = -std::sin(phi) * sh;
        act.m(p(k), x(k)) = -std::sin(phi) * sh;
        act.m(p(k), p(k)) = ch + std::cos(phi) * sh;
        break;
    }
    case GateKind::Beamsplitter: {
        // a -> cos(theta) a + e^{i phi} sin(theta) b,  b -> cos(theta) b - e^{-i phi} sin(theta) a
        const std::size_t a = gate.modes[0];
        const std::size_t b = gate.modes[1];
        const double ct = std::cos(gate.params[0]);
        const double st = std::sin(gate.params[0]);
        const double cp = std::cos(gate.params[1]);
        const double sp = std::sin(gate.params[1]);
        act.m(x(a), x(a)) = ct;
        act.m(p(a), p(a)) = ct;
        act.m(x(b), x(b)) = ct;
        act.m(p(b), p(b)) = ct;
        act.m(x(a), x(b)) = st * cp;
        act.m(x(a), p(b)) = -st * sp;
        act.m(p(a), x(b)) = st * sp;
        act.m(p(a), p(b)) = st * cp;
        act.m(x(b), x(a)) = -st * cp;
        act.m(x(b), p(a)) = -st * sp;
        act.m(p(b), x(a)) = st * sp;
        act.m(p(b), p(a)) = -st * cp;
        break;
    }
    default:
        break;
    }
    return act;
}

inline GaussianState apply_symplectic(const GaussianState &state, const Gate &gate) {
    const SymplecticAction act = symplectic_action(gate, state.n_modes, state.hbar);
    GaussianState out = state;
    out.mean = act.m * state.mean + act.beta;
    out.cov = act.m * state.cov * act.m.transpose();
    out.cov = 0.5 * (out.cov + out.cov.transpose());
    return out;
}

/// Loss channel: mean <- sqrt(T) mean, cov block <- T cov + (1 - T) hbar/2 I on the target mode.
inline GaussianState apply_loss(const GaussianState &state, const LossChannel &channel) {
    channel.validate();
    if (channel.mode >= state.n_modes) {
        throw IndexError("gaussian-backend", "loss channel mode out of range");
    }
    if (channel.transmissivity == 1.0) {
        return state;
    }
    const auto n = static_cast<Eigen::Index>(state.n_modes);
    const double t = channel.transmissivity;
    const double root = std::sqrt(t);
    const std::array<Eigen::Index, 2> idx{static_cast<Eigen::Index>(channel.mode),
                                          n + static_cast<Eigen::Index>(channel.mode)};
    GaussianState out = state;
    for (auto i : idx) {
        out.mean(i) *= root;
        out.cov.row(i) *= root;
        out.cov.col(i) *= root;
    }
    for (auto i : idx) {
        out.cov(i, i) += (1.0 - t) * state.hbar / 2.0;
    }
    return out;
}

/// Smallest eigenvalue of cov (positivity check).
inline double min_cov_eigenvalue(const GaussianState &state) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(state.cov, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

/// Smallest eigenvalue of the Hermitian matrix cov + i (hbar/2) Omega.
inline double min_uncertainty_eigenvalue(const GaussianState &state) {
    const CMatrix h = state.cov.cast<complex_t>() +
                      complex_t(0.0, state.hbar / 2.0) * symplectic_form(state.n_modes).cast<complex_t>();
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(h, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

/// Draws `count` joint x-quadrature samples (phi = 0 homodyne on every mode).
inline Samples homodyne_sample(const GaussianState &state, Rng &rng, std::size_t count) {
    if (count < 1) {
        throw InvalidArgument("gaussian-backend", "sample count must be at least 1");
    }
    const Matrix cov = state.x_cov();
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() != Eigen::Success) {
        throw CorruptedState("gaussian-backend", "x-quadrature covariance is not positive definite");
    }
    const Matrix lower = llt.matrixL();
    const Vector mu = state.x_mean();
    const auto n = static_cast<Eigen::Index>(state.n_modes);
    Samples out(static_cast<Eigen::Index>(count), n);
    Vector z(n);
    for (Eigen::Index row = 0; row < out.rows(); ++row) {
        for (Eigen::Index j = 0; j < n; ++j) {
            z(j) = standard_normal(rng);
        }
        out.row(row) = (mu + lower * z).transpose();
    }
    return out;
}

/// Homodyne at angle phi_k on mode k: the x-quadrature after R(-phi_k).
inline Samples homodyne_sample_at(const GaussianState &state, std::span<const double> angles, Rng &rng,
                                  std::size_t count) {
    if (angles.size() != state.n_modes) {
        throw DimensionMismatch("gaussian-backend", "one homodyne angle per mode required");
    }
    GaussianState rotated = state;
    for (std::size_t k = 0; k < angles.size(); ++k) {
        rotated = apply_symplectic(rotated, Gate::rotation(k, -angles[k]));
    }
    return homodyne_sample(rotated, rng, count);
}

} // namespace gaussian
} // namespace cvbm
