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
 * @file fock.hpp
 * Truncated Fock-space simulation.
 *
 * A state of n modes is a complex tensor of D^n amplitudes, mode 0 being the
 * most significant index. Gate matrices are the top-left D x D (or D^2 x D^2)
 * block of the exact infinite-dimensional operator, so amplitude that a gate
 * pushes above the cutoff is lost rather than folded back. apply_gate reports
 * that loss as TruncationLeakage once the squared norm drops below
 * FockConfig::norm_floor; it never renormalizes.
 *
 * Exponentiated single-mode gates (D, S, V) are computed by diagonalizing
 * the Hermitian generator on a padded space of padded_dimension(D) levels and
 * keeping the leading block. The beamsplitter conserves total photon number,
 * so it is exponentiated exactly sector by sector.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "errors.hpp"
#include "gate.hpp"
#include "types.hpp"

namespace cvbm {

struct FockConfig {
    std::size_t cutoff{7};
    double hbar{kDefaultHbar};
    double norm_floor{0.99};

    void validate() const {
        if (cutoff < 2) {
            throw InvalidArgument("fock-backend", "cutoff must be at least 2");
        }
        if (!(hbar > 0.0)) {
            throw InvalidArgument("fock-backend", "hbar must be positive");
        }
        if (!(norm_floor > 0.0 && norm_floor <= 1.0)) {
            throw InvalidArgument("fock-backend", "norm_floor must lie in (0, 1]");
        }
    }
};

struct FockOperator {
    CMatrix matrix;
    std::size_t arity{1};
    /// max |(M^+ M - I)_ij| on the truncated space.
    double unitarity_deviation{0.0};
};

namespace fock {

/// Size of the padded space on which exponentiated gates are diagonalized.
inline std::size_t padded_dimension(std::size_t cutoff) { return 2 * cutoff + 20; }

/// Annihilation operator on `dim` levels: a|n> = sqrt(n)|n-1>.
inline Matrix annihilation_matrix(std::size_t dim) {
    Matrix a = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t n = 1; n < dim; ++n) {
        a(static_cast<Eigen::Index>(n - 1), static_cast<Eigen::Index>(n)) = std::sqrt(static_cast<double>(n));
    }
    return a;
}

/// x = sqrt(hbar/2) (a + a^+), real symmetric tridiagonal.
inline Matrix position_matrix(std::size_t dim, double hbar) {
    const Matrix a = annihilation_matrix(dim);
    return std::sqrt(hbar / 2.0) * (a + a.transpose());
}

inline double unitarity_deviation(const CMatrix &m) {
    const CMatrix g = m.adjoint() * m - CMatrix::Identity(m.cols(), m.cols());
    return g.cwiseAbs().maxCoeff();
}

/// Returns (a, a^+) on the truncated space.
inline std::pair<FockOperator, FockOperator> ladder_operators(const FockConfig &config) {
    config.validate();
    const CMatrix a = annihilation_matrix(config.cutoff).cast<complex_t>();
    FockOperator lower{a, 1, unitarity_deviation(a)};
    FockOperator raise{a.adjoint(), 1, unitarity_deviation(a.adjoint())};
    return {std::move(lower), std::move(raise)};
}

/// exp(-i H) for Hermitian H.
inline CMatrix hermitian_exp(const CMatrix &h) {
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(h);
    const Vector &lambda = solver.eigenvalues();
    const CMatrix &v = solver.eigenvectors();
    CVector phases(lambda.size());
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        phases(i) = std::polar(1.0, -lambda(i));
    }
    return v * phases.asDiagonal() * v.adjoint();
}

/**
 * One-parameter family U(t) = exp(-i t G) for a fixed Hermitian generator G,
 * diagonalized once on a padded space. Used where the same gate direction is
 * evaluated at many strengths (quantum-kernel feature maps).
 */
class SpectralGenerator {
  public:
    SpectralGenerator(const CMatrix &generator, std::size_t cutoff) : cutoff_(cutoff) {
        Eigen::SelfAdjointEigenSolver<CMatrix> solver(generator);
        eigenvalues_ = solver.eigenvalues();
        eigenvectors_ = solver.eigenvectors();
    }

    /// Leading `cutoff` amplitudes of U(t)|n>.
    [[nodiscard]] CVector column(double t, std::size_t n = 0) const {
        const auto d = static_cast<Eigen::Index>(cutoff_);
        CVector coeff(eigenvalues_.size());
        for (Eigen::Index j = 0; j < eigenvalues_.size(); ++j) {
            coeff(j) = std::polar(1.0, -t * eigenvalues_(j)) *
                       std::conj(eigenvectors_(static_cast<Eigen::Index>(n), j));
        }
        return eigenvectors_.topRows(d) * coeff;
    }

    [[nodiscard]] CMatrix matrix(double t) const {
        const auto d = static_cast<Eigen::Index>(cutoff_);
        CVector phases(eigenvalues_.size());
        for (Eigen::Index j = 0; j < eigenvalues_.size(); ++j) {
            phases(j) = std::polar(1.0, -t * eigenvalues_(j));
        }
        return eigenvectors_.topRows(d) * phases.asDiagonal() * eigenvectors_.topRows(d).adjoint();
    }

    [[nodiscard]] std::size_t cutoff() const noexcept { return cutoff_; }

  private:
    std::size_t cutoff_;
    Vector eigenvalues_;
    CMatrix eigenvectors_;
};

/// Hermitian generator H with D(alpha) = exp(-i H) on `dim` levels.
inline CMatrix displacement_generator(std::size_t dim, complex_t alpha) {
    const CMatrix a = annihilation_matrix(dim).cast<complex_t>();
    const complex_t i(0.0, 1.0);
    return i * (alpha * a.adjoint() - std::conj(alpha) * a);
}

/// Hermitian generator H with S(r e^{i phi}) = exp(-i H) on `dim` levels.
inline CMatrix squeezing_generator(std::size_t dim, double r, double phi) {
    const CMatrix a = annihilation_matrix(dim).cast<complex_t>();
    const complex_t zeta = std::polar(r, phi);
    const complex_t i(0.0, 1.0);
    const CMatrix a2 = a * a;
    return i * 0.5 * (std::conj(zeta) * a2 - zeta * a2.adjoint());
}

/// Hermitian generator H with V(gamma) = exp(-i H) on `dim` levels.
inline CMatrix cubic_phase_generator(std::size_t dim, double gamma, double hbar) {
    const Matrix x = position_matrix(dim, hbar);
    const Matrix x3 = x * x * x;
    return (-gamma / (3.0 * hbar) * x3).cast<complex_t>();
}

namespace detail {

inline CMatrix truncated_exp(const CMatrix &generator, std::size_t cutoff) {
    const auto d = static_cast<Eigen::Index>(cutoff);
    return hermitian_exp(generator).topLeftCorner(d, d);
}

/// Beamsplitter on D^2 levels, index n_a * D + n_b, exact per photon-number sector.
inline CMatrix beamsplitter_matrix(std::size_t cutoff, double theta, double phi) {
    const auto d = static_cast<Eigen::Index>(cutoff);
    CMatrix u = CMatrix::Zero(d * d, d * d);
    const complex_t i(0.0, 1.0);
    const complex_t fwd = theta * std::polar(1.0, phi);
    const complex_t bwd = theta * std::polar(1.0, -phi);
    for (Eigen::Index total = 0; total <= 2 * (d - 1); ++total) {
        const Eigen::Index size = total + 1;
        // G|k, N-k> in the basis k = photons in the first mode.
        CMatrix g = CMatrix::Zero(size, size);
        for (Eigen::Index k = 0; k < size; ++k) {
            if (k + 1 < size) {
                g(k + 1, k) = fwd * std::sqrt(static_cast<double>((k + 1) * (total - k)));
            }
            if (k > 0) {
                g(k - 1, k) = -bwd * std::sqrt(static_cast<double>(k * (total - k + 1)));
            }
        }
        const CMatrix block = hermitian_exp(i * g);
        for (Eigen::Index k = 0; k < size; ++k) {
            if (k >= d || total - k >= d) continue;
            for (Eigen::Index kp = 0; kp < size; ++kp) {
                if (kp >= d || total - kp >= d) continue;
                u(kp * d + (total - kp), k * d + (total - k)) = block(kp, k);
            }
        }
    }
    return u;
}

} // namespace detail

/// Matrix of `gate` on the truncated space. Only the gate kind and parameters
/// are used; mode indices are ignored.
inline FockOperator gate_unitary(const Gate &gate, const FockConfig &config) {
    config.validate();
    gate.validate();
    const std::size_t d = config.cutoff;
    const auto dim = static_cast<Eigen::Index>(d);
    const complex_t i(0.0, 1.0);
    FockOperator op;
    op.arity = arity(gate.kind);
    switch (gate.kind) {
    case GateKind::Rotation: {
        CVector diag(dim);
        for (Eigen::Index n = 0; n < dim; ++n) {
            diag(n) = std::exp(i * gate.params[0] * static_cast<double>(n));
        }
        op.matrix = diag.asDiagonal();
        break;
    }
    case GateKind::Kerr: {
        CVector diag(dim);
        for (Eigen::Index n = 0; n < dim; ++n) {
            diag(n) = std::exp(i * gate.params[0] * static_cast<double>(n * n));
        }
        op.matrix = diag.asDiagonal();
        break;
    }
    case GateKind::Displacement:
        op.matrix = detail::truncated_exp(
            displacement_generator(padded_dimension(d), complex_t(gate.params[0], gate.params[1])), d);
        break;
    case GateKind::Squeezing:
        op.matrix = detail::truncated_exp(squeezing_generator(padded_dimension(d), gate.params[0], gate.params[1]), d);
        break;
    case GateKind::CubicPhase:
        op.matrix = detail::truncated_exp(cubic_phase_generator(padded_dimension(d), gate.params[0], config.hbar), d);
        break;
    case GateKind::Beamsplitter:
        op.matrix = detail::beamsplitter_matrix(d, gate.params[0], gate.params[1]);
        break;
    }
    op.unitarity_deviation = unitarity_deviation(op.matrix);
    return op;
}

} // namespace fock

/**
 * Pure state on a truncated Fock space. Immutable once constructed; every
 * operation returns a new value.
 */
class FockState {
  public:
    FockState(CVector amplitudes, std::size_t n_modes, FockConfig config)
        : amplitudes_(std::move(amplitudes)), n_modes_(n_modes), config_(config) {
        config_.validate();
        if (n_modes_ < 1) {
            throw InvalidArgument("fock-backend", "a state needs at least one mode");
        }
        if (static_cast<std::size_t>(amplitudes_.size()) != dimension(n_modes_, config_.cutoff)) {
            throw DimensionMismatch("fock-backend", "amplitude tensor length must equal cutoff^n_modes");
        }
        const double norm = squared_norm();
        if (!std::isfinite(norm) || norm > 1.0 + 1e-9) {
            throw InvalidArgument("fock-backend", "squared norm exceeds 1");
        }
        if (norm < config_.norm_floor) {
            throw TruncationLeakage("fock-backend", norm, config_.norm_floor);
        }
    }

    static FockState vacuum(std::size_t n_modes, const FockConfig &config) {
        return basis({std::vector<std::size_t>(n_modes, 0)}, config);
    }

    /// Product Fock basis state |levels[0], levels[1], ...>.
    static FockState basis(const std::vector<std::size_t> &levels, const FockConfig &config) {
        config.validate();
        CVector amps = CVector::Zero(static_cast<Eigen::Index>(dimension(levels.size(), config.cutoff)));
        std::size_t index = 0;
        for (auto level : levels) {
            if (level >= config.cutoff) {
                throw IndexError("fock-backend", "Fock level beyond cutoff");
            }
            index = index * config.cutoff + level;
        }
        amps(static_cast<Eigen::Index>(index)) = 1.0;
        return {std::move(amps), levels.size(), config};
    }

    static std::size_t dimension(std::size_t n_modes, std::size_t cutoff) {
        std::size_t dim = 1;
        for (std::size_t i = 0; i < n_modes; ++i) {
            dim *= cutoff;
        }
        return dim;
    }

    [[nodiscard]] const CVector &amplitudes() const noexcept { return amplitudes_; }
    [[nodiscard]] std::size_t n_modes() const noexcept { return n_modes_; }
    [[nodiscard]] const FockConfig &config() const noexcept { return config_; }
    [[nodiscard]] std::size_t cutoff() const noexcept { return config_.cutoff; }
    [[nodiscard]] double squared_norm() const { return amplitudes_.squaredNorm(); }

  private:
    CVector amplitudes_;
    std::size_t n_modes_;
    FockConfig config_;
};

namespace fock {

namespace detail {

inline void check_modes(std::size_t n_modes, std::span<const std::size_t> modes) {
    for (std::size_t i = 0; i < modes.size(); ++i) {
        if (modes[i] >= n_modes) {
            throw IndexError("fock-backend", "mode index " + std::to_string(modes[i]) + " out of range");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (modes[i] == modes[j]) {
                throw IndexError("fock-backend", "mode indices must be distinct");
            }
        }
    }
}

using RowMajorCMatrix = Eigen::Matrix<complex_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Applies a D x D matrix to `mode` of the tensor in place.
inline void apply_single(CVector &amps, std::size_t n_modes, std::size_t cutoff, const CMatrix &u,
                         std::size_t mode) {
    const std::size_t outer = FockState::dimension(mode, cutoff);
    const std::size_t inner = FockState::dimension(n_modes - 1 - mode, cutoff);
    const auto d = static_cast<Eigen::Index>(cutoff);
    for (std::size_t o = 0; o < outer; ++o) {
        Eigen::Map<RowMajorCMatrix> block(amps.data() + o * cutoff * inner, d, static_cast<Eigen::Index>(inner));
        const RowMajorCMatrix updated = u * block;
        block = updated;
    }
}

/// Applies a D^2 x D^2 matrix (index m_first * D + m_second) to two modes in place.
inline void apply_pair(CVector &amps, std::size_t n_modes, std::size_t cutoff, const CMatrix &u,
                       std::size_t first, std::size_t second) {
    const std::size_t stride_first = FockState::dimension(n_modes - 1 - first, cutoff);
    const std::size_t stride_second = FockState::dimension(n_modes - 1 - second, cutoff);
    const std::size_t total = static_cast<std::size_t>(amps.size());
    std::vector<std::size_t> bases;
    bases.reserve(total / (cutoff * cutoff));
    for (std::size_t idx = 0; idx < total; ++idx) {
        if ((idx / stride_first) % cutoff == 0 && (idx / stride_second) % cutoff == 0) {
            bases.push_back(idx);
        }
    }
    const auto d2 = static_cast<Eigen::Index>(cutoff * cutoff);
    CMatrix gathered(d2, static_cast<Eigen::Index>(bases.size()));
    for (std::size_t c = 0; c < bases.size(); ++c) {
        for (std::size_t a = 0; a < cutoff; ++a) {
            for (std::size_t b = 0; b < cutoff; ++b) {
                gathered(static_cast<Eigen::Index>(a * cutoff + b), static_cast<Eigen::Index>(c)) =
                    amps(static_cast<Eigen::Index>(bases[c] + a * stride_first + b * stride_second));
            }
        }
    }
    const CMatrix updated = u * gathered;
    for (std::size_t c = 0; c < bases.size(); ++c) {
        for (std::size_t a = 0; a < cutoff; ++a) {
            for (std::size_t b = 0; b < cutoff; ++b) {
                amps(static_cast<Eigen::Index>(bases[c] + a * stride_first + b * stride_second)) =
                    updated(static_cast<Eigen::Index>(a * cutoff + b), static_cast<Eigen::Index>(c));
            }
        }
    }
}

inline FockState with_amplitudes(const FockState &like, CVector amps, const char *module = "fock-backend") {
    const double norm = amps.squaredNorm();
    if (!std::isfinite(norm)) {
        throw InvalidArgument(module, "non-finite amplitudes");
    }
    if (norm < like.config().norm_floor) {
        throw TruncationLeakage(module, norm, like.config().norm_floor);
    }
    return {std::move(amps), like.n_modes(), like.config()};
}

} // namespace detail

/// Applies a precomputed operator on `modes`.
inline FockState apply_operator(const FockState &state, const FockOperator &op, std::span<const std::size_t> modes) {
    if (modes.size() != op.arity) {
        throw IndexError("fock-backend", "operator arity does not match the number of modes");
    }
    detail::check_modes(state.n_modes(), modes);
    CVector amps = state.amplitudes();
    if (op.arity == 1) {
        detail::apply_single(amps, state.n_modes(), state.cutoff(), op.matrix, modes[0]);
    } else {
        detail::apply_pair(amps, state.n_modes(), state.cutoff(), op.matrix, modes[0], modes[1]);
    }
    return detail::with_amplitudes(state, std::move(amps));
}

/// Applies `gate` to the modes it names. Throws TruncationLeakage when the
/// squared norm afterwards is below the state's norm floor.
inline FockState apply_gate(const FockState &state, const Gate &gate) {
    detail::check_modes(state.n_modes(), gate.modes);
    return apply_operator(state, gate_unitary(gate, state.config()), gate.modes);
}

/// <a|b>, conjugate-linear in the first argument.
inline complex_t overlap(const FockState &a, const FockState &b) {
    if (a.n_modes() != b.n_modes() || a.cutoff() != b.cutoff()) {
        throw DimensionMismatch("fock-backend", "overlap of states with different shapes");
    }
    return a.amplitudes().dot(b.amplitudes());
}

/**
 * Orthonormal Hermite functions h_0..h_{count-1} at x, i.e. <x|m> for the
 * quadrature x = sqrt(hbar/2)(a + a^+). Evaluated by the three-term recurrence
 * on h_m itself.
 */
inline void hermite_functions(double x, double hbar, std::span<double> out) {
    if (out.empty()) return;
    const double u = x / std::sqrt(hbar);
    out[0] = std::pow(kPi * hbar, -0.25) * std::exp(-0.5 * u * u);
    if (out.size() > 1) {
        out[1] = std::sqrt(2.0) * u * out[0];
    }
    for (std::size_t m = 1; m + 1 < out.size(); ++m) {
        const double md = static_cast<double>(m);
        out[m + 1] = std::sqrt(2.0 / (md + 1.0)) * u * out[m] - std::sqrt(md / (md + 1.0)) * out[m - 1];
    }
}

/// Table T(k, m) = h_m(grid[k]).
inline Matrix hermite_table(std::span<const double> grid, std::size_t count, double hbar) {
    Matrix table(static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(count));
    std::vector<double> row(count);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        hermite_functions(grid[k], hbar, row);
        for (std::size_t m = 0; m < count; ++m) {
            table(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m)) = row[m];
        }
    }
    return table;
}

/// Reduced density matrix of one mode from a flat amplitude tensor.
inline CMatrix reduced_density(const CVector &amps, std::size_t n_modes, std::size_t cutoff, std::size_t mode) {
    const std::size_t outer = FockState::dimension(mode, cutoff);
    const std::size_t inner = FockState::dimension(n_modes - 1 - mode, cutoff);
    const auto d = static_cast<Eigen::Index>(cutoff);
    CMatrix rho = CMatrix::Zero(d, d);
    for (std::size_t o = 0; o < outer; ++o) {
        Eigen::Map<const detail::RowMajorCMatrix> block(amps.data() + o * cutoff * inner, d,
                                                        static_cast<Eigen::Index>(inner));
        rho.noalias() += block * block.adjoint();
    }
    return rho;
}

inline CMatrix reduced_density(const FockState &state, std::size_t mode) {
    if (mode >= state.n_modes()) {
        throw IndexError("fock-backend", "mode index out of range");
    }
    return reduced_density(state.amplitudes(), state.n_modes(), state.cutoff(), mode);
}

/// Density p(x_k) = sum rho_{mm'} h_m(x_k) h_m'(x_k) from a precomputed Hermite table.
inline Vector density_from_table(const CMatrix &rho, const Matrix &table) {
    // h_m are real and rho is Hermitian, so the imaginary part cancels.
    const Matrix weighted = table * rho.real();
    return weighted.cwiseProduct(table).rowwise().sum();
}

/// Position-quadrature density of one mode on `grid`, other modes traced out.
inline Vector position_density(const FockState &state, std::size_t mode, std::span<const double> grid) {
    if (grid.empty()) {
        throw InvalidArgument("fock-backend", "empty grid");
    }
    const CMatrix rho = reduced_density(state, mode);
    return density_from_table(rho, hermite_table(grid, state.cutoff(), state.config().hbar));
}

/// (<x>, Var x) of a reduced density matrix.
inline std::pair<double, double> quadrature_moments(const CMatrix &rho, double hbar) {
    const std::size_t d = static_cast<std::size_t>(rho.rows());
    const Matrix x_big = position_matrix(d + 1, hbar);
    const auto dim = static_cast<Eigen::Index>(d);
    const Matrix x = x_big.topLeftCorner(dim, dim);
    const Matrix x2 = (x_big * x_big).topLeftCorner(dim, dim);
    const double norm = rho.trace().real();
    const double mean = (rho * x.cast<complex_t>()).trace().real() / norm;
    const double second = (rho * x2.cast<complex_t>()).trace().real() / norm;
    return {mean, std::max(second - mean * mean, 0.0)};
}

/// Loss channel Kraus operators E_0..E_{D-1}: E_n|m> = sqrt(C(m,n)) (1-T)^{n/2} T^{(m-n)/2} |m-n>.
inline std::vector<Matrix> loss_kraus_operators(double transmissivity, std::size_t cutoff) {
    if (!(transmissivity >= 0.0 && transmissivity <= 1.0)) {
        throw InvalidArgument("fock-backend", "transmissivity must lie in [0, 1]");
    }
    const auto d = static_cast<Eigen::Index>(cutoff);
    std::vector<Matrix> ops;
    ops.reserve(cutoff);
    for (Eigen::Index n = 0; n < d; ++n) {
        Matrix e = Matrix::Zero(d, d);
        for (Eigen::Index m = n; m < d; ++m) {
            double value;
            if (transmissivity == 0.0) {
                value = (m == n) ? 1.0 : 0.0;
            } else if (transmissivity == 1.0) {
                value = (n == 0) ? 1.0 : 0.0;
            } else {
                const double log_binom = std::lgamma(static_cast<double>(m + 1)) -
                                         std::lgamma(static_cast<double>(n + 1)) -
                                         std::lgamma(static_cast<double>(m - n + 1));
                value = std::exp(0.5 * log_binom + 0.5 * static_cast<double>(n) * std::log1p(-transmissivity) +
                                 0.5 * static_cast<double>(m - n) * std::log(transmissivity));
            }
            e(m - n, m) = value;
        }
        ops.push_back(std::move(e));
    }
    return ops;
}

} // namespace fock

/**
 * Mixed state held as a weighted ensemble of pure branches, produced by the
 * loss channel. Weights are the branch probabilities; each branch state is
 * normalized.
 */
struct FockEnsemble {
    std::vector<double> weights;
    std::vector<FockState> states;

    static FockEnsemble pure(FockState state) {
        FockEnsemble e;
        e.weights.push_back(1.0);
        e.states.push_back(std::move(state));
        return e;
    }

    [[nodiscard]] std::size_t size() const noexcept { return states.size(); }
};

namespace fock {

/// Applies the loss channel with transmissivity `t` to `mode` of every branch.
inline FockEnsemble apply_loss(const FockEnsemble &ensemble, double t, std::size_t mode) {
    if (!(t >= 0.0 && t <= 1.0)) {
        throw InvalidArgument("fock-backend", "transmissivity must lie in [0, 1]");
    }
    if (t == 1.0) {
        return ensemble;
    }
    FockEnsemble out;
    for (std::size_t b = 0; b < ensemble.size(); ++b) {
        const FockState &state = ensemble.states[b];
        if (mode >= state.n_modes()) {
            throw IndexError("fock-backend", "loss channel mode out of range");
        }
        const double parent_norm = state.squared_norm();
        const auto kraus = loss_kraus_operators(t, state.cutoff());
        for (const auto &e : kraus) {
            CVector amps = state.amplitudes();
            detail::apply_single(amps, state.n_modes(), state.cutoff(), e.cast<complex_t>(), mode);
            const double w = amps.squaredNorm();
            if (w <= 1e-16 * parent_norm) continue;
            amps /= std::sqrt(w);
            out.weights.push_back(ensemble.weights[b] * w / parent_norm);
            out.states.emplace_back(std::move(amps), state.n_modes(), state.config());
        }
    }
    return out;
}

inline FockEnsemble apply_loss(const FockState &state, double t, std::size_t mode) {
    return apply_loss(FockEnsemble::pure(state), t, mode);
}

} // namespace fock
} // namespace cvbm
