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
 * @file kernels.hpp
 * MMD kernels: the Gaussian RBF exp(-|x - y|^2 / 2 sigma^2) and quantum
 * kernels built from per-mode CV feature states,
 *
 *   CubicPhase: x_i -> V(gamma = x_i)|0>
 *   Squeezed:   x_i -> S(r = x_i, phi = 0)|0>
 *
 * The n-mode feature state is the tensor product of the per-mode states, so
 * its overlap is the product of per-mode overlaps. The complex overlap is
 * reduced to a real kernel value by the configured combiner.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "fock.hpp"
#include "types.hpp"

namespace cvbm {

enum class KernelKind { GaussianRBF, CubicPhase, Squeezed };
enum class Combiner { ModulusSquared, RealPart };

inline std::string_view to_string(KernelKind kind) {
    switch (kind) {
    case KernelKind::GaussianRBF:
        return "GaussianRBF";
    case KernelKind::CubicPhase:
        return "CubicPhase";
    case KernelKind::Squeezed:
        return "Squeezed";
    }
    return "?";
}

inline std::string_view to_string(Combiner c) { return c == Combiner::ModulusSquared ? "ModulusSquared" : "RealPart"; }

inline KernelKind parse_kernel_kind(std::string_view name) {
    if (name == "GaussianRBF" || name == "rbf" || name == "gaussian") return KernelKind::GaussianRBF;
    if (name == "CubicPhase" || name == "cubic") return KernelKind::CubicPhase;
    if (name == "Squeezed" || name == "squeezed") return KernelKind::Squeezed;
    throw InvalidArgument("kernels", "unknown kernel kind '" + std::string(name) + "'");
}

inline Combiner parse_combiner(std::string_view name) {
    if (name == "ModulusSquared") return Combiner::ModulusSquared;
    if (name == "RealPart") return Combiner::RealPart;
    throw InvalidArgument("kernels", "unknown combiner '" + std::string(name) + "'");
}

struct KernelSpec {
    KernelKind kind{KernelKind::GaussianRBF};
    /// RBF bandwidth; 0 selects the median heuristic on first use.
    double sigma{0.0};
    std::size_t cutoff{15};
    Combiner combiner{Combiner::ModulusSquared};
    double hbar{kDefaultHbar};
    /// Feature states whose squared norm falls below this raise TruncationLeakage.
    double norm_floor{1e-3};

    [[nodiscard]] bool needs_bandwidth() const { return kind == KernelKind::GaussianRBF && sigma <= 0.0; }

    void validate() const {
        if (kind == KernelKind::GaussianRBF) {
            if (sigma < 0.0 || !std::isfinite(sigma)) {
                throw InvalidArgument("kernels", "sigma must be positive (or 0 for the median heuristic)");
            }
        } else {
            if (cutoff < 2) {
                throw InvalidArgument("kernels", "quantum kernel cutoff must be at least 2");
            }
            if (!(norm_floor >= 0.0 && norm_floor <= 1.0)) {
                throw InvalidArgument("kernels", "feature norm floor must lie in [0, 1]");
            }
        }
    }
};

namespace kernels {

/// Median pairwise Euclidean distance over (at most the first 1000 rows of) `pooled`.
inline double median_bandwidth(const Samples &pooled) {
    const Eigen::Index rows = std::min<Eigen::Index>(pooled.rows(), 1000);
    std::vector<double> dist;
    dist.reserve(static_cast<std::size_t>(rows * (rows - 1) / 2));
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = i + 1; j < rows; ++j) {
            dist.push_back((pooled.row(i) - pooled.row(j)).norm());
        }
    }
    if (dist.empty()) return 1.0;
    auto mid = dist.begin() + static_cast<std::ptrdiff_t>(dist.size() / 2);
    std::nth_element(dist.begin(), mid, dist.end());
    double median = *mid;
    if (dist.size() % 2 == 0) {
        median = 0.5 * (median + *std::max_element(dist.begin(), mid));
    }
    return median > 0.0 ? median : 1.0;
}

inline Samples stack(const Samples &a, const Samples &b) {
    if (a.cols() != b.cols()) {
        throw DimensionMismatch("kernels", "sample sets have different dimensions");
    }
    Samples out(a.rows() + b.rows(), a.cols());
    out.topRows(a.rows()) = a;
    out.bottomRows(b.rows()) = b;
    return out;
}

/// Freezes the RBF bandwidth from pooled data when the spec asks for the median heuristic.
inline KernelSpec resolve_bandwidth(KernelSpec spec, const Samples &x, const Samples &y) {
    if (spec.needs_bandwidth()) {
        spec.sigma = median_bandwidth(stack(x, y));
    }
    return spec;
}

} // namespace kernels

/**
 * Kernel evaluator for a fixed KernelSpec. For quantum kernels the feature
 * generator is diagonalized once at construction.
 */
class Kernel {
  public:
    explicit Kernel(KernelSpec spec) : spec_(spec) {
        spec_.validate();
        if (spec_.kind == KernelKind::GaussianRBF) {
            if (spec_.sigma <= 0.0) {
                throw InvalidArgument("kernels", "RBF bandwidth unresolved; call kernels::resolve_bandwidth first");
            }
            return;
        }
        const std::size_t padded = fock::padded_dimension(spec_.cutoff);
        CMatrix generator = spec_.kind == KernelKind::CubicPhase
                                ? fock::cubic_phase_generator(padded, 1.0, spec_.hbar)
                                : fock::squeezing_generator(padded, 1.0, 0.0);
        feature_ = fock::SpectralGenerator(generator, spec_.cutoff);
    }

    [[nodiscard]] const KernelSpec &spec() const noexcept { return spec_; }

    /// Single-mode feature state for strength x (quantum kernels only).
    [[nodiscard]] CVector feature_state(double x) const {
        if (!feature_) {
            throw InvalidArgument("kernels", "the RBF kernel has no feature state");
        }
        CVector v = feature_->column(x, 0);
        const double norm = v.squaredNorm();
        if (norm < spec_.norm_floor) {
            throw TruncationLeakage("kernels", norm, spec_.norm_floor);
        }
        return v;
    }

    [[nodiscard]] double value(std::span<const double> x, std::span<const double> y) const {
        if (x.size() != y.size()) {
            throw DimensionMismatch("kernels", "kernel arguments have different dimensions");
        }
        if (spec_.kind == KernelKind::GaussianRBF) {
            double d2 = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double d = x[i] - y[i];
                d2 += d * d;
            }
            return rbf(d2);
        }
        complex_t prod(1.0, 0.0);
        for (std::size_t i = 0; i < x.size(); ++i) {
            prod *= feature_state(x[i]).dot(feature_state(y[i]));
        }
        return combine(prod);
    }

    template <typename RowA, typename RowB>
    [[nodiscard]] double value_rows(const RowA &a, const RowB &b) const {
        std::vector<double> x(static_cast<std::size_t>(a.size()));
        std::vector<double> y(static_cast<std::size_t>(b.size()));
        for (Eigen::Index i = 0; i < a.size(); ++i) x[static_cast<std::size_t>(i)] = a(i);
        for (Eigen::Index i = 0; i < b.size(); ++i) y[static_cast<std::size_t>(i)] = b(i);
        return value(x, y);
    }

    /// Gram matrix K(i, j) = k(X_i, Y_j). Quantum feature states are built once per sample.
    [[nodiscard]] Matrix gram(const Samples &x, const Samples &y) const {
        if (x.cols() != y.cols()) {
            throw DimensionMismatch("kernels", "sample sets have different dimensions");
        }
        Matrix k(x.rows(), y.rows());
        if (spec_.kind == KernelKind::GaussianRBF) {
            for (Eigen::Index i = 0; i < x.rows(); ++i) {
                for (Eigen::Index j = 0; j < y.rows(); ++j) {
                    double d2 = 0.0;
                    for (Eigen::Index c = 0; c < x.cols(); ++c) {
                        const double d = x(i, c) - y(j, c);
                        d2 += d * d;
                    }
                    k(i, j) = rbf(d2);
                }
            }
            return k;
        }
        CMatrix overlap = CMatrix::Ones(x.rows(), y.rows());
        for (Eigen::Index c = 0; c < x.cols(); ++c) {
            const CMatrix fx = features(x.col(c));
            const CMatrix fy = features(y.col(c));
            overlap = overlap.cwiseProduct(fx.adjoint() * fy);
        }
        for (Eigen::Index i = 0; i < k.rows(); ++i) {
            for (Eigen::Index j = 0; j < k.cols(); ++j) {
                k(i, j) = combine(overlap(i, j));
            }
        }
        return k;
    }

  private:
    [[nodiscard]] double rbf(double squared_distance) const {
        return std::exp(-squared_distance / (2.0 * spec_.sigma * spec_.sigma));
    }

    [[nodiscard]] double combine(complex_t z) const {
        return spec_.combiner == Combiner::ModulusSquared ? std::norm(z) : z.real();
    }

    template <typename Column>
    [[nodiscard]] CMatrix features(const Column &values) const {
        CMatrix out(static_cast<Eigen::Index>(spec_.cutoff), values.size());
        for (Eigen::Index i = 0; i < values.size(); ++i) {
            out.col(i) = feature_state(values(i));
        }
        return out;
    }

    KernelSpec spec_;
    std::optional<fock::SpectralGenerator> feature_;
};

} // namespace cvbm
