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
 * @file mmd.hpp
 * Unbiased MMD estimator and its parameter-shift gradient.
 *
 * For model samples X (M rows) and data samples Y (N rows)
 *
 *   MMD = 1/(M(M-1)) sum_{i!=j} k(x_i, x_j) + 1/(N(N-1)) sum_{i!=j} k(y_i, y_j)
 *         - 2/(MN) sum_{i,j} k(x_i, y_j).
 *
 * The gradient with respect to trainable parameter k draws R samples a from
 * the + shifted circuit and S samples b from the - shifted circuit and forms
 *
 *   scale * [ <k(a, x)> - <k(b, x)> - <k(a, y)> + <k(b, y)> ].
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "circuit.hpp"
#include "errors.hpp"
#include "kernels.hpp"
#include "types.hpp"

namespace cvbm {

struct MmdEstimate {
    double value{0.0};
    std::size_t m{0};
    std::size_t n{0};
};

namespace detail {

inline double off_diagonal_sum(const Matrix &k) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < k.rows(); ++i) {
        for (Eigen::Index j = 0; j < k.cols(); ++j) {
            if (i != j) total += k(i, j);
        }
    }
    return total;
}

inline double full_sum(const Matrix &k) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < k.rows(); ++i) {
        for (Eigen::Index j = 0; j < k.cols(); ++j) {
            total += k(i, j);
        }
    }
    return total;
}

inline double full_mean(const Matrix &k) { return full_sum(k) / static_cast<double>(k.rows() * k.cols()); }

/// RBF fast path: the pair sum without any Gram storage; self-sums use symmetry.
inline double rbf_sum(double sigma, const Samples &a, const Samples &b, bool skip_diagonal) {
    const double scale = -1.0 / (2.0 * sigma * sigma);
    const Eigen::Index d = a.cols();
    double total = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        const double *ai = a.row(i).data();
        const Eigen::Index j0 = skip_diagonal ? i + 1 : 0;
        double row = 0.0;
        for (Eigen::Index j = j0; j < b.rows(); ++j) {
            const double *bj = b.row(j).data();
            double d2 = 0.0;
            for (Eigen::Index c = 0; c < d; ++c) {
                const double diff = ai[c] - bj[c];
                d2 += diff * diff;
            }
            row += std::exp(d2 * scale);
        }
        total += row;
    }
    return skip_diagonal ? 2.0 * total : total;
}

/// Sum of k(a_i, b_j) computed in row blocks so large sets never materialize the full Gram matrix.
/// With `skip_diagonal`, a and b are the same set and the i == j terms are left out.
inline double blocked_sum(const Kernel &kernel, const Samples &a, const Samples &b, bool skip_diagonal) {
    if (kernel.spec().kind == KernelKind::GaussianRBF) {
        return rbf_sum(kernel.spec().sigma, a, b, skip_diagonal);
    }
    constexpr Eigen::Index kBlock = 256;
    double total = 0.0;
    for (Eigen::Index start = 0; start < a.rows(); start += kBlock) {
        const Eigen::Index rows = std::min(kBlock, a.rows() - start);
        const Matrix k = kernel.gram(a.middleRows(start, rows), b);
        for (Eigen::Index i = 0; i < rows; ++i) {
            for (Eigen::Index j = 0; j < k.cols(); ++j) {
                if (!skip_diagonal || start + i != j) total += k(i, j);
            }
        }
    }
    return total;
}

} // namespace detail

inline MmdEstimate mmd(const Kernel &kernel, const Samples &x, const Samples &y) {
    if (x.rows() < 2 || y.rows() < 2) {
        throw InsufficientSamples("mmd-loss", "the unbiased estimator needs at least two samples per set");
    }
    if (x.cols() != y.cols()) {
        throw DimensionMismatch("mmd-loss", "sample sets have different dimensions");
    }
    const auto m = static_cast<double>(x.rows());
    const auto n = static_cast<double>(y.rows());
    const double xx = detail::blocked_sum(kernel, x, x, true) / (m * (m - 1.0));
    const double yy = detail::blocked_sum(kernel, y, y, true) / (n * (n - 1.0));
    const double xy = detail::blocked_sum(kernel, x, y, false) * 2.0 / (m * n);
    return {xx + yy - xy, static_cast<std::size_t>(x.rows()), static_cast<std::size_t>(y.rows())};
}

/// Resolves the RBF bandwidth from the two sets when needed, then estimates.
inline MmdEstimate mmd(const KernelSpec &spec, const Samples &x, const Samples &y) {
    return mmd(Kernel(kernels::resolve_bandwidth(spec, x, y)), x, y);
}

struct GradientOptions {
    std::size_t r_shift{30};
    std::size_t s_shift{30};
    ShiftSettings shifts{};

    void validate() const {
        if (r_shift < 1 || s_shift < 1) {
            throw InvalidArgument("mmd-loss", "R and S must be at least 1");
        }
        shifts.validate();
    }
};

struct ShiftMeta {
    double shift{0.0};
    double scale{1.0};
    std::size_t r{0};
    std::size_t s{0};
};

struct GradientEstimate {
    std::vector<double> values;
    std::vector<ShiftMeta> shift_meta;
};

/// The four-term combination for one parameter, given samples from the shifted circuits.
inline double shifted_combination(const Kernel &kernel, const Samples &a, const Samples &b, const Samples &x,
                                  const Samples &y) {
    return detail::full_mean(kernel.gram(a, x)) - detail::full_mean(kernel.gram(b, x)) -
           detail::full_mean(kernel.gram(a, y)) + detail::full_mean(kernel.gram(b, y));
}

/// Gradient component for trainable parameter k. Shifted-circuit samples come from `rng`.
inline double mmd_gradient_component(const Circuit &circuit, std::size_t k, const Kernel &kernel,
                                     const Samples &x_model, const Samples &y_data, const GradientOptions &options,
                                     Rng &rng, const NoiseModel &noise = {}, const BackendConfig &config = {},
                                     ShiftMeta *meta = nullptr) {
    options.validate();
    const ShiftedCircuits shifted = shifted_circuits(circuit, k, options.shifts);
    const Samples a = sample(shifted.plus, options.r_shift, rng, noise, config);
    const Samples b = sample(shifted.minus, options.s_shift, rng, noise, config);
    if (meta != nullptr) {
        *meta = {shifted.shift, shifted.scale, options.r_shift, options.s_shift};
    }
    return shifted.scale * shifted_combination(kernel, a, b, x_model, y_data);
}

/// Full gradient; parameter k draws from its own stream derived from `seed`.
inline GradientEstimate mmd_gradient(const Circuit &circuit, const Kernel &kernel, const Samples &x_model,
                                     const Samples &y_data, const GradientOptions &options, std::uint64_t seed,
                                     const NoiseModel &noise = {}, const BackendConfig &config = {}) {
    if (x_model.rows() < 1 || y_data.rows() < 1) {
        throw InsufficientSamples("mmd-loss", "gradient needs model and data samples");
    }
    GradientEstimate out;
    const std::size_t count = circuit.parameter_count();
    out.values.resize(count);
    out.shift_meta.resize(count);
    for (std::size_t k = 0; k < count; ++k) {
        Rng rng = derive_rng(seed, {k});
        out.values[k] = mmd_gradient_component(circuit, k, kernel, x_model, y_data, options, rng, noise, config,
                                               &out.shift_meta[k]);
    }
    return out;
}

} // namespace cvbm
