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

#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "cvbm/kernels.hpp"

namespace {

using namespace cvbm;

KernelSpec rbf(double sigma) {
    KernelSpec s;
    s.sigma = sigma;
    return s;
}

KernelSpec quantum(KernelKind kind, std::size_t cutoff, Combiner combiner = Combiner::ModulusSquared) {
    KernelSpec s;
    s.kind = kind;
    s.cutoff = cutoff;
    s.combiner = combiner;
    return s;
}

Samples random_samples(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, double scale = 1.0) {
    Rng rng(seed);
    Samples x(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) x(i, j) = scale * standard_normal(rng);
    return x;
}

double scalar_kernel(const Kernel &k, double x, double y) {
    const std::vector<double> a{x};
    const std::vector<double> b{y};
    return k.value(a, b);
}

TEST(KernelSpecTest, Validation) {
    EXPECT_THROW(rbf(-1.0).validate(), InvalidArgument);
    EXPECT_THROW(Kernel(rbf(0.0)), InvalidArgument);  // unresolved bandwidth
    EXPECT_THROW(quantum(KernelKind::Squeezed, 1).validate(), InvalidArgument);
    EXPECT_EQ(parse_kernel_kind("Squeezed"), KernelKind::Squeezed);
    EXPECT_EQ(parse_combiner("RealPart"), Combiner::RealPart);
    EXPECT_THROW((void)parse_kernel_kind("Laplace"), InvalidArgument);
}

TEST(RbfKernelTest, Examples) {
    const Kernel k(rbf(1.0));
    EXPECT_EQ(scalar_kernel(k, 0.7, 0.7), 1.0);
    EXPECT_NEAR(scalar_kernel(k, 0.0, 2.0), 0.135335283236613, 1e-15);
    const std::vector<double> a{1.0, 2.0};
    const std::vector<double> b{1.0};
    EXPECT_THROW((void)k.value(a, b), DimensionMismatch);
}

TEST(RbfKernelTest, GramDiagonalAndSymmetry) {
    const Kernel k(rbf(0.8));
    const Samples x = random_samples(20, 3, 1);
    const Matrix g = k.gram(x, x);
    for (Eigen::Index i = 0; i < 20; ++i) EXPECT_EQ(g(i, i), 1.0);
    EXPECT_EQ((g - g.transpose()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(RbfKernelTest, GramMatchesPointwiseBitwise) {
    const Kernel k(rbf(1.3));
    const Samples x = random_samples(2, 2, 2);
    const Samples y = random_samples(3, 2, 3);
    const Matrix g = k.gram(x, y);
    for (Eigen::Index i = 0; i < 2; ++i)
        for (Eigen::Index j = 0; j < 3; ++j) EXPECT_EQ(g(i, j), k.value_rows(x.row(i), y.row(j)));
}

TEST(SqueezedKernelTest, ClosedFormOverlap) {
    // |<S(x)0|S(y)0>|^2 = 1 / cosh(x - y)
    const Kernel k40(quantum(KernelKind::Squeezed, 40));
    EXPECT_NEAR(scalar_kernel(k40, 0.5, 0.0), 0.886818883970074, 1e-9);
    const Kernel k15(quantum(KernelKind::Squeezed, 15));
    EXPECT_NEAR(scalar_kernel(k15, 0.5, 0.0), 0.886818883970074, 1e-4);
    for (double x : {-0.7, -0.2, 0.3, 0.6}) {
        for (double y : {-0.5, 0.1, 0.7}) {
            EXPECT_NEAR(scalar_kernel(k40, x, y), 1.0 / std::cosh(x - y), 1e-6) << x << "," << y;
        }
    }
}

TEST(SqueezedKernelTest, RealPartCombiner) {
    // <S(x)0|S(y)0> = 1/sqrt(cosh(x-y)) is real for equal angles
    const Kernel k(quantum(KernelKind::Squeezed, 40, Combiner::RealPart));
    EXPECT_NEAR(scalar_kernel(k, 0.5, 0.0), 0.941710615831676, 1e-9);
}

TEST(QuantumKernelTest, GramMatchesPointwise) {
    for (KernelKind kind : {KernelKind::Squeezed, KernelKind::CubicPhase}) {
        const Kernel k(quantum(kind, 15));
        const Samples x = random_samples(4, 2, 4, 0.5);
        const Samples y = random_samples(3, 2, 5, 0.5);
        const Matrix g = k.gram(x, y);
        for (Eigen::Index i = 0; i < 4; ++i)
            for (Eigen::Index j = 0; j < 3; ++j) EXPECT_NEAR(g(i, j), k.value_rows(x.row(i), y.row(j)), 1e-14);
    }
}

TEST(QuantumKernelTest, TensorProductFactorizes) {
    const Kernel k(quantum(KernelKind::CubicPhase, 15));
    const std::vector<double> a{0.3, -0.2};
    const std::vector<double> b{0.1, 0.4};
    const double joint = k.value(a, b);
    EXPECT_NEAR(joint, scalar_kernel(k, 0.3, 0.1) * scalar_kernel(k, -0.2, 0.4), 1e-14);
}

TEST(KernelInvariantTest, SymmetryAndBounds) {
    const Samples x = random_samples(30, 2, 6, 0.6);
    const Samples y = random_samples(30, 2, 7, 0.6);
    for (const KernelSpec &spec : {rbf(0.9), quantum(KernelKind::Squeezed, 15), quantum(KernelKind::CubicPhase, 15),
                                   quantum(KernelKind::CubicPhase, 15, Combiner::RealPart)}) {
        const Kernel k(spec);
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            const double xy = k.value_rows(x.row(i), y.row(i));
            const double yx = k.value_rows(y.row(i), x.row(i));
            EXPECT_NEAR(xy, yx, 1e-12) << to_string(spec.kind);
            EXPECT_GE(xy, -1e-9);
            EXPECT_LE(xy, 1.0 + 1e-9);
            if (spec.kind == KernelKind::GaussianRBF) EXPECT_GT(xy, 0.0);
        }
    }
}

TEST(KernelInvariantTest, PositiveSemidefinite) {
    const Samples x = random_samples(100, 1, 8);
    for (const KernelSpec &spec : {rbf(1.0), quantum(KernelKind::Squeezed, 15)}) {
        const Matrix g = Kernel(spec).gram(x, x);
        Eigen::SelfAdjointEigenSolver<Matrix> solver(g, Eigen::EigenvaluesOnly);
        EXPECT_GE(solver.eigenvalues().minCoeff(), -1e-8) << to_string(spec.kind);
    }
    const Samples x3 = random_samples(100, 3, 9);
    const Matrix g = Kernel(rbf(1.0)).gram(x3, x3);
    Eigen::SelfAdjointEigenSolver<Matrix> solver(g, Eigen::EigenvaluesOnly);
    EXPECT_GE(solver.eigenvalues().minCoeff(), -1e-8);
}

TEST(KernelInvariantTest, CubicSelfSimilarityTracksLeakage) {
    KernelSpec spec = quantum(KernelKind::CubicPhase, 15);
    spec.norm_floor = 0.0;
    const Kernel k(spec);
    EXPECT_NEAR(scalar_kernel(k, 0.0, 0.0), 1.0, 1e-12);
    double previous = 1.0 + 1e-12;
    for (double x : {0.2, 0.5, 1.0, 2.0}) {
        const double self = scalar_kernel(k, x, x);
        const double norm = k.feature_state(x).squaredNorm();
        EXPECT_NEAR(self, norm * norm, 1e-12);
        EXPECT_LT(self, previous);
        previous = self;
    }
}

TEST(KernelInvariantTest, LeakageBelowFloorRaises) {
    KernelSpec spec = quantum(KernelKind::CubicPhase, 15);
    spec.norm_floor = 0.9;
    const Kernel k(spec);
    EXPECT_THROW((void)scalar_kernel(k, 3.0, 0.0), TruncationLeakage);
}

TEST(MedianHeuristicTest, KnownValues) {
    Samples x(3, 1);
    x << 0.0, 1.0, 3.0;  // distances 1, 3, 2
    EXPECT_EQ(kernels::median_bandwidth(x), 2.0);
    Samples y(4, 1);
    y << 0.0, 1.0, 2.0, 4.0;  // 1,2,4,1,3,2 -> sorted 1,1,2,2,3,4 -> median 2
    EXPECT_EQ(kernels::median_bandwidth(y), 2.0);
    const KernelSpec resolved = kernels::resolve_bandwidth(KernelSpec{}, x, x);
    EXPECT_GT(resolved.sigma, 0.0);
    EXPECT_EQ(kernels::resolve_bandwidth(rbf(0.7), x, x).sigma, 0.7);
}

} // namespace
