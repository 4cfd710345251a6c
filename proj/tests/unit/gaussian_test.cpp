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
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "cvbm/fock.hpp"
#include "cvbm/gaussian.hpp"
#include "stats.hpp"

namespace {

using namespace cvbm;

TEST(GaussianVacuumTest, SingleModeHbarTwo) {
    const GaussianState s = gaussian::vacuum(1);
    EXPECT_EQ(s.mean, Vector::Zero(2));
    EXPECT_EQ(s.cov, Matrix::Identity(2, 2));
}

TEST(GaussianVacuumTest, ThreeModes) {
    const GaussianState s = gaussian::vacuum(3);
    EXPECT_EQ(s.cov, Matrix::Identity(6, 6));
    EXPECT_EQ(s.mean.size(), 6);
}

TEST(GaussianVacuumTest, HbarOne) {
    const GaussianState s = gaussian::vacuum(1, 1.0);
    EXPECT_EQ(s.cov, 0.5 * Matrix::Identity(2, 2));
    EXPECT_THROW((void)gaussian::vacuum(0), InvalidArgument);
}

TEST(SymplecticTest, DisplacementMatchesFockExpectation) {
    const GaussianState g = gaussian::apply_symplectic(gaussian::vacuum(1), Gate::displacement(0, 1.0));
    EXPECT_NEAR(g.mean(0), 2.0, 1e-15);
    EXPECT_NEAR(g.mean(1), 0.0, 1e-15);
    EXPECT_EQ(g.cov, Matrix::Identity(2, 2));

    FockConfig c;
    c.cutoff = 40;
    const FockState f = fock::apply_gate(FockState::vacuum(1, c), Gate::displacement(0, 1.0));
    const auto [mean, var] = fock::quadrature_moments(fock::reduced_density(f, 0), 2.0);
    EXPECT_NEAR(mean, g.mean(0), 1e-9);
    EXPECT_NEAR(var, 1.0, 1e-9);
}

TEST(SymplecticTest, SqueezingMatchesFockVariances) {
    const double r = std::log(2.0);
    const GaussianState g = gaussian::apply_symplectic(gaussian::vacuum(1), Gate::squeezing(0, r));
    EXPECT_NEAR(g.cov(0, 0), 0.25, 1e-14);
    EXPECT_NEAR(g.cov(1, 1), 4.0, 1e-14);
    EXPECT_NEAR(g.cov(0, 1), 0.0, 1e-14);

    FockConfig c;
    c.cutoff = 40;
    const FockState f = fock::apply_gate(FockState::vacuum(1, c), Gate::squeezing(0, r));
    const auto [mean, var] = fock::quadrature_moments(fock::reduced_density(f, 0), 2.0);
    EXPECT_NEAR(var, 0.25, 1e-6);
    // p-variance: rotate by pi/2 and read x
    const FockState fp = fock::apply_gate(f, Gate::rotation(0, kPi / 2.0));
    const auto [mp, vp] = fock::quadrature_moments(fock::reduced_density(fp, 0), 2.0);
    EXPECT_NEAR(vp, 4.0, 1e-4);
}

TEST(SymplecticTest, RotationLeavesVacuumUnchanged) {
    for (double phi : {0.3, 2.0, -1.1}) {
        const GaussianState s = gaussian::apply_symplectic(gaussian::vacuum(1), Gate::rotation(0, phi));
        EXPECT_LT((s.cov - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-15);
        EXPECT_EQ(s.mean, Vector::Zero(2));
    }
}

TEST(SymplecticTest, NonGaussianGatesRejected) {
    EXPECT_THROW((void)gaussian::apply_symplectic(gaussian::vacuum(1), Gate::cubic_phase(0, 0.1)), NonGaussianGate);
    EXPECT_THROW((void)gaussian::apply_symplectic(gaussian::vacuum(1), Gate::kerr(0, 0.1)), NonGaussianGate);
    EXPECT_THROW((void)gaussian::apply_symplectic(gaussian::vacuum(1), Gate::rotation(1, 0.1)), IndexError);
}

TEST(SymplecticTest, MatricesPreserveSymplecticForm) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    const Matrix omega = gaussian::symplectic_form(3);
    for (int trial = 0; trial < 50; ++trial) {
        for (const Gate &g : {Gate::rotation(1, u(rng)), Gate::displacement(2, u(rng), u(rng)),
                              Gate::squeezing(0, u(rng), u(rng)), Gate::beamsplitter(2, 0, u(rng), u(rng))}) {
            const Matrix m = gaussian::symplectic_action(g, 3, 2.0).m;
            EXPECT_LT((m * omega * m.transpose() - omega).cwiseAbs().maxCoeff(), 1e-10) << to_string(g.kind);
        }
    }
}

TEST(SymplecticTest, BeamsplitterAgreesWithFockMoments) {
    const std::vector<Gate> gates{Gate::displacement(0, 0.4, 0.1), Gate::squeezing(1, 0.3),
                                  Gate::beamsplitter(0, 1, 0.5, 0.7)};
    GaussianState g = gaussian::vacuum(2);
    FockConfig c;
    c.cutoff = 25;
    FockState f = FockState::vacuum(2, c);
    for (const auto &gate : gates) {
        g = gaussian::apply_symplectic(g, gate);
        f = fock::apply_gate(f, gate);
    }
    for (std::size_t mode = 0; mode < 2; ++mode) {
        const auto [mean, var] = fock::quadrature_moments(fock::reduced_density(f, mode), 2.0);
        const auto k = static_cast<Eigen::Index>(mode);
        EXPECT_NEAR(mean, g.mean(k), 1e-8);
        EXPECT_NEAR(var, g.cov(k, k), 1e-8);
    }
}

TEST(LossChannelTest, UnitTransmissionBitIdentical) {
    const GaussianState s = gaussian::apply_symplectic(gaussian::vacuum(2), Gate::squeezing(1, 0.7, 0.3));
    const GaussianState out = gaussian::apply_loss(s, {1.0, 1});
    EXPECT_EQ(out.mean, s.mean);
    EXPECT_EQ(out.cov, s.cov);
}

TEST(LossChannelTest, ZeroTransmissionGivesVacuumMode) {
    GaussianState s = gaussian::apply_symplectic(gaussian::vacuum(1), Gate::squeezing(0, 0.7, 0.3));
    s = gaussian::apply_symplectic(s, Gate::displacement(0, 0.5, -0.4));
    const GaussianState out = gaussian::apply_loss(s, {0.0, 0});
    EXPECT_LT((out.cov - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT(out.mean.cwiseAbs().maxCoeff(), 1e-15);
}

TEST(LossChannelTest, HalfTransmissionSqueezedVariance) {
    const double r = 0.6;
    const GaussianState s = gaussian::apply_symplectic(gaussian::vacuum(1), Gate::squeezing(0, r));
    const GaussianState out = gaussian::apply_loss(s, {0.5, 0});
    EXPECT_NEAR(out.cov(0, 0), 0.5 * std::exp(-2.0 * r) + 0.5, 1e-14);
}

TEST(LossChannelTest, SemigroupComposition) {
    GaussianState s = gaussian::apply_symplectic(gaussian::vacuum(2), Gate::squeezing(0, 0.5, 0.2));
    s = gaussian::apply_symplectic(s, Gate::beamsplitter(0, 1, 0.4, 0.1));
    s = gaussian::apply_symplectic(s, Gate::displacement(0, 0.3, 0.2));
    const GaussianState two = gaussian::apply_loss(gaussian::apply_loss(s, {0.7, 0}), {0.6, 0});
    const GaussianState one = gaussian::apply_loss(s, {0.42, 0});
    EXPECT_LT((two.cov - one.cov).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((two.mean - one.mean).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(LossChannelTest, RejectsBadTransmissivity) {
    EXPECT_THROW((void)gaussian::apply_loss(gaussian::vacuum(1), {1.5, 0}), InvalidArgument);
    EXPECT_THROW((void)gaussian::apply_loss(gaussian::vacuum(1), {-0.1, 0}), InvalidArgument);
    EXPECT_THROW((void)gaussian::apply_loss(gaussian::vacuum(1), {0.5, 3}), IndexError);
}

TEST(GaussianInvariantTest, RandomSequencesKeepPhysicality) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> pick(0, 4);
    for (int trial = 0; trial < 100; ++trial) {
        GaussianState s = gaussian::vacuum(3);
        for (int step = 0; step < 12; ++step) {
            switch (pick(rng)) {
            case 0:
                s = gaussian::apply_symplectic(s, Gate::rotation(step % 3, 3.0 * u(rng)));
                break;
            case 1:
                s = gaussian::apply_symplectic(s, Gate::displacement(step % 3, u(rng), u(rng)));
                break;
            case 2:
                s = gaussian::apply_symplectic(s, Gate::squeezing(step % 3, u(rng), 3.0 * u(rng)));
                break;
            case 3:
                s = gaussian::apply_symplectic(s, Gate::beamsplitter(step % 3, (step + 1) % 3, 3.0 * u(rng), u(rng)));
                break;
            default:
                s = gaussian::apply_loss(s, {0.5 + 0.5 * u(rng), static_cast<std::size_t>(step % 3)});
            }
        }
        EXPECT_LT((s.cov - s.cov.transpose()).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_GT(gaussian::min_cov_eigenvalue(s), 0.0);
        EXPECT_GT(gaussian::min_uncertainty_eigenvalue(s), -1e-9);
    }
}

TEST(HomodyneTest, VacuumMoments) {
    Rng rng(2024);
    const std::size_t m = 100000;
    const Samples x = gaussian::homodyne_sample(gaussian::vacuum(1), rng, m);
    const auto v = stats::to_vector(x.col(0));
    EXPECT_LT(std::abs(stats::mean(v)), 4.0 / std::sqrt(static_cast<double>(m)));
    EXPECT_NEAR(stats::variance(v), 1.0, 0.05);
}

TEST(HomodyneTest, DisplacedAndSqueezedMoments) {
    Rng rng(7);
    const auto d = gaussian::apply_symplectic(gaussian::vacuum(1), Gate::displacement(0, 1.0));
    const auto dv = stats::to_vector(gaussian::homodyne_sample(d, rng, 100000).col(0));
    EXPECT_NEAR(stats::mean(dv), 2.0, 4.0 / std::sqrt(1e5));
    const auto s = gaussian::apply_symplectic(gaussian::vacuum(1), Gate::squeezing(0, std::log(2.0)));
    const auto sv = stats::to_vector(gaussian::homodyne_sample(s, rng, 100000).col(0));
    EXPECT_NEAR(stats::variance(sv), 0.25, 0.25 * 0.05);
}

TEST(HomodyneTest, JointMomentsMatchAnalyticBlock) {
    GaussianState s = gaussian::vacuum(2);
    s = gaussian::apply_symplectic(s, Gate::squeezing(0, 0.5, 0.3));
    s = gaussian::apply_symplectic(s, Gate::displacement(1, 0.4, -0.2));
    s = gaussian::apply_symplectic(s, Gate::beamsplitter(0, 1, 0.6, 0.2));
    Rng rng(99);
    const std::size_t m = 100000;
    const Samples x = gaussian::homodyne_sample(s, rng, m);
    const Vector mu = x.colwise().mean().transpose();
    const Matrix centered = x.rowwise() - mu.transpose();
    const Matrix cov = centered.transpose() * centered / static_cast<double>(m - 1);
    const Matrix target = s.x_cov();
    for (Eigen::Index i = 0; i < 2; ++i) {
        const double se_mean = std::sqrt(target(i, i) / static_cast<double>(m));
        EXPECT_LT(std::abs(mu(i) - s.mean(i)) / se_mean, 5.0);
        for (Eigen::Index j = 0; j < 2; ++j) {
            const double se = std::sqrt((target(i, i) * target(j, j) + target(i, j) * target(i, j)) /
                                        static_cast<double>(m));
            EXPECT_LT(std::abs(cov(i, j) - target(i, j)) / se, 5.0);
        }
    }
}

TEST(HomodyneTest, DeterministicUnderSeed) {
    const auto s = gaussian::apply_symplectic(gaussian::vacuum(2), Gate::beamsplitter(0, 1, 0.3));
    Rng a(17);
    Rng b(17);
    EXPECT_EQ(gaussian::homodyne_sample(s, a, 50), gaussian::homodyne_sample(s, b, 50));
}

TEST(HomodyneTest, CorruptedCovarianceSurfaced) {
    GaussianState s = gaussian::vacuum(1);
    s.cov(0, 0) = -1.0;
    Rng rng(1);
    EXPECT_THROW((void)gaussian::homodyne_sample(s, rng, 10), CorruptedState);
}

TEST(HomodyneTest, AngleWrapperReadsMomentum) {
    const auto s = gaussian::apply_symplectic(gaussian::vacuum(1), Gate::displacement(0, 0.0, 1.0));
    Rng rng(3);
    const std::vector<double> angles{kPi / 2.0};
    const auto v = stats::to_vector(gaussian::homodyne_sample_at(s, angles, rng, 20000).col(0));
    EXPECT_NEAR(stats::mean(v), 2.0, 0.05);
}

} // namespace
