#include <gtest/gtest.h>

#include <cmath>

#include "postsolve/oracle.hpp"
#include "postsolve/rng.hpp"
#include "postsolve/schedule.hpp"
#include "postsolve/solver.hpp"

using namespace postsolve;

namespace {

const NoiseSchedule& sched() {
    static const NoiseSchedule s = build_ddpm_schedule(1000, 1e-4, 0.02);
    return s;
}

}  // namespace

TEST(ConjugatePosterior, ScalarUpdateExample) {
    // prior N(0, 1) per coordinate, sigma = 0.01, y = 1.0 on coordinate 0:
    // posterior mean = 1e4 / (1e4 + 1), variance = 1 / (1e4 + 1)
    MaskOperator mask{{0}, 0.01, 2};
    Measurement y{{1.0}};
    Signal mu(2), var(std::vector<double>{1.0, 1.0});
    GaussianPosterior post = conjugate_posterior(mu, var, mask, y);
    const double expect_mean = 1e4 / (1e4 + 1.0);
    const double expect_var = 1.0 / (1e4 + 1.0);
    EXPECT_NEAR(post.mean[0], expect_mean, 1e-12);
    EXPECT_NEAR(post.mean[0], 0.99990, 1e-5);
    EXPECT_NEAR(post.diag_covariance[0], expect_var, 1e-15);
    EXPECT_NEAR(post.diag_covariance[0], 9.999e-5, 1e-8);
    EXPECT_EQ(post.mean[1], 0.0);
    EXPECT_EQ(post.diag_covariance[1], 1.0);
}

TEST(ConjugatePosterior, UninformativeMeasurementKeepsPrior) {
    MaskOperator mask{{0, 1}, 1e9, 2};
    Measurement y{{123.0, -55.0}};
    Signal mu({0.5, -0.25}), var({2.0, 0.5});
    GaussianPosterior post = conjugate_posterior(mu, var, mask, y);
    for (std::size_t i = 0; i < 2; ++i) {
        EXPECT_NEAR(post.mean[i], mu[i], 1e-6);
        EXPECT_NEAR(post.diag_covariance[i], var[i], 1e-6);
    }
}

TEST(ConjugatePosterior, AgreementCaseKeepsMean) {
    MaskOperator mask{{0, 2}, 0.05, 3};
    Signal mu({0.7, -0.1, 2.5}), var({0.3, 0.3, 0.9});
    Measurement y{{0.7, 2.5}};
    GaussianPosterior post = conjugate_posterior(mu, var, mask, y);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(post.mean[i], mu[i], 1e-12);
}

TEST(ConjugatePosterior, Errors) {
    MaskOperator mask{{0}, 0.0, 2};
    Measurement y{{1.0}};
    Signal mu(2), var(std::vector<double>{1.0, 1.0});
    EXPECT_THROW(conjugate_posterior(mu, var, mask, y), std::invalid_argument);
    mask.noise_sigma = 0.1;
    Signal badvar({1.0, -1.0});
    EXPECT_THROW(conjugate_posterior(mu, badvar, mask, y), std::invalid_argument);
    Measurement badlen{{1.0, 2.0}};
    EXPECT_THROW(conjugate_posterior(mu, var, mask, badlen), std::invalid_argument);
}

TEST(ProductOfGaussians, UnmeasuredKeepsAnchorFactor) {
    MaskOperator mask{{1}, 0.0, 3};
    Measurement y{{0.4}};
    Signal anchor({1.0, 2.0, 3.0});
    GaussianPosterior post = product_of_gaussians(anchor, 0.7, mask, y, 0.1);
    EXPECT_EQ(post.mean[0], 1.0);
    EXPECT_EQ(post.mean[2], 3.0);
    EXPECT_DOUBLE_EQ(post.diag_covariance[0], 0.49);
}

TEST(ProductOfGaussians, EqualPrecisionsAverage) {
    MaskOperator mask{{0}, 0.0, 1};
    Measurement y{{2.0}};
    Signal anchor({1.0});
    GaussianPosterior post = product_of_gaussians(anchor, 0.3, mask, y, 0.3);
    EXPECT_NEAR(post.mean[0], 1.5, 1e-12);
}

TEST(ProductOfGaussians, PrecisionWeightedExample) {
    // sigma_t = 1, m = 0.01, anchor = 0, y = 1 -> mean = 1e4 / (1 + 1e4)
    MaskOperator mask{{0}, 0.0, 1};
    Measurement y{{1.0}};
    GaussianPosterior post = product_of_gaussians(Signal({0.0}), 1.0, mask, y, 0.01);
    EXPECT_NEAR(post.mean[0], 1e4 / (1.0 + 1e4), 1e-12);
    EXPECT_NEAR(post.mean[0], 0.99990, 1e-5);
}

TEST(ProductOfGaussians, CoincidesWithConjugatePosterior) {
    // anchor = prior mean and sigma_t = prior std make the two oracles identical
    MaskOperator mask{{0, 2}, 0.05, 3};
    Measurement y{{0.9, -0.3}};
    Signal anchor({0.25, -1.0, 0.75});
    const double sigma_t = 0.4;
    GaussianPosterior a = product_of_gaussians(anchor, sigma_t, mask, y, mask.noise_sigma);
    GaussianPosterior b =
        conjugate_posterior(anchor, Signal(std::vector<double>(3, sigma_t * sigma_t)), mask, y);
    EXPECT_EQ(a.mean.values, b.mean.values);
    EXPECT_EQ(a.diag_covariance.values, b.diag_covariance.values);
}

TEST(BruteForceTweedie, StandardNormalClosedForm) {
    GaussianMixtureScore m;
    m.dimension = 1;
    m.components.push_back({Signal({0.0}), Signal({1.0}), 1.0, 0});
    const int t = 501;
    Signal z({0.85});
    Signal est = brute_force_tweedie(m, z, t, ConditionLabel::unconditioned(), sched());
    EXPECT_NEAR(est[0], sched().alpha(t) * z[0], 1e-4);
}

TEST(BruteForceTweedie, PointMassComponentOnGridNode) {
    // variance 1e-8 prior centered on a quadrature node: posterior collapses there
    GaussianMixtureScore m;
    m.dimension = 1;
    m.components.push_back({Signal({0.0}), Signal({1e-8}), 1.0, 0});
    Signal z({0.4});
    Signal est = brute_force_tweedie(m, z, 501, ConditionLabel::unconditioned(), sched());
    EXPECT_NEAR(est[0], 0.0, 1e-9);
}

TEST(BruteForceTweedie, SymmetricMixtureVanishesAtOrigin) {
    GaussianMixtureScore m;
    m.dimension = 1;
    m.components.push_back({Signal({-1.5}), Signal({0.5}), 0.5, 0});
    m.components.push_back({Signal({1.5}), Signal({0.5}), 0.5, 1});
    Signal z({0.0});
    Signal est = brute_force_tweedie(m, z, 301, ConditionLabel::unconditioned(), sched());
    EXPECT_NEAR(est[0], 0.0, 1e-10);
}

TEST(BruteForceTweedie, AgreesWithEpsilonPathOnProbeSet) {
    Rng rng(1);
    GaussianMixtureScore m;
    m.dimension = 2;
    m.components.push_back({Signal({-1.0, 0.5}), Signal({0.4, 0.7}), 0.6, 0});
    m.components.push_back({Signal({1.2, -0.8}), Signal({0.6, 0.3}), 0.4, 1});
    for (int t : {101, 301, 501}) {
        for (int probe = 0; probe < 3; ++probe) {
            Signal z = rng.normal_signal(2);
            Signal quad = brute_force_tweedie(m, z, t, ConditionLabel::unconditioned(), sched());
            Signal eps_path =
                predict_x0(z, epsilon(m, z, t, ConditionLabel::unconditioned(), sched()), t, sched());
            for (std::size_t i = 0; i < 2; ++i)
                EXPECT_NEAR(quad[i], eps_path[i], 1e-3) << "t=" << t << " probe=" << probe;
        }
    }
}

TEST(BruteForceTweedie, ConditionalAgreesWithEpsilonPath) {
    GaussianMixtureScore m;
    m.dimension = 1;
    m.components.push_back({Signal({-2.0}), Signal({0.1}), 0.5, 0});
    m.components.push_back({Signal({2.0}), Signal({0.1}), 0.5, 1});
    Signal z({0.3});
    const int t = 501;
    Signal quad = brute_force_tweedie(m, z, t, ConditionLabel::of(1), sched());
    Signal eps_path = predict_x0(z, epsilon(m, z, t, ConditionLabel::of(1), sched()), t, sched());
    EXPECT_NEAR(quad[0], eps_path[0], 1e-3);
}

TEST(BruteForceTweedie, ThreeDimensionalCoarseGrid) {
    GaussianMixtureScore m;
    m.dimension = 3;
    m.components.push_back(
        {Signal({0.5, -0.5, 1.0}), Signal({0.8, 0.6, 0.9}), 1.0, 0});
    Signal z({0.2, 0.1, -0.4});
    const int t = 501;
    QuadratureSpec coarse{-8.0, 8.0, 161};
    Signal quad = brute_force_tweedie(m, z, t, ConditionLabel::unconditioned(), sched(), coarse);
    Signal eps_path = predict_x0(z, epsilon(m, z, t, ConditionLabel::unconditioned(), sched()), t, sched());
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(quad[i], eps_path[i], 1e-3);
}

TEST(BruteForceTweedie, DimensionCapAndBadGrid) {
    GaussianMixtureScore m;
    m.dimension = 4;
    m.components.push_back(
        {Signal(std::vector<double>(4, 0.0)), Signal(std::vector<double>(4, 1.0)), 1.0, 0});
    Signal z(4);
    EXPECT_THROW(brute_force_tweedie(m, z, 101, ConditionLabel::unconditioned(), sched()),
                 std::invalid_argument);
    GaussianMixtureScore m1;
    m1.dimension = 1;
    m1.components.push_back({Signal({0.0}), Signal({1.0}), 1.0, 0});
    Signal z1({0.0});
    EXPECT_THROW(brute_force_tweedie(m1, z1, 101, ConditionLabel::unconditioned(), sched(),
                                     QuadratureSpec{8.0, -8.0, 101}),
                 std::invalid_argument);
}
