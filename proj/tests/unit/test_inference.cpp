#include "generators.hpp"

#include "ivt/errors.hpp"
#include "ivt/inference.hpp"
#include "ivt/simulate.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <cmath>

using namespace ivt;
using ivt::testing::Gen;
using ivt::testing::vec;

namespace {

Eigen::MatrixXd random_spd(Gen& gen, int p) {
    Eigen::MatrixXd a(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) a(i, j) = gen.uniform(-1.0, 1.0);
    return a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(p, p);
}

FitResult fit_at(Family f, const Eigen::VectorXd& theta, const CountSeries& x, int K) {
    FitResult fit;
    fit.family = f;
    fit.delta = x.delta;
    fit.n = x.size();
    fit.K = K;
    fit.theta = theta;
    fit.cl = log_composite_likelihood(make_model(f, theta, x.delta), x, K);
    fit.converged = true;
    return fit;
}

}  // namespace

TEST(Inference, HessianOfQuadraticIsExact) {
    Eigen::MatrixXd A(3, 3);
    A << 2, 0.3, -0.1, 0.3, 1, 0.2, -0.1, 0.2, 3;
    auto grad = [&](const Eigen::VectorXd& t) -> Eigen::VectorXd { return A * t; };
    const Eigen::MatrixXd h = hessian_from_gradient(grad, vec({0.5, -1.0, 2.0}), vec({1e-3, 1e-3, 1e-3}));
    EXPECT_LT((h - A).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Inference, HessianEstimateMatchesSecondDifferences) {
    const Family f = parse_family("nb-exp");
    const Eigen::VectorXd theta = vec({7.5, 0.7, 1.8});
    const CountSeries x = simulate_path(make_model(f, theta, 0.1), 400, 3);
    const Eigen::MatrixXd H = hessian_estimate(f, x, 1, theta);
    EXPECT_LT((H - H.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    auto l = [&](const Eigen::VectorXd& t) { return log_composite_likelihood(make_model(f, t, 0.1), x, 1); };
    for (int i = 0; i < 3; ++i) {
        const double h = 1e-3 * theta(i);
        Eigen::VectorXd up = theta;
        Eigen::VectorXd dn = theta;
        up(i) += h;
        dn(i) -= h;
        const double second = (l(up) - 2 * l(theta) + l(dn)) / (h * h);
        EXPECT_NEAR(H(i, i), -second / 400.0, 1e-4 * std::abs(H(i, i)));
    }
}

TEST(Inference, HacWithoutLagsIsScoreOuterProduct) {
    const Family f = parse_family("poisson-ig");
    const Eigen::VectorXd theta = vec({5.0, 1.0, 1.5});
    const IvtModel m = make_model(f, theta, 0.2);
    const CountSeries x = simulate_path(m, 300, 4);
    const Eigen::MatrixXd S = origin_scores(m, PairIndex(x, 3)) * model_jacobian(f, theta);
    const Eigen::MatrixXd v0 = v_hat_hac(f, x, 3, theta, 0);
    EXPECT_LT((v0 - S.transpose() * S / 300.0).cwiseAbs().maxCoeff(), 1e-10 * v0.cwiseAbs().maxCoeff());
}

TEST(Inference, HacBartlettWeights) {
    Eigen::MatrixXd S(4, 1);
    S << 1, 2, -1, 3;
    // q = 2: gamma0 + (2/3)(2 gamma1) + (1/3)(2 gamma2), each over n = 5
    const double g0 = 1 + 4 + 1 + 9;
    const double g1 = 1 * 2 + 2 * -1 + -1 * 3;
    const double g2 = 1 * -1 + 2 * 3;
    const double expect = (g0 + 2.0 / 3.0 * 2 * g1 + 1.0 / 3.0 * 2 * g2) / 5.0;
    EXPECT_NEAR(hac_from_scores(S, 5, 2)(0, 0), expect, 1e-14);
}

TEST(Inference, HacLagBounds) {
    const Family f = parse_family("poisson-exp");
    const CountSeries x = simulate_path(make_model(f, vec({5.0, 1.0}), 0.2), 50, 5);
    EXPECT_THROW((void)v_hat_hac(f, x, 1, vec({5.0, 1.0}), 49), DomainError);
    EXPECT_THROW((void)v_hat_hac(f, x, 1, vec({5.0, 1.0}), -1), DomainError);
    EXPECT_NO_THROW((void)v_hat_hac(f, x, 1, vec({5.0, 1.0}), 48));
}

TEST(Inference, SimulationNeedsTwoPaths) {
    const Family f = parse_family("poisson-exp");
    EXPECT_THROW((void)v_hat_sim(f, vec({5.0, 1.0}), 0.1, 1, 1, 100, 1), DomainError);
    EXPECT_THROW((void)score_covariance(Eigen::MatrixXd::Ones(1, 2)), DomainError);
}

TEST(Inference, SimulationIsReproducibleAcrossWorkers) {
    const Family f = parse_family("nb-exp");
    const Eigen::MatrixXd a = v_hat_sim(f, vec({2.0, 0.5, 1.0}), 0.2, 2, 20, 200, 77, 1);
    const Eigen::MatrixXd b = v_hat_sim(f, vec({2.0, 0.5, 1.0}), 0.2, 2, 20, 200, 77, 3);
    EXPECT_EQ(a, b);
    EXPECT_LT((a - a.transpose()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Inference, SandwichIsSymmetricPsd) {
    Gen gen(61);
    for (int t = 0; t < 50; ++t) {
        const int p = static_cast<int>(gen.integer(2, 5));
        const Eigen::MatrixXd H = random_spd(gen, p);
        const Eigen::MatrixXd V = random_spd(gen, p);
        const SandwichEstimate s = sandwich(H, V, 1000);
        EXPECT_FALSE(s.h_indefinite);
        EXPECT_FALSE(s.psd_violation);
        EXPECT_LT((s.G_inv - s.G_inv.transpose()).cwiseAbs().maxCoeff(), 1e-12);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.G_inv);
        EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10 * s.G_inv.trace());
        const Eigen::MatrixXd hi = H.inverse();
        EXPECT_LT((s.G_inv - hi * V * hi).norm(), 1e-8 * s.G_inv.norm());
        ASSERT_TRUE(s.se.has_value());
        EXPECT_NEAR((*s.se)(0), std::sqrt(s.G_inv(0, 0) / 1000), 1e-14);
    }
}

TEST(Inference, StandardErrorsShrinkWithRootN) {
    Gen gen(62);
    const Eigen::MatrixXd H = random_spd(gen, 3);
    const Eigen::MatrixXd V = random_spd(gen, 3);
    const Eigen::VectorXd a = *sandwich(H, V, 100).se;
    const Eigen::VectorXd b = *sandwich(H, V, 400).se;
    EXPECT_LT((a - 2 * b).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Inference, IndefiniteHessianUsesPseudoInverse) {
    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(2, 2);
    H(1, 1) = -1.0;
    const SandwichEstimate s = sandwich(H, Eigen::MatrixXd::Identity(2, 2), 10);
    EXPECT_TRUE(s.h_indefinite);
    EXPECT_FALSE(s.diagnostics.empty());
    EXPECT_THROW((void)sandwich(Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(3, 3), 10), DomainError);
}

TEST(Inference, CriteriaPenaltyIsSubtracted) {
    Gen gen(63);
    for (int t = 0; t < 20; ++t) {
        const int p = static_cast<int>(gen.integer(2, 4));
        const Eigen::MatrixXd H = random_spd(gen, p);
        const Eigen::MatrixXd V = random_spd(gen, p);
        const InformationCriteria ic = claic_clbic(-1234.5, V, H, 2000);
        EXPECT_GT(ic.penalty, 0.0);
        EXPECT_NEAR(ic.penalty, (V * H.inverse()).trace(), 1e-9 * ic.penalty);
        EXPECT_NEAR(ic.claic, -1234.5 - ic.penalty, 1e-9);
        EXPECT_NEAR(ic.clbic, -1234.5 - 0.5 * std::log(2000.0) * ic.penalty, 1e-9);
        EXPECT_LT(ic.clbic, ic.claic);
    }
    const InformationCriteria zero = claic_clbic(-10.0, Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Identity(2, 2), 50);
    EXPECT_EQ(zero.claic, -10.0);
    EXPECT_EQ(zero.clbic, -10.0);
    const Eigen::MatrixXd H = random_spd(gen, 3);
    EXPECT_NEAR(claic_clbic(0.0, H, H, 10).penalty, 3.0, 1e-12);
}

TEST(Inference, LongMemoryWithholdsStandardErrors) {
    const Family f = parse_family("nb-gamma");
    const Eigen::VectorXd theta = vec({7.5, 0.7, 0.8, 0.8});
    const CountSeries x = simulate_path(make_model(f, theta, 0.1), 300, 6);
    InferenceOptions opts;
    opts.method = VMethod::Hac;
    const Inference inf = infer(fit_at(f, theta, x, 10), x, opts);
    EXPECT_FALSE(inf.sandwich.se.has_value());
    EXPECT_FALSE(inf.sandwich.se_reason.empty());
    EXPECT_EQ(inf.sandwich.method, "hac(q=7)");

    const Eigen::VectorXd short_theta = vec({7.5, 0.7, 1.7, 0.8});
    const Inference ok = infer(fit_at(f, short_theta, x, 10), x, opts);
    EXPECT_TRUE(ok.sandwich.se.has_value());
}

TEST(Inference, HacAgreesWithSimulationForLongSeries) {
    const Family f = parse_family("poisson-exp");
    const Eigen::VectorXd theta = vec({17.5, 1.8});
    const CountSeries x = simulate_path(make_model(f, theta, 0.1), 20000, 7);
    const Eigen::MatrixXd vh = v_hat_hac(f, x, 1, theta, 60);
    const Eigen::MatrixXd vs = v_hat_sim(f, theta, 0.1, 1, 200, 2000, 8);
    for (int i = 0; i < 2; ++i) EXPECT_NEAR(vh(i, i) / vs(i, i), 1.0, 0.3) << i;
}
