#include "generators.hpp"

#include "ivt/errors.hpp"
#include "ivt/levy_seed.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace ivt;
using ivt::testing::Gen;

namespace {

// Plain-formula PMFs used as an independent reference.
double direct_negbin(double size, double p, long x) {
    return std::tgamma(size + x) / (std::tgamma(size) * std::tgamma(x + 1.0)) * std::pow(p, x) * std::pow(1 - p, size);
}

double direct_skellam(double a, double b, long k) {
    return std::exp(-(a + b)) * std::pow(a / b, 0.5 * k) * std::cyl_bessel_i(static_cast<double>(std::labs(k)), 2 * std::sqrt(a * b));
}

std::vector<double> pmf_vector(const LevySeed& s, double leb, long lo, long hi) {
    std::vector<double> out;
    for (long x = lo; x <= hi; ++x) out.push_back(pmf_on_set(s, leb, x));
    return out;
}

}  // namespace

TEST(LevySeed, PoissonUnitSetAtZero) {
    EXPECT_NEAR(pmf_on_set(PoissonSeed{1.0}, 1.0, 0), std::exp(-1.0), 1e-15);
    EXPECT_NEAR(pmf_on_set(PoissonSeed{1.0}, 1.0, 0), 0.3678794, 1e-7);
}

TEST(LevySeed, EmptySetIsPointMassAtZero) {
    for (const LevySeed& s : {LevySeed(PoissonSeed{3}), LevySeed(NegBinSeed{2, 0.4}), LevySeed(SkellamSeed{1, 2})}) {
        EXPECT_EQ(pmf_on_set(s, 0.0, 0), 1.0);
        EXPECT_EQ(pmf_on_set(s, 0.0, 1), 0.0);
        EXPECT_EQ(pmf_on_set(s, 0.0, -1), 0.0);
    }
}

TEST(LevySeed, NegativeMeasureIsDomainError) {
    EXPECT_THROW((void)pmf_on_set(PoissonSeed{1.0}, -0.1, 0), DomainError);
    EXPECT_THROW((void)pmf_on_set(SkellamSeed{1.0, 1.0}, -1e-9, 0), DomainError);
}

TEST(LevySeed, NanMeasureIsEvaluationError) {
    EXPECT_THROW((void)pmf_on_set(NegBinSeed{1.0, 0.5}, std::nan(""), 2), EvaluationError);
}

TEST(LevySeed, InvalidParametersRejected) {
    EXPECT_THROW(validate(LevySeed(PoissonSeed{0.0})), DomainError);
    EXPECT_THROW(validate(LevySeed(NegBinSeed{1.0, 1.0})), DomainError);
    EXPECT_THROW(validate(LevySeed(NegBinSeed{-1.0, 0.5})), DomainError);
    EXPECT_THROW(validate(LevySeed(SkellamSeed{1.0, 0.0})), DomainError);
    EXPECT_NO_THROW(validate(LevySeed(SkellamSeed{1.0, 0.5})));
}

TEST(LevySeed, OutsideSupportHasZeroMass) {
    EXPECT_EQ(pmf_on_set(PoissonSeed{2.0}, 1.0, -1), 0.0);
    EXPECT_EQ(pmf_on_set(NegBinSeed{2.0, 0.3}, 1.0, -3), 0.0);
    EXPECT_GT(pmf_on_set(SkellamSeed{2.0, 1.0}, 1.0, -3), 0.0);
}

TEST(LevySeed, NegBinMatchesGammaFormula) {
    const NegBinSeed s{7.5, 0.7};
    const double leb = 0.5556;
    for (long x = 0; x <= 30; ++x) {
        EXPECT_NEAR(pmf_on_set(s, leb, x), direct_negbin(7.5 * leb, 0.7, x), 1e-13) << x;
    }
}

TEST(LevySeed, NegBinMatchesMonteCarlo) {
    const LevySeed s = NegBinSeed{7.5, 0.7};
    const double leb = 0.5556;
    const CompoundPoissonRep rep = compound_poisson_rep(s);
    std::mt19937_64 rng(42);
    const long draws = 1'000'000;
    long hits = 0;
    for (long i = 0; i < draws; ++i) hits += sample_on_set(rep, leb, rng) == 3 ? 1 : 0;
    const double p = pmf_on_set(s, leb, 3);
    const double se = std::sqrt(p * (1 - p) / draws);
    EXPECT_NEAR(static_cast<double>(hits) / draws, p, 3 * se);
}

TEST(LevySeed, SkellamMatchesBesselFormula) {
    const SkellamSeed s{2.0, 0.7};
    for (long k = -10; k <= 12; ++k) {
        EXPECT_NEAR(pmf_on_set(s, 1.3, k), direct_skellam(2.6, 0.91, k), 1e-14) << k;
    }
}

TEST(LevySeed, SkellamLargeArgumentsStayFinite) {
    const SkellamSeed s{800.0, 750.0};
    double total = 0.0;
    for (long k = -400; k <= 500; ++k) {
        const double p = pmf_on_set(s, 1.0, k);
        ASSERT_TRUE(std::isfinite(p));
        total += p;
    }
    EXPECT_NEAR(total, 1.0, 1e-10);
}

TEST(LevySeed, LogBesselMatchesStandardLibrary) {
    for (long nu : {0L, 1L, 3L, 10L, 40L}) {
        for (double z : {0.01, 0.5, 2.0, 10.0, 50.0, 300.0}) {
            const double ref = std::log(std::cyl_bessel_i(static_cast<double>(nu), z));
            EXPECT_NEAR(log_bessel_i(nu, z), ref, 1e-11 * std::max(1.0, std::abs(ref))) << nu << " " << z;
        }
    }
    EXPECT_TRUE(std::isfinite(log_bessel_i(5, 1e5)));
}

TEST(LevySeed, CumulantExamples) {
    EXPECT_EQ(cumulant(PoissonSeed{5.0}, 2), 5.0);
    EXPECT_EQ(cumulant(SkellamSeed{2.0, 2.0}, 1), 0.0);
    EXPECT_NEAR(cumulant(NegBinSeed{7.5, 0.7}, 1), 17.5, 1e-12);
    EXPECT_NEAR(cumulant(NegBinSeed{7.5, 0.7}, 2), 7.5 * 0.7 / 0.09, 1e-10);
    EXPECT_EQ(cumulant(SkellamSeed{3.0, 1.0}, 3), 2.0);
    EXPECT_EQ(cumulant(SkellamSeed{3.0, 1.0}, 4), 4.0);
    EXPECT_THROW((void)cumulant(PoissonSeed{1.0}, 5), DomainError);
    EXPECT_THROW((void)cumulant(PoissonSeed{1.0}, 0), DomainError);
}

TEST(LevySeed, CumulantsMatchPmfMoments) {
    Gen gen(11);
    for (int t = 0; t < 30; ++t) {
        const LevySeed s = gen.seed();
        const auto [lo, hi] = support_window(s, 1.0, 1e-15);
        double m[5] = {0, 0, 0, 0, 0};
        for (long x = lo; x <= hi; ++x) {
            const double p = pmf_on_set(s, 1.0, x);
            for (int j = 1; j <= 4; ++j) m[j] += p * std::pow(static_cast<double>(x), j);
        }
        const double k1 = m[1];
        const double c2 = m[2] - k1 * k1;
        const double c3 = m[3] - 3 * k1 * m[2] + 2 * k1 * k1 * k1;
        const double c4raw = m[4] - 4 * k1 * m[3] + 6 * k1 * k1 * m[2] - 3 * std::pow(k1, 4);
        const double k4 = c4raw - 3 * c2 * c2;
        EXPECT_NEAR(cumulant(s, 1), k1, 1e-8 * std::max(1.0, std::abs(k1)));
        EXPECT_NEAR(cumulant(s, 2), c2, 1e-7 * std::max(1.0, c2));
        EXPECT_NEAR(cumulant(s, 3), c3, 1e-6 * std::max(1.0, std::abs(c3)));
        EXPECT_NEAR(cumulant(s, 4), k4, 1e-5 * std::max(1.0, std::abs(k4)));
    }
}

TEST(LevySeed, CumulantGradientMatchesFiniteDifferences) {
    Gen gen(12);
    for (int t = 0; t < 20; ++t) {
        const LevySeed s = gen.seed();
        const Eigen::VectorXd theta = parameters(s);
        for (int order = 1; order <= 4; ++order) {
            auto f = [&](const Eigen::VectorXd& th) {
                LevySeed c = s;
                if (auto* p = std::get_if<PoissonSeed>(&c)) p->nu = th(0);
                if (auto* p = std::get_if<NegBinSeed>(&c)) *p = {th(0), th(1)};
                if (auto* p = std::get_if<SkellamSeed>(&c)) *p = {th(0), th(1)};
                return cumulant(c, order);
            };
            const Eigen::VectorXd g = cumulant_gradient(s, order);
            const Eigen::VectorXd fd = ivt::testing::numeric_gradient(f, theta, 1e-5);
            EXPECT_LT((g - fd).cwiseAbs().maxCoeff(), 1e-6 * std::max(1.0, fd.cwiseAbs().maxCoeff()));
        }
    }
}

TEST(LevySeed, NormalizationOverSupportWindow) {
    Gen gen(13);
    for (int t = 0; t < 60; ++t) {
        const LevySeed s = gen.seed();
        const double leb = gen.uniform(0.01, 5.0);
        const auto [lo, hi] = support_window(s, leb, 1e-12);
        double total = 0.0;
        for (long x = lo; x <= hi; ++x) total += pmf_on_set(s, leb, x);
        EXPECT_NEAR(total, 1.0, 1e-10);
        EXPECT_LE(lo, hi);
        if (is_nonnegative(s)) EXPECT_GE(lo, 0);
    }
}

TEST(LevySeed, AdditivityUnderConvolution) {
    for (const LevySeed& s : {LevySeed(PoissonSeed{4.0}), LevySeed(NegBinSeed{3.0, 0.6}), LevySeed(SkellamSeed{3.0, 2.0})}) {
        const long lo = is_nonnegative(s) ? 0 : -60;
        const std::vector<double> half = pmf_vector(s, 0.5, lo, 90);
        for (long x = 0; x <= 30; ++x) {
            double conv = 0.0;
            for (long a = lo; a <= 90; ++a) {
                const long b = x - a;
                if (b < lo || b > 90) continue;
                conv += half[static_cast<std::size_t>(a - lo)] * half[static_cast<std::size_t>(b - lo)];
            }
            EXPECT_NEAR(conv, pmf_on_set(s, 1.0, x), 1e-10) << x;
        }
    }
}

TEST(LevySeed, ComponentTableDerivatives) {
    Gen gen(14);
    for (int t = 0; t < 20; ++t) {
        const LevySeed s = gen.seed();
        const double leb = gen.uniform(0.2, 3.0);
        const auto [lo, hi] = support_window(s, leb, 1e-6);
        const ComponentTable tab = component_table(s, leb, lo, hi, true);
        ASSERT_EQ(tab.dlog_p.cols(), 1 + parameter_count(s));
        for (long x = lo; x <= hi; x += std::max(1L, (hi - lo) / 5)) {
            EXPECT_NEAR(tab.log_at(x), log_pmf_on_set(s, leb, x), 1e-12);
            Eigen::VectorXd arg(1 + parameter_count(s));
            arg << leb, parameters(s);
            auto f = [&](const Eigen::VectorXd& a) {
                LevySeed c = s;
                if (auto* p = std::get_if<PoissonSeed>(&c)) p->nu = a(1);
                if (auto* p = std::get_if<NegBinSeed>(&c)) *p = {a(1), a(2)};
                if (auto* p = std::get_if<SkellamSeed>(&c)) *p = {a(1), a(2)};
                return log_pmf_on_set(c, a(0), x);
            };
            const Eigen::VectorXd fd = ivt::testing::numeric_gradient(f, arg, 1e-5);
            const Eigen::VectorXd an = tab.dlog_p.row(x - tab.lo).transpose();
            EXPECT_LT((an - fd).cwiseAbs().maxCoeff(), 1e-6 * std::max(1.0, fd.cwiseAbs().maxCoeff())) << x;
        }
    }
}

TEST(LevySeed, CompoundPoissonExamples) {
    const CompoundPoissonRep p = compound_poisson_rep(PoissonSeed{5.0});
    EXPECT_EQ(p.total_intensity, 5.0);
    EXPECT_EQ(mark_pmf(p, 1), 1.0);
    EXPECT_EQ(mark_pmf(p, 2), 0.0);

    const CompoundPoissonRep sk = compound_poisson_rep(SkellamSeed{1.0, 1.0});
    EXPECT_EQ(sk.total_intensity, 2.0);
    EXPECT_EQ(mark_pmf(sk, 1), 0.5);
    EXPECT_EQ(mark_pmf(sk, -1), 0.5);
    EXPECT_EQ(mark_pmf(sk, 0), 0.0);

    const CompoundPoissonRep nb = compound_poisson_rep(NegBinSeed{2.0, 0.5});
    EXPECT_NEAR(nb.total_intensity, 2.0 * std::log(2.0), 1e-15);
    EXPECT_NEAR(nb.total_intensity, 1.3863, 1e-4);
    EXPECT_EQ(mark_pmf(nb, 0), 0.0);
}

TEST(LevySeed, MarkLawsAreNormalized) {
    Gen gen(15);
    for (int t = 0; t < 20; ++t) {
        const CompoundPoissonRep rep = compound_poisson_rep(gen.seed());
        double total = 0.0;
        for (long y = -2000; y <= 2000; ++y) total += mark_pmf(rep, y);
        EXPECT_NEAR(total, 1.0, 1e-10);
    }
}

TEST(LevySeed, CompoundPoissonReproducesNegBinPmf) {
    const LevySeed s = NegBinSeed{2.0, 0.5};
    const CompoundPoissonRep rep = compound_poisson_rep(s);
    std::mt19937_64 rng(7);
    const long draws = 1'000'000;
    std::vector<long> counts(11, 0);
    for (long i = 0; i < draws; ++i) {
        const long v = sample_on_set(rep, 1.0, rng);
        if (v <= 10) ++counts[static_cast<std::size_t>(v)];
    }
    double tv = 0.0;
    for (long x = 0; x <= 10; ++x) {
        const double p = pmf_on_set(s, 1.0, x);
        const double f = static_cast<double>(counts[static_cast<std::size_t>(x)]) / draws;
        tv += 0.5 * std::abs(f - p);
        EXPECT_NEAR(f, p, 3 * std::sqrt(p * (1 - p) / draws) + 1e-12) << x;
    }
    EXPECT_LT(tv, 0.01);
}

TEST(LevySeed, CompoundPoissonReproducesSkellamPmf) {
    const LevySeed s = SkellamSeed{1.5, 0.8};
    const CompoundPoissonRep rep = compound_poisson_rep(s);
    std::mt19937_64 rng(8);
    const long draws = 400'000;
    std::vector<long> counts(21, 0);
    for (long i = 0; i < draws; ++i) {
        const long v = sample_on_set(rep, 0.7, rng);
        if (v >= -10 && v <= 10) ++counts[static_cast<std::size_t>(v + 10)];
    }
    for (long x = -3; x <= 4; ++x) {
        const double p = pmf_on_set(s, 0.7, x);
        const double f = static_cast<double>(counts[static_cast<std::size_t>(x + 10)]) / draws;
        EXPECT_NEAR(f, p, 3.5 * std::sqrt(p * (1 - p) / draws)) << x;
    }
}
