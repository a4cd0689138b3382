#include "generators.hpp"

#include "ivt/errors.hpp"
#include "ivt/simulate.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numeric>

using namespace ivt;
using ivt::testing::Gen;

namespace {

double sample_mean(const std::vector<long>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_acf(const std::vector<long>& v, std::size_t k) {
    const double m = sample_mean(v);
    double c0 = 0.0;
    double ck = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        c0 += (v[i] - m) * (v[i] - m);
        if (i + k < v.size()) ck += (v[i] - m) * (v[i + k] - m);
    }
    return ck / c0;
}

// Pearson statistic of draws against the marginal, pooling cells with expected count < 5.
// Returns (statistic, degrees of freedom).
std::pair<double, int> chi_square(const LevySeed& seed, double leb, const std::map<long, long>& counts, long total) {
    const auto [lo, hi] = support_window(seed, leb, 1e-12);
    double stat = 0.0;
    int cells = 0;
    double pooled_e = 0.0;
    long pooled_o = 0;
    for (long x = lo; x <= hi; ++x) {
        const double e = total * pmf_on_set(seed, leb, x);
        const auto it = counts.find(x);
        const long o = it == counts.end() ? 0 : it->second;
        if (e < 5.0) {
            pooled_e += e;
            pooled_o += o;
            continue;
        }
        stat += (o - e) * (o - e) / e;
        ++cells;
    }
    if (pooled_e > 0.0) {
        stat += (pooled_o - pooled_e) * (pooled_o - pooled_e) / pooled_e;
        ++cells;
    }
    return {stat, cells - 1};
}

// Upper 0.001 quantile of chi-square(df), Wilson-Hilferty.
double chi_square_crit(int df) {
    const double z = 3.090232;
    const double a = 2.0 / (9.0 * df);
    return df * std::pow(1.0 - a + z * std::sqrt(a), 3);
}

}  // namespace

TEST(Simulate, Errors) {
    const IvtModel m{PoissonSeed{1.0}, ExpTrawl{1.0}, 1.0};
    EXPECT_THROW((void)simulate_path(m, 0, 1), DomainError);
    EXPECT_THROW((void)simulate_path(m, 10, 1, 1.0), DomainError);
    EXPECT_THROW((void)simulate_path(m, 10, 1, 0.0), DomainError);
}

TEST(Simulate, DeterministicGivenSeed) {
    Gen gen(41);
    for (int t = 0; t < 10; ++t) {
        const IvtModel m = gen.model();
        const CountSeries a = simulate_path(m, 300, 1234 + t);
        const CountSeries b = simulate_path(m, 300, 1234 + t);
        EXPECT_EQ(a.values, b.values);
        EXPECT_EQ(a.delta, m.delta);
        EXPECT_EQ(a.origin, m.delta);
        ASSERT_EQ(a.size(), 300);
    }
}

TEST(Simulate, BatchesUseIndependentStreams) {
    const IvtModel m{NegBinSeed{2.0, 0.4}, GammaTrawl{1.5, 0.7}, 0.2};
    const auto one = simulate_paths(m, 100, 4, 99, 1);
    const auto many = simulate_paths(m, 100, 4, 99, 3);
    ASSERT_EQ(one.size(), 4u);
    for (std::size_t b = 0; b < 4; ++b) EXPECT_EQ(one[b].values, many[b].values);
    EXPECT_NE(one[0].values, one[1].values);
}

TEST(Simulate, SingleObservationFollowsMarginal) {
    const std::vector<IvtModel> models = {
        {PoissonSeed{3.0}, ExpTrawl{1.2}, 0.5},
        {NegBinSeed{2.5, 0.6}, IgTrawl{1.0, 0.8}, 0.1},
        {SkellamSeed{2.0, 1.5}, SupExpTrawl{{0.4, 0.6}, {0.5, 2.0}}, 0.3},
        {NegBinSeed{1.5, 0.3}, GammaTrawl{1.7, 0.8}, 0.1},
    };
    const long reps = 100000;
    for (const IvtModel& m : models) {
        std::mt19937_64 rng(77);
        std::map<long, long> counts;
        for (long r = 0; r < reps; ++r) ++counts[simulate_path(m, 1, rng).values[0]];
        const auto [stat, df] = chi_square(m.seed, leb_full(m.trawl), counts, reps);
        EXPECT_LT(stat, chi_square_crit(df)) << "df " << df;
    }
}

TEST(Simulate, PoissonExpMeanAndAcf) {
    const IvtModel m{PoissonSeed{17.5}, ExpTrawl{1.8}, 0.1};
    const CountSeries x = simulate_path(m, 100000, 2024);
    const double mean = sample_mean(x.values);
    const double mu = 17.5 / 1.8;
    // long-run variance of the mean: var * (1 + rho) / (1 - rho) with rho = exp(-0.18)
    const double rho = std::exp(-0.18);
    const double se = std::sqrt(mu * (1 + rho) / (1 - rho) / 1e5);
    EXPECT_NEAR(mean, 9.7222, 3 * se);
    // twice the Bartlett sd, leaving room for the fourth-cumulant term
    const double se_acf = 2.0 * std::sqrt((1 - rho * rho) / 1e5);
    EXPECT_NEAR(sample_acf(x.values, 1), 0.83527, 3 * se_acf);
}

TEST(Simulate, LifetimeInvertsTrawlHeight) {
    Gen gen(42);
    for (int t = 0; t < 200; ++t) {
        const TrawlSpec tr = gen.trawl();
        const double u = gen.uniform(0.001, 0.999) * trawl_height(tr, 0.0);
        const double tau = lifetime(tr, u);
        EXPECT_NEAR(trawl_height(tr, tau), u, 1e-9 * std::max(u, 1e-3));
    }
}

TEST(Simulate, SampleDepthSurvivalIsAcf) {
    Gen gen(43);
    for (int kind = 0; kind < 4; ++kind) {
        const TrawlSpec tr = gen.trawl(kind);
        std::mt19937_64 rng(5);
        const long draws = 200000;
        const std::vector<double> probes = {0.1, 0.5, 1.0, 3.0};
        std::vector<long> above(probes.size(), 0);
        for (long i = 0; i < draws; ++i) {
            const double r = sample_depth(tr, rng);
            ASSERT_GE(r, 0.0);
            for (std::size_t j = 0; j < probes.size(); ++j) above[j] += r > probes[j];
        }
        for (std::size_t j = 0; j < probes.size(); ++j) {
            const double p = acf(tr, probes[j]);
            const double se = std::sqrt(p * (1 - p) / draws) + 1e-12;
            EXPECT_NEAR(static_cast<double>(above[j]) / draws, p, 4 * se) << "kind " << kind << " r " << probes[j];
        }
    }
}

TEST(Simulate, TailToleranceDoesNotShiftMoments) {
    const IvtModel m{NegBinSeed{3.0, 0.5}, IgTrawl{1.0, 0.5}, 0.1};
    const CountSeries a = simulate_path(m, 50000, 8, 1e-4);
    const CountSeries b = simulate_path(m, 50000, 9, 1e-8);
    const double mu = cumulant(m.seed, 1) * leb_full(m.trawl);
    const double var = cumulant(m.seed, 2) * leb_full(m.trawl);
    // generous long-run variance bound from the sum of the acf over 2000 lags
    double lrv = 1.0;
    for (int k = 1; k < 2000; ++k) lrv += 2 * acf(m.trawl, k * m.delta);
    const double se = std::sqrt(var * lrv / 50000.0);
    EXPECT_NEAR(sample_mean(a.values), mu, 4 * se);
    EXPECT_NEAR(sample_mean(b.values), mu, 4 * se);
    EXPECT_NEAR(sample_mean(a.values) - sample_mean(b.values), 0.0, 4 * std::sqrt(2.0) * se);
}

TEST(Simulate, NonnegativeSeedsGiveNonnegativePaths) {
    Gen gen(44);
    for (int t = 0; t < 20; ++t) {
        const IvtModel m = gen.nonnegative_model();
        const CountSeries x = simulate_path(m, 500, 300 + t);
        EXPECT_GE(*std::min_element(x.values.begin(), x.values.end()), 0);
    }
}
