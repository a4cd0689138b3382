#include "ivt/forecast.hpp"

#include "ivt/math.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ivt {

Eigen::VectorXd overlap_conditional(const IvtModel& model, double h, long x_t) {
    validate(model);
    if (x_t < 0) throw DomainError("conditioning value must be a nonnegative count");
    if (!(h > 0.0)) throw DomainError("forecast horizon must be positive");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(x_t + 1);
    const double shared = leb_intersection(model.trawl, h);
    const double fresh = leb_difference(model.trawl, h);
    if (shared <= 0.0) {
        out(0) = 1.0;
        return out;
    }
    if (const auto* poi = std::get_if<PoissonSeed>(&model.seed)) {
        (void)poi;
        const double rho = acf(model.trawl, h);
        const double log_rho = std::log(rho);
        const double log_rest = std::log1p(-rho);
        for (long l = 0; l <= x_t; ++l) {
            const double lp = math::log_binomial(x_t, l) + static_cast<double>(l) * log_rho +
                              (x_t - l == 0 ? 0.0 : static_cast<double>(x_t - l) * log_rest);
            out(l) = std::exp(lp);
        }
        return out;
    }
    if (const auto* nb = std::get_if<NegBinSeed>(&model.seed)) {
        const double a1 = fresh * nb->m;
        const double a2 = shared * nb->m;
        const double a = a1 + a2;
        for (long l = 0; l <= x_t; ++l) {
            const auto ld = static_cast<double>(l);
            const auto rd = static_cast<double>(x_t - l);
            double lp = math::log_binomial(x_t, l) + std::lgamma(a2 + ld) - std::lgamma(a2) + std::lgamma(a) -
                        std::lgamma(a + static_cast<double>(x_t));
            if (x_t - l > 0) lp += a1 > 0.0 ? std::lgamma(a1 + rd) - std::lgamma(a1) : math::kNegInf;
            out(l) = std::exp(lp);
        }
        return out;
    }
    throw DomainError("predictive distributions require a nonnegative (Poisson or NB) seed");
}

PredictivePmf predictive_pmf(const IvtModel& model, double h, long x_t, long M_cap) {
    if (M_cap < 0) throw DomainError("predictive cap must be nonnegative");
    const Eigen::VectorXd w = overlap_conditional(model, h, x_t);
    const double fresh = leb_difference(model.trawl, h);
    Eigen::VectorXd log_new(M_cap + 1);
    for (long k = 0; k <= M_cap; ++k) log_new(k) = log_pmf_on_set(model.seed, fresh, k);
    PredictivePmf out;
    out.h = h;
    out.x_t = x_t;
    out.p = Eigen::VectorXd::Zero(M_cap + 1);
    for (long k = 0; k <= M_cap; ++k) {
        double acc = 0.0;
        for (long c = 0; c <= std::min(k, x_t); ++c) {
            if (w(c) > 0.0) acc += w(c) * std::exp(log_new(k - c));
        }
        out.p(k) = acc;
    }
    return out;
}

PointRule parse_point_rule(const std::string& name) {
    if (name == "mean") return PointRule::Mean;
    if (name == "mode") return PointRule::Mode;
    if (name == "median") return PointRule::Median;
    throw DomainError("point rule must be mean, mode or median");
}

double point_forecast(const PredictivePmf& pmf, PointRule rule) {
    switch (rule) {
        case PointRule::Mean: {
            double m = 0.0;
            for (long k = 0; k <= pmf.cap(); ++k) m += static_cast<double>(k) * pmf.p(k);
            return m;
        }
        case PointRule::Mode: {
            long best = 0;
            for (long k = 1; k <= pmf.cap(); ++k) {
                if (pmf.p(k) > pmf.p(best)) best = k;
            }
            return static_cast<double>(best);
        }
        case PointRule::Median: return static_cast<double>(predictive_quantile(pmf, 0.5));
    }
    return 0.0;
}

long predictive_quantile(const PredictivePmf& pmf, double level) {
    double cdf = 0.0;
    for (long k = 0; k <= pmf.cap(); ++k) {
        cdf += pmf.p(k);
        if (cdf >= level) return k;
    }
    return pmf.cap() + 1;
}

}  // namespace ivt
