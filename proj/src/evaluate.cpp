#include "ivt/evaluate.hpp"

#include "ivt/math.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace ivt {

namespace {

constexpr double kProbFloor = 1e-300;

LossTerms missing_terms() {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan, nan, nan, false};
}

}  // namespace

double ranked_probability_score(const PredictivePmf& pmf, long realized) {
    double cdf = 0.0;
    double total = 0.0;
    // past the cap the cdf stays flat until the realized value is reached
    for (long k = 0; k <= std::max(pmf.cap(), realized); ++k) {
        if (k <= pmf.cap()) cdf += pmf.p(k);
        const double gap = cdf - (realized <= k ? 1.0 : 0.0);
        total += gap * gap;
    }
    return total;
}

double log_score(const PredictivePmf& pmf, long realized, bool* floored) {
    double p = (realized >= 0 && realized <= pmf.cap()) ? pmf.p(realized) : 0.0;
    const bool low = !(p >= kProbFloor);
    if (floored) *floored = low;
    if (low) p = kProbFloor;
    return -std::log(p);
}

LossTerms forecast_losses(const PredictivePmf& pmf, double point, long realized) {
    LossTerms t;
    const double err = static_cast<double>(realized) - point;
    t.abs_error = std::abs(err);
    t.sq_error = err * err;
    t.log_score = log_score(pmf, realized, &t.floored);
    t.rps = ranked_probability_score(pmf, realized);
    return t;
}

LossSummary summarize(const std::vector<LossTerms>& terms) {
    LossSummary s;
    for (const auto& t : terms) {
        if (std::isnan(t.log_score)) continue;
        s.mae += t.abs_error;
        s.mse += t.sq_error;
        s.logs += t.log_score;
        s.rps += t.rps;
        s.floored += t.floored ? 1 : 0;
        ++s.count;
    }
    if (s.count > 0) {
        const auto c = static_cast<double>(s.count);
        s.mae /= c;
        s.mse /= c;
        s.logs /= c;
        s.rps /= c;
    } else {
        s.mae = s.mse = s.logs = s.rps = std::numeric_limits<double>::quiet_NaN();
    }
    return s;
}

const char* metric_name(LossMetric metric) {
    switch (metric) {
        case LossMetric::MAE: return "MAE";
        case LossMetric::MSE: return "MSE";
        case LossMetric::LogS: return "logS";
        case LossMetric::RPS: return "RPS";
    }
    return "";
}

std::vector<double> metric_series(const std::vector<LossTerms>& terms, LossMetric metric) {
    std::vector<double> out;
    out.reserve(terms.size());
    for (const auto& t : terms) {
        switch (metric) {
            case LossMetric::MAE: out.push_back(t.abs_error); break;
            case LossMetric::MSE: out.push_back(t.sq_error); break;
            case LossMetric::LogS: out.push_back(t.log_score); break;
            case LossMetric::RPS: out.push_back(t.rps); break;
        }
    }
    return out;
}

DmResult diebold_mariano(const std::vector<double>& loss_a, const std::vector<double>& loss_b, int h) {
    if (loss_a.size() != loss_b.size()) throw DomainError("loss series must have equal length");
    if (h < 1) throw DomainError("forecast horizon must be at least 1");
    std::vector<double> d;
    for (std::size_t i = 0; i < loss_a.size(); ++i) {
        if (std::isnan(loss_a[i]) || std::isnan(loss_b[i])) continue;
        d.push_back(loss_a[i] - loss_b[i]);
    }
    DmResult out;
    const auto n = static_cast<long>(d.size());
    if (n < 2) {
        out.defined = false;
        out.statistic = out.p_value = std::numeric_limits<double>::quiet_NaN();
        out.note = "fewer than two loss differentials";
        return out;
    }
    double mean = 0.0;
    for (double v : d) mean += v;
    mean /= static_cast<double>(n);
    auto autocov = [&](long j) {
        double acc = 0.0;
        for (long i = 0; i + j < n; ++i) acc += (d[static_cast<std::size_t>(i)] - mean) * (d[static_cast<std::size_t>(i + j)] - mean);
        return acc / static_cast<double>(n);
    };
    double lrv = autocov(0);
    for (long j = 1; j <= h - 1 && j < n; ++j) lrv += 2.0 * (1.0 - static_cast<double>(j) / h) * autocov(j);
    if (!(lrv > 0.0)) {
        bool all_zero = true;
        for (double v : d) all_zero = all_zero && v == 0.0;
        if (all_zero) {
            out.note = "identical losses; statistic set to 0";
            return out;
        }
        out.defined = false;
        out.statistic = out.p_value = std::numeric_limits<double>::quiet_NaN();
        out.note = "loss differential has zero long-run variance";
        return out;
    }
    out.statistic = mean / std::sqrt(lrv / static_cast<double>(n));
    out.p_value = math::normal_sf(out.statistic);
    return out;
}

BacktestResult backtest(const std::vector<Family>& families, const CountSeries& x, const BacktestConfig& config) {
    const long n = x.size();
    if (config.stride < 1) throw DomainError("re-fit stride must be at least 1");
    if (config.h_max < 1) throw DomainError("maximum horizon must be at least 1");
    if (config.n1 < 2 || config.n1 + config.h_max >= n) throw DomainError("need 2 <= n1 and n1 + h_max < n");
    BacktestResult result;
    result.origins = n - config.h_max - config.n1;
    for (const Family& family : families) {
        ModelBacktest mb;
        mb.family = family;
        mb.terms.assign(static_cast<std::size_t>(config.h_max), {});
        std::optional<Eigen::VectorXd> theta;
        for (long j = 0; j < result.origins; ++j) {
            const long t = config.n1 + j;  // in-sample observations x_1..x_t
            if (j % config.stride == 0) {
                CountSeries window;
                window.delta = x.delta;
                window.origin = x.origin;
                window.values.assign(x.values.begin(), x.values.begin() + t);
                FitOptions opts;
                opts.K = config.K;
                opts.init = theta;
                try {
                    FitResult fit = fit_mcl(family, window, opts);
                    if (!fit.converged && theta) {
                        // a warm start that stalls gets one fresh attempt
                        opts.init.reset();
                        FitResult fresh = fit_mcl(family, window, opts);
                        if (fresh.converged || fresh.cl > fit.cl) fit = std::move(fresh);
                    }
                    ++mb.refits;
                    if (!fit.converged) {
                        mb.all_converged = false;
                        mb.diagnostics.push_back("fit at origin " + std::to_string(t) + " did not converge");
                    }
                    theta = fit.theta;
                } catch (const std::exception& e) {
                    mb.all_converged = false;
                    mb.diagnostics.push_back("fit at origin " + std::to_string(t) + " failed: " + e.what() +
                                             (theta ? "; previous estimate kept" : "; origins skipped"));
                }
            }
            const long x_t = x.values[static_cast<std::size_t>(t - 1)];
            for (int h = 1; h <= config.h_max; ++h) {
                auto& slot = mb.terms[static_cast<std::size_t>(h - 1)];
                if (!theta) {
                    slot.push_back(missing_terms());
                    continue;
                }
                const IvtModel model = make_model(family, *theta, x.delta);
                const PredictivePmf pmf = predictive_pmf(model, h * x.delta, x_t, config.M_cap);
                const long realized = x.values[static_cast<std::size_t>(t - 1 + h)];
                slot.push_back(forecast_losses(pmf, point_forecast(pmf, config.rule), realized));
            }
        }
        for (const auto& per_h : mb.terms) mb.summary.push_back(summarize(per_h));
        result.models.push_back(std::move(mb));
    }
    return result;
}

}  // namespace ivt
