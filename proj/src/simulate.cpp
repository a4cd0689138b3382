#include "ivt/simulate.hpp"

#include "ivt/parallel.hpp"
#include "ivt/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ivt {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// uniform on (0, 1]
double open_uniform(std::mt19937_64& rng) {
    return 1.0 - std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

double ig_depth_from_alpha(const IgTrawl& t, double a) { return 0.5 * t.gamma * t.gamma * (a - 1.0) * (a + 1.0); }

}  // namespace

double sample_depth(const TrawlSpec& trawl, std::mt19937_64& rng) {
    for (;;) {
        const double v = open_uniform(rng);
        const double r = std::visit(
            overloaded{
                [&](const ExpTrawl& t) { return -std::log(v) / t.lambda; },
                [&](const SupExpTrawl& t) {
                    double total = 0.0;
                    for (std::size_t i = 0; i < t.weights.size(); ++i) total += t.weights[i] / t.rates[i];
                    double pick = std::uniform_real_distribution<double>(0.0, total)(rng);
                    std::size_t i = 0;
                    for (; i + 1 < t.weights.size(); ++i) {
                        pick -= t.weights[i] / t.rates[i];
                        if (pick < 0.0) break;
                    }
                    return -std::log(v) / t.rates[i];
                },
                [&](const IgTrawl& t) { return ig_depth_from_alpha(t, 1.0 - std::log(v) / (t.delta * t.gamma)); },
                [&](const GammaTrawl& t) { return t.alpha * std::expm1(-std::log(v) / t.H); },
            },
            trawl);
        if (std::isfinite(r)) return r;
    }
}

double lifetime(const TrawlSpec& trawl, double u, double rel_tol) {
    if (!(u > 0.0)) return std::numeric_limits<double>::infinity();
    const double log_u = std::log(u);
    return std::visit(
        overloaded{
            [&](const ExpTrawl& t) { return std::max(0.0, -log_u / t.lambda); },
            [&](const SupExpTrawl& t) {
                // log height(tau) is convex and decreasing, so Newton from 0 climbs monotonically to the root.
                double tau = 0.0;
                for (int it = 0; it < 200; ++it) {
                    double s = 0.0;
                    double ds = 0.0;
                    for (std::size_t i = 0; i < t.weights.size(); ++i) {
                        const double e = t.weights[i] * std::exp(-t.rates[i] * tau);
                        s += e;
                        ds -= t.rates[i] * e;
                    }
                    const double g = std::log(s) - log_u;
                    if (g <= 0.0) break;
                    const double step = -g * s / ds;
                    tau += step;
                    if (step <= rel_tol * std::max(tau, 1e-300)) break;
                }
                return tau;
            },
            [&](const IgTrawl& t) {
                // log a + delta gamma (a - 1) = -log u, concave and increasing in a.
                const double c = t.delta * t.gamma;
                double a = 1.0;
                for (int it = 0; it < 200; ++it) {
                    const double f = std::log(a) + c * (a - 1.0) + log_u;
                    if (f >= 0.0) break;
                    const double step = -f / (1.0 / a + c);
                    a += step;
                    if (step <= rel_tol * a) break;
                }
                return ig_depth_from_alpha(t, a);
            },
            [&](const GammaTrawl& t) { return t.alpha * std::expm1(-log_u / (t.H + 1.0)); },
        },
        trawl);
}

CountSeries simulate_path(const IvtModel& model, long n, std::mt19937_64& rng, double tail_eps) {
    validate(model);
    if (n < 1) throw DomainError("path length must be at least 1");
    if (!(tail_eps > 0.0) || tail_eps >= 1.0) throw DomainError("tail_eps must lie in (0, 1)");

    const CompoundPoissonRep rep = compound_poisson_rep(model.seed);
    const double delta = model.delta;
    const double d0 = trawl_height(model.trawl, 0.0);
    const auto nd = static_cast<double>(n);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    // diff[i] accumulates marks entering at observation i (0-based), diff[i+1..] removal
    std::vector<long> diff(static_cast<std::size_t>(n) + 1, 0);
    auto add_point = [&](long first, double death, long mark) {
        // alive at observation times i * delta (1-based i) with i >= first and i * delta < death
        const double last_real = std::ceil(death / delta) - 1.0;
        const long last = last_real >= nd ? n : static_cast<long>(last_real);
        if (last < first || first > n) return;
        diff[static_cast<std::size_t>(first - 1)] += mark;
        diff[static_cast<std::size_t>(last)] -= mark;
    };

    // points alive at the first observation time delta
    std::poisson_distribution<long> initial(rep.total_intensity * leb_full(model.trawl));
    const long n_initial = initial(rng);
    for (long j = 0; j < n_initial; ++j) {
        const double r = sample_depth(model.trawl, rng);
        const double u = unif(rng) * trawl_height(model.trawl, r);
        const long mark = sample_mark(rep, rng);
        const double tau = std::max(lifetime(model.trawl, u, tail_eps), r);
        add_point(1, delta - r + tau, mark);
    }

    // points born in (delta, n delta]
    if (n > 1) {
        std::poisson_distribution<long> arrivals(rep.total_intensity * d0 * (nd - 1.0) * delta);
        const long n_new = arrivals(rng);
        for (long j = 0; j < n_new; ++j) {
            const double s = delta * (1.0 + (nd - 1.0) * (1.0 - unif(rng)));
            const double u = unif(rng) * d0;
            const long mark = sample_mark(rep, rng);
            const double tau = lifetime(model.trawl, u, tail_eps);
            const long first = std::clamp(static_cast<long>(std::ceil(s / delta - 1e-12)), 2L, n);
            add_point(first, s + tau, mark);
        }
    }

    CountSeries out;
    out.delta = delta;
    out.origin = delta;
    out.values.resize(static_cast<std::size_t>(n));
    long running = 0;
    for (long i = 0; i < n; ++i) {
        running += diff[static_cast<std::size_t>(i)];
        out.values[static_cast<std::size_t>(i)] = running;
    }
    return out;
}

CountSeries simulate_path(const IvtModel& model, long n, std::uint64_t rng_seed, double tail_eps) {
    std::mt19937_64 rng(splitmix64(rng_seed));
    return simulate_path(model, n, rng, tail_eps);
}

std::vector<CountSeries> simulate_paths(const IvtModel& model, long n, long B, std::uint64_t master_seed,
                                        int workers) {
    std::vector<CountSeries> paths(static_cast<std::size_t>(std::max(0L, B)));
    parallel_for(B, workers, [&](long b) {
        std::mt19937_64 rng = make_stream(master_seed, static_cast<std::uint64_t>(b));
        paths[static_cast<std::size_t>(b)] = simulate_path(model, n, rng);
    });
    return paths;
}

}  // namespace ivt
