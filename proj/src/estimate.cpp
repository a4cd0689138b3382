#include "ivt/estimate.hpp"

#include "ivt/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace ivt {

namespace {

constexpr double kEtaBound = 30.0;
constexpr double kBoundaryFlag = 25.0;

Eigen::VectorXd default_trawl(Family family) {
    switch (family.trawl) {
        case TrawlKind::Exp: return Eigen::VectorXd{{1.0}};
        case TrawlKind::SupExp: return Eigen::VectorXd{{0.5, 0.5, 2.0}};
        case TrawlKind::Ig: return Eigen::VectorXd{{1.0, 1.0}};
        case TrawlKind::Gamma: return Eigen::VectorXd{{2.0, 1.0}};
    }
    return {};
}

Eigen::VectorXd default_init(Family family, const CountSeries& x) {
    const Eigen::VectorXd trawl = default_trawl(family);
    Eigen::VectorXd probe(parameter_count(family));
    probe.head(seed_parameter_count(family)).setConstant(0.5);
    probe.tail(trawl.size()) = trawl;
    const double leb = leb_full(make_model(family, probe, x.delta).trawl);
    const auto [k1, k2] = sample_cumulants(x);
    const GmmResult seed = seed_from_cumulants(family, k1, k2, leb);
    Eigen::VectorXd theta(parameter_count(family));
    theta << seed.theta, trawl;
    return theta;
}

Eigen::VectorXd jitter(Family family, const Eigen::VectorXd& theta, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(-0.2, 0.2);
    Eigen::VectorXd out = theta;
    for (int i = 0; i < theta.size(); ++i) {
        out(i) *= 1.0 + unif(rng);
        if (is_unit_interval(family, i)) out(i) = std::clamp(out(i), 1e-6, 1.0 - 1e-6);
    }
    return out;
}

}  // namespace

CompositeValue family_composite(Family family, const Eigen::VectorXd& theta, double delta, const PairIndex& index,
                                bool with_gradient) {
    const IvtModel model = make_model(family, theta, delta);
    CompositeValue v = composite_likelihood(model, index, with_gradient);
    if (with_gradient && v.finite) v.gradient = model_jacobian(family, theta).transpose() * v.gradient;
    return v;
}

Eigen::VectorXd cl_gradient_unconstrained(Family family, const Eigen::VectorXd& eta, const CountSeries& x, int K) {
    const Eigen::VectorXd theta = from_unconstrained(family, eta);
    check_support(make_model(family, theta, x.delta).seed, x);
    const CompositeValue v = family_composite(family, theta, x.delta, PairIndex(x, K), true);
    if (!v.finite) throw EvaluationError("gradient undefined: " + v.diagnostic);
    return v.gradient.cwiseProduct(transform_jacobian(family, eta));
}

FitResult fit_mcl(Family family, const CountSeries& x, const FitOptions& options) {
    const int K = options.K > 0 ? options.K : default_K(family);
    const int q = trawl_parameter_count(family);
    if (K < q) throw DomainError("K must be at least the number of trawl parameters for identification");
    if (x.size() <= K) throw DomainError("series length must exceed K");
    if (family.seed != SeedKind::Skellam) {
        for (long v : x.values) {
            if (v < 0) throw DomainError("negative counts are outside the support of the " + family.tag() + " family");
        }
    }

    FitResult fit;
    fit.family = family;
    fit.delta = x.delta;
    fit.n = x.size();
    fit.K = K;

    const PairIndex index(x, K);
    const double scale = 1.0 / static_cast<double>(x.size());
    Objective objective = [&](const Eigen::VectorXd& eta, Eigen::VectorXd& grad) {
        grad.resize(eta.size());
        if (!eta.allFinite() || eta.cwiseAbs().maxCoeff() > kEtaBound) return std::numeric_limits<double>::infinity();
        const Eigen::VectorXd theta = from_unconstrained(family, eta);
        try {
            const CompositeValue v = family_composite(family, theta, x.delta, index, true);
            if (!v.finite) return std::numeric_limits<double>::infinity();
            grad = -scale * v.gradient.cwiseProduct(transform_jacobian(family, eta));
            return -scale * v.value;
        } catch (const DomainError&) {
            return std::numeric_limits<double>::infinity();
        } catch (const EvaluationError&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    Eigen::VectorXd start;
    if (options.init) {
        validate(family, *options.init);
        start = *options.init;
        fit.init_source = "user";
    } else {
        const int lags = std::min<long>(std::max({K, q, family.trawl == TrawlKind::Exp ? 1 : 10}), x.size() - 1);
        GmmResult gmm;
        try {
            gmm = fit_gmm_two_step(family, x, lags);
        } catch (const std::exception& e) {
            gmm.ok = false;
            gmm.diagnostic = e.what();
        }
        if (gmm.ok) {
            start = gmm.theta;
            fit.init_source = "gmm";
            if (gmm.boundary) fit.diagnostics.push_back("initial value: " + gmm.diagnostic);
        } else {
            start = default_init(family, x);
            fit.init_source = "default";
            fit.diagnostics.push_back("two-step GMM initialization failed (" + gmm.diagnostic + "); default start used");
        }
    }

    OptimizeResult best = minimize_bfgs(objective, to_unconstrained(family, start), options.optimizer);
    int iterations = best.iterations;
    if (!best.converged && options.multistarts > 0) {
        fit.diagnostics.push_back("first run did not converge (" + best.message + "); multistart used");
        std::mt19937_64 rng(options.jitter_seed);
        std::vector<Eigen::VectorXd> optima;
        if (std::isfinite(best.value)) optima.push_back(from_unconstrained(family, best.x));
        for (int j = 0; j < options.multistarts; ++j) {
            const Eigen::VectorXd s = jitter(family, start, rng);
            OptimizeResult r = minimize_bfgs(objective, to_unconstrained(family, s), options.optimizer);
            iterations += r.iterations;
            if (std::isfinite(r.value)) optima.push_back(from_unconstrained(family, r.x));
            const bool better = (r.converged && !best.converged) ||
                                (r.converged == best.converged && r.value < best.value) || !std::isfinite(best.value);
            if (better) best = std::move(r);
        }
        if (optima.size() > 1) {
            double spread = 0.0;
            for (int i = 0; i < parameter_count(family); ++i) {
                double lo = optima[0](i);
                double hi = optima[0](i);
                for (const auto& o : optima) {
                    lo = std::min(lo, o(i));
                    hi = std::max(hi, o(i));
                }
                spread = std::max(spread, (hi - lo) / std::max(std::abs(hi), 1e-12));
            }
            fit.multistart_spread = spread;
        }
    }

    // a flat objective can stop the optimizer short of a bound it is drifting toward
    std::vector<int> drifting;
    if (std::isfinite(best.value)) {
        for (int i = 0; i < best.x.size(); ++i) {
            for (double dir : {-1.0, 1.0}) {
                bool moved = false;
                while (std::abs(best.x(i)) < kEtaBound) {
                    Eigen::VectorXd y = best.x;
                    y(i) = std::clamp(y(i) + 5.0 * dir, -kEtaBound, kEtaBound);
                    Eigen::VectorXd g;
                    const double v = objective(y, g);
                    if (!(v <= best.value)) break;
                    best.x = y;
                    best.value = v;
                    best.gradient = g;
                    moved = true;
                }
                if (moved) drifting.push_back(i);
            }
        }
    }

    fit.theta = from_unconstrained(family, best.x);
    fit.cl = std::isfinite(best.value) ? -best.value * static_cast<double>(x.size()) : -std::numeric_limits<double>::infinity();
    fit.iterations = iterations;
    fit.gradient_norm = best.gradient.size() > 0 ? best.gradient.lpNorm<Eigen::Infinity>() : INFINITY;
    fit.converged = best.converged;
    if (best.x.cwiseAbs().maxCoeff() > kBoundaryFlag || !drifting.empty()) {
        fit.boundary = true;
        fit.converged = false;
        const auto names = parameter_names(family);
        for (int i = 0; i < best.x.size(); ++i) {
            if (std::abs(best.x(i)) > kBoundaryFlag || std::count(drifting.begin(), drifting.end(), i) > 0) {
                fit.diagnostics.push_back("parameter " + names[i] + " driven to the boundary of its range");
            }
        }
    }
    if (!fit.converged && !fit.boundary) fit.diagnostics.push_back("optimizer: " + best.message);
    return fit;
}

}  // namespace ivt
