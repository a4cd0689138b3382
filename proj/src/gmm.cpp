#include "ivt/gmm.hpp"

#include "ivt/optimize.hpp"
#include "ivt/parallel.hpp"
#include "ivt/rng.hpp"
#include "ivt/simulate.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <vector>

namespace ivt {

namespace {

// Full parameter vector with placeholder seed values around trawl parameters.
Eigen::VectorXd with_dummy_seed(Family family, const Eigen::VectorXd& trawl_theta) {
    const int s = seed_parameter_count(family);
    Eigen::VectorXd theta(s + trawl_theta.size());
    theta.head(s).setConstant(0.5);
    theta.tail(trawl_theta.size()) = trawl_theta;
    return theta;
}

Eigen::VectorXd trawl_unconstrained(Family family, const Eigen::VectorXd& trawl_theta) {
    return to_unconstrained(family, with_dummy_seed(family, trawl_theta)).tail(trawl_theta.size());
}

Eigen::VectorXd trawl_natural(Family family, const Eigen::VectorXd& trawl_eta) {
    const int s = seed_parameter_count(family);
    Eigen::VectorXd eta(s + trawl_eta.size());
    eta.head(s).setZero();
    eta.tail(trawl_eta.size()) = trawl_eta;
    return from_unconstrained(family, eta).tail(trawl_eta.size());
}

std::vector<Eigen::VectorXd> trawl_starts(Family family, const Eigen::VectorXd& rho_hat, double delta) {
    const double r1 = rho_hat.size() > 0 ? rho_hat(0) : 0.5;
    const double lam = (r1 > 0.0 && r1 < 1.0) ? -std::log(r1) / delta : 1.0;
    std::vector<Eigen::VectorXd> starts;
    switch (family.trawl) {
        case TrawlKind::Exp: starts.push_back(Eigen::VectorXd{{lam}}); break;
        case TrawlKind::SupExp:
            for (double w : {0.3, 0.7}) {
                for (double ratio : {3.0, 10.0}) starts.push_back(Eigen::VectorXd{{w, lam / std::sqrt(ratio), lam * std::sqrt(ratio)}});
            }
            break;
        case TrawlKind::Ig:
            for (double d : {0.3, 1.0, 3.0}) {
                for (double g : {0.3, 1.0, 3.0}) starts.push_back(Eigen::VectorXd{{d, g}});
            }
            break;
        case TrawlKind::Gamma:
            for (double H : {0.5, 1.5, 4.0}) {
                for (double a : {0.2, 1.0, 5.0}) starts.push_back(Eigen::VectorXd{{H, a}});
            }
            break;
    }
    return starts;
}

Eigen::MatrixXd trawl_jacobian_block(Family family, const Eigen::VectorXd& theta, const IvtModel& model) {
    const int s = seed_parameter_count(family);
    const Eigen::MatrixXd J = model_jacobian(family, theta);
    const int sm = parameter_count(model.seed);
    return J.block(sm, s, J.rows() - sm, J.cols() - s);
}

Eigen::MatrixXd cholesky_factor(const Eigen::MatrixXd& A) {
    if (A.rows() != A.cols()) throw DomainError("GMM weight matrix must be square");
    if (!A.isApprox(A.transpose(), 1e-10)) throw DomainError("GMM weight matrix must be symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success) throw DomainError("GMM weight matrix must be positive definite");
    return llt.matrixL();
}

}  // namespace

Eigen::VectorXd sample_acf(const CountSeries& x, int max_lag) {
    const long n = x.size();
    if (max_lag < 1 || max_lag >= n) throw DomainError("autocorrelation lags must lie in [1, n)");
    const auto [mean, var] = sample_cumulants(x);
    Eigen::VectorXd rho(max_lag);
    for (int k = 1; k <= max_lag; ++k) {
        double acc = 0.0;
        for (long i = 0; i + k < n; ++i) {
            acc += (static_cast<double>(x.values[static_cast<std::size_t>(i)]) - mean) *
                   (static_cast<double>(x.values[static_cast<std::size_t>(i + k)]) - mean);
        }
        rho(k - 1) = var > 0.0 ? acc / static_cast<double>(n) / var : 0.0;
    }
    return rho;
}

std::pair<double, double> sample_cumulants(const CountSeries& x) {
    if (x.values.empty()) throw DomainError("empty series");
    double mean = 0.0;
    for (long v : x.values) mean += static_cast<double>(v);
    mean /= static_cast<double>(x.size());
    double var = 0.0;
    for (long v : x.values) var += (static_cast<double>(v) - mean) * (static_cast<double>(v) - mean);
    var /= static_cast<double>(x.size());
    return {mean, var};
}

GmmResult seed_from_cumulants(Family family, double kappa1, double kappa2, double leb) {
    GmmResult out;
    Eigen::VectorXd seed(seed_parameter_count(family));
    constexpr double kFloor = 1e-6;
    switch (family.seed) {
        case SeedKind::Poisson:
            seed(0) = kappa1 / leb;
            if (!(seed(0) > 0.0)) {
                seed(0) = kFloor;
                out.boundary = true;
                out.diagnostic = "sample mean is not positive";
            }
            break;
        case SeedKind::NegBin: {
            double p = 1.0 - kappa1 / kappa2;
            if (!(kappa2 > kappa1) || !(kappa1 > 0.0)) {
                p = kFloor;
                out.boundary = true;
                out.diagnostic = "sample variance does not exceed the mean; p at its lower boundary";
            }
            seed(1) = p;
            seed(0) = std::max(kappa1, kFloor) * (1.0 - p) / (p * leb);
            break;
        }
        case SeedKind::Skellam:
            seed(0) = (kappa2 + kappa1) / (2.0 * leb);
            seed(1) = (kappa2 - kappa1) / (2.0 * leb);
            for (int i = 0; i < 2; ++i) {
                if (!(seed(i) > 0.0)) {
                    seed(i) = kFloor;
                    out.boundary = true;
                    out.diagnostic = "variance does not exceed |mean|; a Skellam intensity at its lower boundary";
                }
            }
            break;
    }
    out.theta = seed;
    out.ok = true;
    return out;
}

GmmResult gmm_two_step_from_moments(Family family, const Eigen::VectorXd& rho_hat, double kappa1, double kappa2,
                                    double delta) {
    GmmResult out;
    const int s = seed_parameter_count(family);
    const int q = trawl_parameter_count(family);
    if (rho_hat.size() < q) throw DomainError("two-step GMM needs at least as many lags as trawl parameters");
    Eigen::VectorXd trawl_theta;
    if (family.trawl == TrawlKind::Exp) {
        if (!(rho_hat(0) > 0.0)) {
            out.diagnostic = "lag-1 autocorrelation is not positive; log undefined";
            return out;
        }
        if (rho_hat(0) >= 1.0) {
            out.diagnostic = "lag-1 autocorrelation is not below 1";
            return out;
        }
        trawl_theta = Eigen::VectorXd{{-std::log(rho_hat(0)) / delta}};
    } else {
        const Eigen::Index K = rho_hat.size();
        Residuals resid = [&](const Eigen::VectorXd& eta, Eigen::MatrixXd& jac) {
            const Eigen::VectorXd tt = trawl_natural(family, eta);
            const Eigen::VectorXd theta = with_dummy_seed(family, tt);
            Eigen::VectorXd r(K);
            jac.resize(K, q);
            IvtModel model;
            try {
                model = make_model(family, theta, delta);
            } catch (const DomainError&) {
                r.setConstant(std::numeric_limits<double>::quiet_NaN());
                return r;
            }
            const Eigen::MatrixXd Jt = trawl_jacobian_block(family, theta, model);
            const Eigen::VectorXd dtheta = transform_jacobian(family, to_unconstrained(family, theta)).tail(q);
            for (Eigen::Index k = 0; k < K; ++k) {
                const double h = static_cast<double>(k + 1) * delta;
                r(k) = acf(model.trawl, h) - rho_hat(k);
                jac.row(k) = (acf_gradient(model.trawl, h).transpose() * Jt).cwiseProduct(dtheta.transpose());
            }
            return r;
        };
        double best = std::numeric_limits<double>::infinity();
        OptimizeOptions opts;
        opts.gradient_tolerance = 1e-12;
        opts.max_iterations = 300;
        for (const Eigen::VectorXd& start : trawl_starts(family, rho_hat, delta)) {
            const OptimizeResult r = least_squares(resid, trawl_unconstrained(family, start), opts);
            if (std::isfinite(r.value) && r.value < best && r.x.allFinite() && r.x.cwiseAbs().maxCoeff() < 30.0) {
                best = r.value;
                trawl_theta = trawl_natural(family, r.x);
            }
        }
        if (trawl_theta.size() == 0) {
            out.diagnostic = "autocorrelation least squares failed";
            return out;
        }
        out.objective = best;
    }

    const double leb = leb_full(make_model(family, with_dummy_seed(family, trawl_theta), delta).trawl);
    const GmmResult seed = seed_from_cumulants(family, kappa1, kappa2, leb);
    out.boundary = seed.boundary;
    out.diagnostic = seed.diagnostic;
    out.theta.resize(s + q);
    out.theta << seed.theta, trawl_theta;
    out.ok = true;
    return out;
}

GmmResult fit_gmm_two_step(Family family, const CountSeries& x, int K_lags) {
    if (K_lags < trawl_parameter_count(family)) {
        throw DomainError("two-step GMM needs K_lags >= number of trawl parameters");
    }
    const auto [k1, k2] = sample_cumulants(x);
    return gmm_two_step_from_moments(family, sample_acf(x, K_lags), k1, k2, x.delta);
}

Eigen::VectorXd model_moments(const IvtModel& model, int m) {
    const double k1 = cumulant(model.seed, 1);
    const double k2 = cumulant(model.seed, 2);
    const double mu = k1 * leb_full(model.trawl);
    Eigen::VectorXd out(m + 2);
    out(0) = mu;
    for (int k = 0; k <= m; ++k) out(k + 1) = mu * mu + k2 * leb_intersection(model.trawl, k * model.delta);
    return out;
}

Eigen::MatrixXd model_moment_jacobian(Family family, const Eigen::VectorXd& theta, double delta, int m) {
    const IvtModel model = make_model(family, theta, delta);
    const int r = parameter_count(model.seed);
    const int s = parameter_count(model.trawl);
    const double k1 = cumulant(model.seed, 1);
    const double k2 = cumulant(model.seed, 2);
    const Eigen::VectorXd dk1 = cumulant_gradient(model.seed, 1);
    const Eigen::VectorXd dk2 = cumulant_gradient(model.seed, 2);
    const double leb = leb_full(model.trawl);
    const LebGradient g0 = leb_gradients(model.trawl, 0.0);
    const double mu = k1 * leb;
    Eigen::VectorXd dmu(r + s);
    dmu << dk1 * leb, k1 * g0.full;
    Eigen::MatrixXd jm(m + 2, r + s);
    jm.row(0) = dmu.transpose();
    for (int k = 0; k <= m; ++k) {
        const double h = k * delta;
        const double inter = leb_intersection(model.trawl, h);
        const LebGradient g = leb_gradients(model.trawl, h);
        Eigen::VectorXd d(r + s);
        d << dk2 * inter, k2 * g.intersection;
        jm.row(k + 1) = (2.0 * mu * dmu + d).transpose();
    }
    return jm * model_jacobian(family, theta);
}

Eigen::MatrixXd moment_contributions(const CountSeries& x, int m) {
    const long n = x.size();
    if (m < 0 || m >= n) throw DomainError("moment lag count m must lie in [0, n)");
    Eigen::MatrixXd h(n - m, m + 2);
    for (long t = 0; t < n - m; ++t) {
        const auto xt = static_cast<double>(x.values[static_cast<std::size_t>(t)]);
        h(t, 0) = xt;
        for (int k = 0; k <= m; ++k) h(t, k + 1) = xt * static_cast<double>(x.values[static_cast<std::size_t>(t + k)]);
    }
    return h;
}

Eigen::MatrixXd long_run_covariance(const Eigen::MatrixXd& h, int L) {
    const Eigen::Index T = h.rows();
    if (T < 2) throw DomainError("long-run covariance needs at least two rows");
    const Eigen::RowVectorXd mean = h.colwise().mean();
    const Eigen::MatrixXd c = h.rowwise() - mean;
    Eigen::MatrixXd out = c.transpose() * c / static_cast<double>(T);
    const Eigen::Index lags = std::min<Eigen::Index>(L, T - 1);
    for (Eigen::Index l = 1; l <= lags; ++l) {
        const Eigen::MatrixXd gl = c.topRows(T - l).transpose() * c.bottomRows(T - l) / static_cast<double>(T);
        out += gl + gl.transpose();
    }
    return out;
}

GmmResult gmm_full_from_moments(Family family, const Eigen::VectorXd& sample_means, double delta,
                                const Eigen::MatrixXd& A, const Eigen::VectorXd& init) {
    const int m = static_cast<int>(sample_means.size()) - 2;
    if (m < 0) throw DomainError("GMM needs at least the mean and second moment");
    if (A.rows() != sample_means.size()) throw DomainError("GMM weight matrix has the wrong size");
    const Eigen::MatrixXd L = cholesky_factor(A);
    const int p = parameter_count(family);
    Residuals resid = [&](const Eigen::VectorXd& eta, Eigen::MatrixXd& jac) {
        const Eigen::VectorXd theta = from_unconstrained(family, eta);
        Eigen::VectorXd r(m + 2);
        jac.resize(m + 2, p);
        IvtModel model;
        try {
            model = make_model(family, theta, delta);
        } catch (const DomainError&) {
            r.setConstant(std::numeric_limits<double>::quiet_NaN());
            return r;
        }
        const Eigen::VectorXd g = sample_means - model_moments(model, m);
        r = L.transpose() * g;
        const Eigen::MatrixXd dg = -model_moment_jacobian(family, theta, delta, m);
        jac = L.transpose() * dg * transform_jacobian(family, eta).asDiagonal();
        return r;
    };
    OptimizeOptions opts;
    opts.gradient_tolerance = 1e-10;
    opts.max_iterations = 500;
    const OptimizeResult res = least_squares(resid, to_unconstrained(family, init), opts);
    GmmResult out;
    out.theta = from_unconstrained(family, res.x);
    out.objective = 2.0 * res.value;
    out.ok = res.x.allFinite() && std::isfinite(res.value);
    out.boundary = res.x.cwiseAbs().maxCoeff() > 25.0;
    out.diagnostic = res.message;
    return out;
}

GmmResult fit_gmm_full(Family family, const CountSeries& x, int m, const GmmWeight& weight,
                       const std::optional<Eigen::VectorXd>& init) {
    if (m < 1) throw DomainError("full GMM needs at least one autocovariance lag");
    const Eigen::MatrixXd h = moment_contributions(x, m);
    const Eigen::VectorXd means = h.colwise().mean().transpose();
    Eigen::VectorXd start;
    if (init) {
        start = *init;
    } else {
        const GmmResult two = fit_gmm_two_step(family, x, std::max(m, trawl_parameter_count(family)));
        if (!two.ok) return two;
        start = two.theta;
    }
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(m + 2, m + 2);
    if (weight.kind == GmmWeighting::Given) A = weight.matrix;
    GmmResult first = gmm_full_from_moments(family, means, x.delta, A, start);
    if (weight.kind != GmmWeighting::TwoStage || !first.ok) return first;
    const Eigen::MatrixXd sigma = long_run_covariance(h, weight.long_run_lags);
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success) {
        first.diagnostic = "long-run covariance not positive definite; identity weights kept";
        return first;
    }
    const Eigen::MatrixXd A2 = llt.solve(Eigen::MatrixXd::Identity(m + 2, m + 2));
    return gmm_full_from_moments(family, means, x.delta, 0.5 * (A2 + A2.transpose()), first.theta);
}

Eigen::MatrixXd gmm_asymptotic_variance(Family family, const Eigen::VectorXd& theta, double delta, int m,
                                        const Eigen::MatrixXd& A, const Eigen::MatrixXd& sigma_a) {
    const Eigen::MatrixXd G = -model_moment_jacobian(family, theta, delta, m);
    const Eigen::MatrixXd gag = G.transpose() * A * G;
    const Eigen::MatrixXd M = gag.ldlt().solve(G.transpose() * A);
    return M * sigma_a * M.transpose();
}

Eigen::MatrixXd gmm_sigma_a_sim(Family family, const Eigen::VectorXd& theta, double delta, int m, long B, long N,
                                std::uint64_t seed, int workers, int L) {
    if (B < 1) throw DomainError("need at least one simulated path");
    const IvtModel model = make_model(family, theta, delta);
    const Eigen::VectorXd mom = model_moments(model, m);
    std::vector<Eigen::MatrixXd> parts(static_cast<std::size_t>(B));
    parallel_for(B, workers, [&](long b) {
        std::mt19937_64 rng = make_stream(seed, static_cast<std::uint64_t>(b));
        const CountSeries path = simulate_path(model, N, rng);
        Eigen::MatrixXd h = moment_contributions(path, m);
        h.rowwise() -= mom.transpose();
        parts[static_cast<std::size_t>(b)] = long_run_covariance(h, L);
    });
    Eigen::MatrixXd total = Eigen::MatrixXd::Zero(m + 2, m + 2);
    for (const auto& part : parts) total += part;
    return total / static_cast<double>(B);
}

}  // namespace ivt
