#include "ivt/inference.hpp"

#include "ivt/parallel.hpp"
#include "ivt/rng.hpp"
#include "ivt/simulate.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace ivt {

Eigen::MatrixXd hessian_from_gradient(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad,
                                      const Eigen::VectorXd& theta, const Eigen::VectorXd& steps) {
    const Eigen::Index p = theta.size();
    Eigen::MatrixXd h(p, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        Eigen::VectorXd up = theta;
        Eigen::VectorXd down = theta;
        up(j) += steps(j);
        down(j) -= steps(j);
        h.col(j) = (grad(up) - grad(down)) / (2.0 * steps(j));
    }
    return 0.5 * (h + h.transpose());
}

Eigen::MatrixXd hessian_estimate(Family family, const CountSeries& x, int K, const Eigen::VectorXd& theta) {
    validate(family, theta);
    const PairIndex index(x, K);
    Eigen::VectorXd steps(theta.size());
    for (int i = 0; i < theta.size(); ++i) {
        double s = 1e-4 * std::max(std::abs(theta(i)), 1e-8);
        if (is_unit_interval(family, i)) s = std::min(s, 0.5 * std::min(theta(i), 1.0 - theta(i)));
        steps(i) = s;
    }
    auto grad = [&](const Eigen::VectorXd& t) -> Eigen::VectorXd {
        const CompositeValue v = family_composite(family, t, x.delta, index, true);
        if (!v.finite) throw EvaluationError("composite likelihood not finite near the estimate: " + v.diagnostic);
        return v.gradient;
    };
    return -hessian_from_gradient(grad, theta, steps) / static_cast<double>(x.size());
}

Eigen::MatrixXd hac_from_scores(const Eigen::MatrixXd& scores, long n, int q) {
    if (q < 0) throw DomainError("HAC lag count must be nonnegative");
    const Eigen::Index T = scores.rows();
    if (q >= T) throw DomainError("HAC lag count must be smaller than the number of score terms");
    const double inv_n = 1.0 / static_cast<double>(n);
    Eigen::MatrixXd v = scores.transpose() * scores * inv_n;
    for (int j = 1; j <= q; ++j) {
        const Eigen::MatrixXd sj = scores.topRows(T - j).transpose() * scores.bottomRows(T - j) * inv_n;
        v += (1.0 - static_cast<double>(j) / (q + 1.0)) * (sj + sj.transpose());
    }
    return v;
}

Eigen::MatrixXd v_hat_hac(Family family, const CountSeries& x, int K, const Eigen::VectorXd& theta, int q) {
    if (q < 0 || q >= x.size() - K) throw DomainError("HAC lag count q must lie in [0, n - K)");
    const IvtModel model = make_model(family, theta, x.delta);
    check_support(model.seed, x);
    const PairIndex index(x, K);
    const Eigen::MatrixXd scores = origin_scores(model, index) * model_jacobian(family, theta);
    return hac_from_scores(scores, x.size(), q);
}

Eigen::MatrixXd score_covariance(const Eigen::MatrixXd& scores) {
    const Eigen::Index B = scores.rows();
    if (B < 2) throw DomainError("score covariance needs at least two replications");
    const Eigen::RowVectorXd mean = scores.colwise().mean();
    const Eigen::MatrixXd c = scores.rowwise() - mean;
    return c.transpose() * c / static_cast<double>(B - 1);
}

Eigen::MatrixXd v_hat_sim(Family family, const Eigen::VectorXd& theta, double delta, int K, long B, long N,
                          std::uint64_t seed, int workers) {
    if (B < 2) throw DomainError("simulation-based V needs B >= 2");
    if (N <= K) throw DomainError("simulated path length N must exceed K");
    const IvtModel model = make_model(family, theta, delta);
    const Eigen::MatrixXd J = model_jacobian(family, theta);
    Eigen::MatrixXd scores(B, theta.size());
    parallel_for(B, workers, [&](long b) {
        std::mt19937_64 rng = make_stream(seed, static_cast<std::uint64_t>(b));
        const CountSeries path = simulate_path(model, N, rng);
        const CompositeValue v = composite_likelihood(model, PairIndex(path, K), true);
        if (!v.finite) throw EvaluationError("simulated path has zero composite likelihood at theta");
        scores.row(b) = (J.transpose() * v.gradient).transpose() / std::sqrt(static_cast<double>(N));
    });
    return score_covariance(scores);
}

Eigen::MatrixXd symmetric_pinv(const Eigen::MatrixXd& A, double rel_tol) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (A + A.transpose()));
    const Eigen::VectorXd ev = es.eigenvalues();
    const double cut = rel_tol * ev.cwiseAbs().maxCoeff();
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (std::abs(ev(i)) > cut) inv(i) = 1.0 / ev(i);
    }
    return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

namespace {

// Inverse of H with a flag raised when H is not positive definite.
Eigen::MatrixXd invert_h(const Eigen::MatrixXd& H, bool& indefinite) {
    const Eigen::MatrixXd sym = 0.5 * (H + H.transpose());
    Eigen::LLT<Eigen::MatrixXd> llt(sym);
    indefinite = llt.info() != Eigen::Success;
    if (indefinite) return symmetric_pinv(sym);
    return llt.solve(Eigen::MatrixXd::Identity(H.rows(), H.cols()));
}

}  // namespace

SandwichEstimate sandwich(const Eigen::MatrixXd& H, const Eigen::MatrixXd& V, long n) {
    if (H.rows() != H.cols() || V.rows() != V.cols() || H.rows() != V.rows()) {
        throw DomainError("H and V must be square matrices of equal size");
    }
    SandwichEstimate out;
    out.H = H;
    out.V = V;
    const Eigen::MatrixXd h_inv = invert_h(H, out.h_indefinite);
    if (out.h_indefinite) out.diagnostics.push_back("H is not positive definite; pseudo-inverse used");
    const Eigen::MatrixXd g = h_inv * V * h_inv;
    out.G_inv = 0.5 * (g + g.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.G_inv, Eigen::EigenvaluesOnly);
    const double trace = out.G_inv.trace();
    if (es.eigenvalues().minCoeff() < -1e-8 * std::abs(trace)) {
        out.psd_violation = true;
        out.diagnostics.push_back("sandwich covariance is not positive semidefinite");
    }
    out.se = (out.G_inv.diagonal().cwiseMax(0.0) / static_cast<double>(n)).cwiseSqrt();
    return out;
}

InformationCriteria claic_clbic(double l_max, const Eigen::MatrixXd& V, const Eigen::MatrixXd& H, long n) {
    InformationCriteria ic;
    const Eigen::MatrixXd h_inv = invert_h(H, ic.pseudo_inverse);
    ic.penalty = (V * h_inv).trace();
    ic.claic = l_max - ic.penalty;
    ic.clbic = l_max - 0.5 * std::log(static_cast<double>(n)) * ic.penalty;
    return ic;
}

Inference infer(const FitResult& fit, const CountSeries& x, const InferenceOptions& options) {
    Inference out;
    const Eigen::MatrixXd H = hessian_estimate(fit.family, x, fit.K, fit.theta);
    Eigen::MatrixXd V;
    std::string method;
    if (options.method == VMethod::Hac) {
        const int q = options.q >= 0 ? options.q : static_cast<int>(std::ceil(std::cbrt(static_cast<double>(x.size()))));
        V = v_hat_hac(fit.family, x, fit.K, fit.theta, q);
        method = "hac(q=" + std::to_string(q) + ")";
    } else {
        V = v_hat_sim(fit.family, fit.theta, x.delta, fit.K, options.B, options.N, options.seed, options.workers);
        method = "simulation(B=" + std::to_string(options.B) + ",N=" + std::to_string(options.N) + ")";
    }
    out.sandwich = sandwich(H, V, x.size());
    out.sandwich.method = method;
    out.criteria = claic_clbic(fit.cl, V, H, x.size());
    if (out.criteria.pseudo_inverse) out.sandwich.diagnostics.push_back("information criteria use a pseudo-inverse of H");
    const IvtModel model = make_model(fit.family, fit.theta, fit.delta);
    if (is_long_memory(model.trawl)) {
        out.sandwich.se.reset();
        out.sandwich.se_reason = "asymptotic theory not covered";
        out.sandwich.diagnostics.push_back("long memory (Gamma trawl with H <= 1): standard errors withheld");
    }
    return out;
}

}  // namespace ivt
