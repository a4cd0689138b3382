#pragma once

#include "ivt/estimate.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ivt {

/// Symmetrized central-difference Jacobian of a gradient map with per-coordinate steps.
[[nodiscard]] Eigen::MatrixXd hessian_from_gradient(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad,
                                                    const Eigen::VectorXd& theta, const Eigen::VectorXd& steps);

/// H_hat = -(1/n) d^2 l_CL / d theta d theta' on the natural scale.
[[nodiscard]] Eigen::MatrixXd hessian_estimate(Family family, const CountSeries& x, int K, const Eigen::VectorXd& theta);

/// Bartlett-weighted long-run covariance of S_i = sum_k score(i, k), divided by n.
[[nodiscard]] Eigen::MatrixXd v_hat_hac(Family family, const CountSeries& x, int K, const Eigen::VectorXd& theta, int q);

/// Same estimator from precomputed per-origin score rows.
[[nodiscard]] Eigen::MatrixXd hac_from_scores(const Eigen::MatrixXd& scores, long n, int q);

/// Sample covariance (denominator B - 1) of the rows of a score matrix.
[[nodiscard]] Eigen::MatrixXd score_covariance(const Eigen::MatrixXd& scores);

/// Sample covariance of N^{-1/2} grad l_CL over B paths simulated at theta.
[[nodiscard]] Eigen::MatrixXd v_hat_sim(Family family, const Eigen::VectorXd& theta, double delta, int K, long B, long N,
                                        std::uint64_t seed, int workers = 1);

/// Moore-Penrose inverse of a symmetric matrix through its eigendecomposition.
[[nodiscard]] Eigen::MatrixXd symmetric_pinv(const Eigen::MatrixXd& A, double rel_tol = 1e-12);

struct SandwichEstimate {
    Eigen::MatrixXd H;
    Eigen::MatrixXd V;
    Eigen::MatrixXd G_inv;
    /// sqrt(diag(G_inv) / n), or empty when standard errors are withheld.
    std::optional<Eigen::VectorXd> se;
    std::string se_reason;
    std::string method;
    bool h_indefinite{false};
    bool psd_violation{false};
    std::vector<std::string> diagnostics;
};

/// G_inv = H^{-1} V H^{-1}, falling back to a pseudo-inverse when H is not positive definite.
[[nodiscard]] SandwichEstimate sandwich(const Eigen::MatrixXd& H, const Eigen::MatrixXd& V, long n);

struct InformationCriteria {
    double penalty{0.0};
    double claic{0.0};
    double clbic{0.0};
    bool pseudo_inverse{false};
};

/// Penalty tr(V H^{-1}); CLAIC = l - penalty, CLBIC = l - log(n)/2 * penalty. Larger is better.
[[nodiscard]] InformationCriteria claic_clbic(double l_max, const Eigen::MatrixXd& V, const Eigen::MatrixXd& H, long n);

enum class VMethod { Simulation, Hac };

struct InferenceOptions {
    VMethod method{VMethod::Simulation};
    long B{500};
    long N{500};
    int q{-1};  // negative selects ceil(n^(1/3))
    std::uint64_t seed{1};
    int workers{1};
};

struct Inference {
    SandwichEstimate sandwich;
    InformationCriteria criteria;
};

/// Sandwich covariance and information criteria at a fitted point.
[[nodiscard]] Inference infer(const FitResult& fit, const CountSeries& x, const InferenceOptions& options);

}  // namespace ivt
